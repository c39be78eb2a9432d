#pragma once

#include <bdtr/geometry.hpp>

#include <span>
#include <string>
#include <vector>

namespace bdtr {

using Waypoint = WaypointState<double>;
using Track = Trajectory<double>;
using Grid = GridSpec<double>;

/// Number of timesteps shared by all tracks; throws AlignmentError when predictions and
/// ground truth disagree in actor count or length.
inline std::size_t check_aligned(std::span<const Track> preds, std::span<const Track> gts) {
    if (preds.size() != gts.size())
        throw AlignmentError("predictions cover " + std::to_string(preds.size()) + " actors but ground truth covers " +
                             std::to_string(gts.size()));
    if (preds.empty()) return 0;
    const std::size_t steps = preds.front().size();
    for (std::size_t a = 0; a < preds.size(); ++a) {
        if (preds[a].size() != gts[a].size())
            throw AlignmentError("actor " + std::to_string(a) + ": predicted length " +
                                 std::to_string(preds[a].size()) + " != ground-truth length " +
                                 std::to_string(gts[a].size()));
        if (preds[a].size() != steps)
            throw AlignmentError("actor " + std::to_string(a) + ": length " + std::to_string(preds[a].size()) +
                                 " differs from the scene horizon " + std::to_string(steps));
    }
    return steps;
}

}  // namespace bdtr
