#pragma once
/**
 * @file   metrics.hpp
 * @brief  Displacement error and off-road false positive (ORFP) ratios.
 *
 * A predicted waypoint is an ORFP when it is off-road while its ground truth is in-road under
 * the same policy. If either one falls outside the grid, the previous step's ORFP result is
 * carried forward; at the first step that result is "not ORFP".
 */

#include <bdtr/map_raster.hpp>
#include <bdtr/scene.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace bdtr {

enum class OffroadLabel : std::uint8_t { inroad, offroad, out_of_range };
enum class OffroadPolicy : std::uint8_t { center, box };

const char* to_string(OffroadLabel l) noexcept;
const char* to_string(OffroadPolicy p) noexcept;

OffroadLabel is_offroad_center(const Waypoint& s, const DrivableMask& mask);

/// Any in-range non-drivable corner wins over an out-of-grid corner.
OffroadLabel is_offroad_box(const Waypoint& s, const DrivableMask& mask);

OffroadLabel classify(const Waypoint& s, const DrivableMask& mask, OffroadPolicy policy);

/// N × T flags, 1 where the prediction is an ORFP after the out-of-range reuse rule.
using FlagMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

FlagMatrix orfp_flags(std::span<const Track> preds, std::span<const Track> gts, const DrivableMask& mask,
                      OffroadPolicy policy);

struct HorizonStats {
    std::vector<double> per_horizon;
    double average{0.0};
    double at_final{0.0};
};

HorizonStats orfp_ratio(std::span<const Track> preds, std::span<const Track> gts, const DrivableMask& mask,
                        OffroadPolicy policy);

/// Center displacement, averaged over actors per horizon.
HorizonStats l2_errors(std::span<const Track> preds, std::span<const Track> gts);

struct MetricsReport {
    HorizonStats l2;
    HorizonStats ctr_orfp;
    HorizonStats box_orfp;
    std::vector<long long> counts;  ///< waypoints evaluated per horizon

    double l2_avg() const { return l2.average; }
    double l2_at_final() const { return l2.at_final; }
    double ctr_orfp_avg() const { return ctr_orfp.average; }
    double ctr_orfp_at_final() const { return ctr_orfp.at_final; }
    double box_orfp_avg() const { return box_orfp.average; }
    double box_orfp_at_final() const { return box_orfp.at_final; }
};

MetricsReport evaluate_metrics(std::span<const Track> preds, std::span<const Track> gts, const DrivableMask& mask);

}  // namespace bdtr
