#pragma once
/**
 * @file   toy_optimizer.hpp
 * @brief  Fixed-step gradient descent of a single actor's (x, y, θ) under the ellipse loss.
 *
 * Box length and width never change. The default scene is a 20 m × 20 m grid of 0.1 m cells
 * whose half-plane x > 0 is non-drivable, with a 4 m × 2 m actor centered on the boundary
 * and tilted 30° away from the boundary direction.
 */

#include <bdtr/losses.hpp>
#include <bdtr/map_raster.hpp>

#include <vector>

namespace bdtr {

struct OptimizerConfig {
    int iterations{1000};
    double step_size_xy{0.05};      ///< m per unit gradient
    double step_size_theta{0.01};   ///< rad per unit gradient
    Truncation<double> truncation_md{1.0};
    double k{kCircumscribe<double>};
};

void validate(const OptimizerConfig& cfg);

struct TraceRow {
    int iteration{0};
    Waypoint state;
    double loss{0.0};
    double grad_norm{0.0};
};

enum class OptStatus { completed, boundary_exit };

const char* to_string(OptStatus s) noexcept;

struct OptTrace {
    std::vector<TraceRow> rows;
    OptStatus status{OptStatus::completed};

    const TraceRow& initial() const { return rows.front(); }
    const TraceRow& final() const { return rows.back(); }
};

/// Runs until the iteration budget is spent or the actor's raster leaves the grid.
OptTrace run_toy(const Waypoint& initial, const DrivableMask& mask, const OptimizerConfig& cfg = {});

/// Straight drivable-region boundary through `point`; `normal` points into the non-drivable side.
struct LineBoundary {
    Point2 point{Point2::Zero()};
    Point2 normal{Point2::UnitX()};

    /// Positive on the drivable side.
    double clearance(const Point2& p) const { return -(p - point).dot(normal.normalized()); }

    /// Unsigned angle in [0, π/2] between the box's long axis and the boundary line.
    double orientation_residual(double theta) const;
};

struct ToyScene {
    Grid grid;
    DrivableMask mask;
    LineBoundary boundary;
    Waypoint initial;
};

ToyScene make_toy_scene();

}  // namespace bdtr
