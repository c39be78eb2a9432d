#pragma once
/**
 * @file   losses.hpp
 * @brief  Trajectory regression loss, the ellipse scene-compliance loss and their combination.
 *
 * Both losses are sums over actors and timesteps. The ellipse loss sums the truncated Gaussian
 * raster of each predicted waypoint over non-drivable cells, and only counts steps whose
 * ground-truth box is fully drivable. Gradients are reported for (x, y, θ) only.
 */

#include <bdtr/map_raster.hpp>
#include <bdtr/raster.hpp>
#include <bdtr/scene.hpp>

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace bdtr {

inline constexpr double kDefaultLambda = 0.03;
inline constexpr double kDefaultBeta = 1.0;
inline constexpr double kDefaultOffroadFactor = 5.0;

struct LossConfig {
    double k{kCircumscribe<double>};
    Truncation<double> truncation_md{1.0};
    double beta{kDefaultBeta};
    double lambda{kDefaultLambda};
};

/// Smooth-L1 (Huber) with transition at beta: 0.5 r²/β inside, |r| - 0.5β outside.
double smooth_l1(double r, double beta = kDefaultBeta);

/// Sum of the six smooth-L1 terms (x, y, l, w, sin θ, cos θ) over actors and steps.
double vanilla_loss(std::span<const Track> preds, std::span<const Track> gts, double beta = kDefaultBeta);

/// I*: true iff the ground-truth center and all four corners fall in drivable cells.
bool indicator_in_drivable(const Waypoint& gt, const DrivableMask& mask);

/// Ellipse-loss contribution of one predicted waypoint and its (x, y, θ) gradient.
struct WaypointTerm {
    double value{0.0};
    Eigen::Vector3d grad{Eigen::Vector3d::Zero()};
};

WaypointTerm waypoint_ellipse_term(const Waypoint& pred, const DrivableMask& mask, double k, Truncation<double> md);

using StepGradients = Eigen::Matrix<double, Eigen::Dynamic, 3>;  ///< T × (x, y, θ)

struct EllipseLoss {
    double value{0.0};
    Eigen::MatrixXd contributions;         ///< N × T
    Eigen::MatrixXi indicators;            ///< N × T, the I* gate
    std::vector<StepGradients> gradients;  ///< per actor
};

/// Throws ConfigError when `grid` differs from the mask's grid.
EllipseLoss ellipse_loss(std::span<const Track> preds, std::span<const Track> gts, const DrivableMask& mask,
                         const Grid& grid, double k = kCircumscribe<double>, Truncation<double> md = 1.0);

struct LossReport {
    LossConfig config;
    double vanilla{0.0};
    double ellipse{0.0};
    double total{0.0};
    std::size_t waypoints{0};
    Eigen::MatrixXd contributions;
    Eigen::MatrixXi indicators;
    std::vector<StepGradients> ellipse_gradients;

    double vanilla_mean() const { return waypoints ? vanilla / static_cast<double>(waypoints) : 0.0; }
    double ellipse_mean() const { return waypoints ? ellipse / static_cast<double>(waypoints) : 0.0; }
    double total_mean() const { return waypoints ? total / static_cast<double>(waypoints) : 0.0; }
};

LossReport combined_loss(std::span<const Track> preds, std::span<const Track> gts, const DrivableMask& mask,
                         const Grid& grid, const LossConfig& cfg = {});

/// Vanilla loss with the x and y terms of center-policy ORFP waypoints scaled by `factor`.
double offroad_reweighted_loss(std::span<const Track> preds, std::span<const Track> gts, const DrivableMask& mask,
                               double factor = kDefaultOffroadFactor, double beta = kDefaultBeta);

}  // namespace bdtr
