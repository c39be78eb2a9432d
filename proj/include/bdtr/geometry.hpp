#pragma once
/**
 * @file   geometry.hpp
 * @brief  Actor state, BEV grid geometry and the box-shaped Gaussian covariance.
 *
 * Everything here is templated on the scalar type. Angles are radians measured
 * counterclockwise from +x and are never normalized; every function is
 * 2π-periodic in theta instead.
 */

#include <bdtr/error.hpp>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace bdtr {

template <typename Scalar> using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

/// Symmetric positive definite 2x2 covariance in m².
template <typename Scalar> using Covariance2 = Matrix2<Scalar>;

/// Scale factor for which the unit Mahalanobis ellipse passes through the box corners.
template <typename Scalar> inline constexpr Scalar kCircumscribe = std::numbers::sqrt2_v<Scalar> / Scalar(2);

/// One waypoint of an actor: box center, length along heading, width, heading.
template <typename Scalar> struct WaypointState {
    Scalar x{0};
    Scalar y{0};
    Scalar l{1};
    Scalar w{1};
    Scalar theta{0};

    Vector2<Scalar> center() const { return {x, y}; }

    /// Unit vector along the heading.
    Vector2<Scalar> heading() const { return {std::cos(theta), std::sin(theta)}; }

    bool valid() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta) && std::isfinite(l) &&
               std::isfinite(w) && l > Scalar(0) && w > Scalar(0);
    }

    bool operator==(const WaypointState&) const = default;
};

template <typename Scalar> void validate(const WaypointState<Scalar>& s, const std::string& context = "waypoint") {
    if (!(s.l > Scalar(0)) || !std::isfinite(s.l)) throw ValidationError(context + ": box length must be positive");
    if (!(s.w > Scalar(0)) || !std::isfinite(s.w)) throw ValidationError(context + ": box width must be positive");
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.theta))
        throw ValidationError(context + ": x, y and theta must be finite");
}

template <typename Scalar> struct Trajectory {
    std::vector<WaypointState<Scalar>> waypoints;
    Scalar timestep{Scalar(0.1)};

    std::size_t size() const { return waypoints.size(); }
    const WaypointState<Scalar>& operator[](std::size_t t) const { return waypoints[t]; }

    bool operator==(const Trajectory&) const = default;
};

/// Checks length, per-waypoint validity and the constant-box-size assumption.
template <typename Scalar> void validate(const Trajectory<Scalar>& traj, const std::string& context = "trajectory") {
    if (traj.waypoints.empty()) throw ValidationError(context + ": trajectory has no waypoints");
    if (!(traj.timestep > Scalar(0))) throw ValidationError(context + ": timestep must be positive");
    const auto& first = traj.waypoints.front();
    for (std::size_t t = 0; t < traj.waypoints.size(); ++t) {
        const auto& s = traj.waypoints[t];
        validate(s, context + " waypoint " + std::to_string(t));
        if (s.l != first.l || s.w != first.w)
            throw ValidationError(context + " waypoint " + std::to_string(t) +
                                  ": box dimensions must be constant along a trajectory");
    }
}

struct CellIndex {
    int i{0};  ///< column, along x
    int j{0};  ///< row, along y

    bool operator==(const CellIndex&) const = default;
};

/**
 * Axis-aligned BEV grid. Cell (i, j) covers
 * [origin.x + i*cell_l, origin.x + (i+1)*cell_l) × [origin.y + j*cell_w, origin.y + (j+1)*cell_w).
 */
template <typename Scalar> class GridSpec {
public:
    GridSpec(Scalar length_m, Scalar width_m, Scalar cell_l, Scalar cell_w, Vector2<Scalar> origin)
        : length_m_(length_m), width_m_(width_m), cell_l_(cell_l), cell_w_(cell_w), origin_(origin) {
        if (!(cell_l > Scalar(0)) || !(cell_w > Scalar(0)))
            throw ValidationError("grid: cell sizes must be positive");
        if (!origin.allFinite()) throw ValidationError("grid: origin must be finite");
        cols_ = integral_count(length_m, cell_l, "length_m / cell_l");
        rows_ = integral_count(width_m, cell_w, "width_m / cell_w");
    }

    /// Grid with square cells whose extents are centered on `center`.
    static GridSpec centered(Scalar length_m, Scalar width_m, Scalar cell, Vector2<Scalar> center = Vector2<Scalar>::Zero()) {
        return GridSpec(length_m, width_m, cell, cell,
                        center - Vector2<Scalar>(length_m / Scalar(2), width_m / Scalar(2)));
    }

    Scalar length_m() const { return length_m_; }
    Scalar width_m() const { return width_m_; }
    Scalar cell_l() const { return cell_l_; }
    Scalar cell_w() const { return cell_w_; }
    Scalar cell_area() const { return cell_l_ * cell_w_; }
    const Vector2<Scalar>& origin() const { return origin_; }
    int cols() const { return cols_; }
    int rows() const { return rows_; }

    bool in_range(CellIndex c) const { return c.i >= 0 && c.j >= 0 && c.i < cols_ && c.j < rows_; }

    Vector2<Scalar> cell_center(int i, int j) const {
        return {origin_.x() + (Scalar(i) + Scalar(0.5)) * cell_l_, origin_.y() + (Scalar(j) + Scalar(0.5)) * cell_w_};
    }
    Vector2<Scalar> cell_center(CellIndex c) const { return cell_center(c.i, c.j); }

    /// Cell containing `p`, or nothing when `p` lies outside the grid extents.
    std::optional<CellIndex> world_to_cell(const Vector2<Scalar>& p) const {
        if (!p.allFinite()) return std::nullopt;
        const Scalar fi = std::floor((p.x() - origin_.x()) / cell_l_);
        const Scalar fj = std::floor((p.y() - origin_.y()) / cell_w_);
        if (fi < Scalar(0) || fj < Scalar(0) || fi >= Scalar(cols_) || fj >= Scalar(rows_)) return std::nullopt;
        return CellIndex{static_cast<int>(fi), static_cast<int>(fj)};
    }

    bool operator==(const GridSpec& o) const {
        return length_m_ == o.length_m_ && width_m_ == o.width_m_ && cell_l_ == o.cell_l_ && cell_w_ == o.cell_w_ &&
               origin_ == o.origin_;
    }

private:
    static int integral_count(Scalar extent, Scalar cell, const char* what) {
        if (!(extent > Scalar(0)) || !std::isfinite(extent)) throw ValidationError("grid: extents must be positive");
        const Scalar ratio = extent / cell;
        const Scalar n = std::round(ratio);
        if (n < Scalar(1) || std::abs(ratio - n) > Scalar(1e-9) * n)
            throw ValidationError(std::string("grid: ") + what + " is not an integral cell count");
        return static_cast<int>(n);
    }

    Scalar length_m_;
    Scalar width_m_;
    Scalar cell_l_;
    Scalar cell_w_;
    Vector2<Scalar> origin_;
    int cols_{0};
    int rows_{0};
};

/// Rotation taking world-frame vectors into the actor body frame.
template <typename Scalar> Matrix2<Scalar> world_to_body(Scalar theta) {
    const Scalar c = std::cos(theta);
    const Scalar s = std::sin(theta);
    Matrix2<Scalar> r;
    r << c, s, -s, c;
    return r;
}

/**
 * Σ = R(θ)ᵀ diag((k l)², (k w)²) R(θ).
 *
 * The diagonal holds variances, so the unit Mahalanobis ellipse has radii k·l and k·w
 * and its major axis lies along (cos θ, sin θ).
 */
template <typename Scalar> Covariance2<Scalar> covariance_from_state(Scalar l, Scalar w, Scalar theta, Scalar k) {
    if (!(l > Scalar(0)) || !(w > Scalar(0)) || !(k > Scalar(0)))
        throw InvalidArgument("covariance_from_state: l, w and k must be positive");
    const Scalar sigma_l = k * l;
    const Scalar sigma_w = k * w;
    const Matrix2<Scalar> r = world_to_body(theta);
    const Vector2<Scalar> variances(sigma_l * sigma_l, sigma_w * sigma_w);
    Covariance2<Scalar> cov = r.transpose() * variances.asDiagonal() * r;
    cov(1, 0) = cov(0, 1);
    return cov;
}

template <typename Scalar>
Covariance2<Scalar> covariance_from_state(const WaypointState<Scalar>& s, Scalar k = kCircumscribe<Scalar>) {
    return covariance_from_state(s.l, s.w, s.theta, k);
}

/// Throws NumericalError unless `sigma` is finite and positive definite.
template <typename Scalar> void require_positive_definite(const Covariance2<Scalar>& sigma) {
    const Scalar det = sigma.determinant();
    if (!sigma.allFinite() || !(sigma(0, 0) > Scalar(0)) || !(det > Scalar(0)))
        throw NumericalError("covariance is singular or not positive definite");
}

/// dᵀ Σ⁻¹ d.
template <typename Scalar> Scalar mahalanobis_sq(const Vector2<Scalar>& d, const Covariance2<Scalar>& sigma) {
    require_positive_definite(sigma);
    const Matrix2<Scalar> inv = sigma.inverse();
    return d.dot(inv * d);
}

/// Box corners in counterclockwise order: front-left, rear-left, rear-right, front-right.
template <typename Scalar> std::array<Vector2<Scalar>, 4> box_corners(const WaypointState<Scalar>& s) {
    const Vector2<Scalar> u = s.heading();
    const Vector2<Scalar> v(-u.y(), u.x());
    const Vector2<Scalar> c = s.center();
    const Scalar hl = s.l / Scalar(2);
    const Scalar hw = s.w / Scalar(2);
    return {c + hl * u + hw * v, c - hl * u + hw * v, c - hl * u - hw * v, c + hl * u - hw * v};
}

}  // namespace bdtr
