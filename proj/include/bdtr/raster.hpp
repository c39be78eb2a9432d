#pragma once
/**
 * @file   raster.hpp
 * @brief  Box-aware differentiable trajectory rasterizer.
 *
 * A waypoint is rasterized as the bivariate normal density N(d; 0, Σ(l, w, θ)) sampled at
 * cell centers, with d = cell_center - (x, y). Values beyond the truncation radius (in
 * Mahalanobis units) are zeroed and the remainder is not renormalized.
 *
 * The backward pass gives partials with respect to x, y and θ only. Box length and width
 * are held constant, and the truncation mask is treated as constant.
 */

#include <bdtr/geometry.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <type_traits>
#include <utility>

namespace bdtr {

/// Mahalanobis truncation radius; empty means no truncation.
template <typename Scalar> using Truncation = std::optional<Scalar>;

/// Half-open rectangle of cells [i0, i0 + cols) × [j0, j0 + rows).
struct CellWindow {
    int i0{0};
    int j0{0};
    int cols{0};
    int rows{0};

    bool empty() const { return cols <= 0 || rows <= 0; }
    bool contains(CellIndex c) const { return c.i >= i0 && c.i < i0 + cols && c.j >= j0 && c.j < j0 + rows; }
    bool contains(const CellWindow& o) const {
        return o.empty() || (!empty() && o.i0 >= i0 && o.j0 >= j0 && o.i0 + o.cols <= i0 + cols &&
                             o.j0 + o.rows <= j0 + rows);
    }
    long long size() const { return empty() ? 0 : static_cast<long long>(cols) * rows; }

    bool operator==(const CellWindow&) const = default;
};

/// Per-waypoint density evaluator; holds Σ⁻¹ and the normalization for one state.
template <typename Scalar> class GaussianKernel {
public:
    GaussianKernel(const WaypointState<Scalar>& s, Scalar k)
        : center_(s.center()), heading_(s.heading()), cov_(covariance_from_state(s, k)) {
        require_positive_definite(cov_);
        inv_ = cov_.inverse();
        denom_ = Scalar(2) * std::numbers::pi_v<Scalar> * std::sqrt(cov_.determinant());
        const Scalar sigma_l = k * s.l;
        const Scalar sigma_w = k * s.w;
        // d(dᵀΣ⁻¹d)/dθ = 2 (1/σ_l² - 1/σ_w²) (d·u)(d·v) for body axes u, v.
        precision_gap_ = Scalar(1) / (sigma_l * sigma_l) - Scalar(1) / (sigma_w * sigma_w);
    }

    const Covariance2<Scalar>& covariance() const { return cov_; }
    const Matrix2<Scalar>& precision() const { return inv_; }
    const Vector2<Scalar>& center() const { return center_; }

    Vector2<Scalar> displacement(const Vector2<Scalar>& p) const { return p - center_; }

    Scalar mahalanobis_sq(const Vector2<Scalar>& d) const { return d.dot(inv_ * d); }

    Scalar density_from_md2(Scalar q) const { return std::exp(Scalar(-0.5) * q) / denom_; }

    Scalar density(const Vector2<Scalar>& d) const { return density_from_md2(mahalanobis_sq(d)); }

    /// ∂G/∂(x, y) for a cell at displacement d holding untruncated value g.
    Vector2<Scalar> grad_center(const Vector2<Scalar>& d, Scalar g) const { return g * (inv_ * d); }

    /// ∂G/∂θ for a cell at displacement d holding untruncated value g.
    Scalar grad_theta(const Vector2<Scalar>& d, Scalar g) const {
        const Scalar along = d.dot(heading_);
        const Scalar across = heading_.x() * d.y() - heading_.y() * d.x();
        return -g * precision_gap_ * along * across;
    }

private:
    Vector2<Scalar> center_;
    Vector2<Scalar> heading_;
    Covariance2<Scalar> cov_;
    Matrix2<Scalar> inv_;
    Scalar denom_{};
    Scalar precision_gap_{};
};

/// Truncated density at one world point; the per-cell reference definition.
template <typename Scalar>
Scalar gaussian_value(const WaypointState<Scalar>& s, const Vector2<Scalar>& p, Scalar k, std::type_identity_t<Truncation<Scalar>> md) {
    const GaussianKernel<Scalar> kernel(s, k);
    const Vector2<Scalar> d = kernel.displacement(p);
    const Scalar q = kernel.mahalanobis_sq(d);
    if (md && q > *md * *md) return Scalar(0);
    return kernel.density_from_md2(q);
}

/**
 * Cells overlapping the axis-aligned bounding box of the truncation ellipse, clipped to the
 * grid. Without truncation this is the whole grid.
 */
template <typename Scalar>
CellWindow raster_window(const WaypointState<Scalar>& s, const GridSpec<Scalar>& grid, Scalar k, std::type_identity_t<Truncation<Scalar>> md) {
    if (!md) return {0, 0, grid.cols(), grid.rows()};
    if (!(*md > Scalar(0))) throw InvalidArgument("raster_window: truncation radius must be positive");
    const Scalar sigma_l = k * s.l;
    const Scalar sigma_w = k * s.w;
    const Scalar c = std::cos(s.theta);
    const Scalar sn = std::sin(s.theta);
    const Scalar hx = *md * std::sqrt(sigma_l * sigma_l * c * c + sigma_w * sigma_w * sn * sn);
    const Scalar hy = *md * std::sqrt(sigma_l * sigma_l * sn * sn + sigma_w * sigma_w * c * c);

    const auto span = [](Scalar lo, Scalar hi, Scalar origin, Scalar cell, int count) {
        const Scalar a = std::floor((lo - origin) / cell);
        const Scalar b = std::floor((hi - origin) / cell);
        const Scalar first = std::max(a, Scalar(0));
        const Scalar last = std::min(b, Scalar(count - 1));
        if (last < first) return std::pair<int, int>{0, 0};
        return std::pair<int, int>{static_cast<int>(first), static_cast<int>(last - first) + 1};
    };
    const auto [i0, cols] = span(s.x - hx, s.x + hx, grid.origin().x(), grid.cell_l(), grid.cols());
    const auto [j0, rows] = span(s.y - hy, s.y + hy, grid.origin().y(), grid.cell_w(), grid.rows());
    if (cols == 0 || rows == 0) return {};
    return {i0, j0, cols, rows};
}

/// True when the truncation window is not clipped by the grid extents.
template <typename Scalar>
bool window_inside_grid(const WaypointState<Scalar>& s, const GridSpec<Scalar>& grid, Scalar k, Scalar md) {
    const Scalar sigma_l = k * s.l;
    const Scalar sigma_w = k * s.w;
    const Scalar c = std::cos(s.theta);
    const Scalar sn = std::sin(s.theta);
    const Scalar hx = md * std::sqrt(sigma_l * sigma_l * c * c + sigma_w * sigma_w * sn * sn);
    const Scalar hy = md * std::sqrt(sigma_l * sigma_l * sn * sn + sigma_w * sigma_w * c * c);
    const Vector2<Scalar>& o = grid.origin();
    return s.x - hx >= o.x() && s.x + hx < o.x() + grid.length_m() && s.y - hy >= o.y() &&
           s.y + hy < o.y() + grid.width_m();
}

template <typename Scalar> using DenseGrid = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Truncated Gaussian occupancy over a window; values(i - i0, j - j0) in 1/m².
template <typename Scalar> struct GaussianRaster {
    GridSpec<Scalar> grid;
    CellWindow window;
    DenseGrid<Scalar> values;
    Truncation<Scalar> truncation_md;

    Scalar at(CellIndex c) const {
        if (!window.contains(c)) return Scalar(0);
        return values(c.i - window.i0, c.j - window.j0);
    }
    Scalar sum() const { return window.empty() ? Scalar(0) : values.sum(); }

    /// Full-grid copy, mostly for export and tests.
    DenseGrid<Scalar> dense() const {
        DenseGrid<Scalar> out = DenseGrid<Scalar>::Zero(grid.cols(), grid.rows());
        if (!window.empty()) out.block(window.i0, window.j0, window.cols, window.rows) = values;
        return out;
    }
};

/// Per-cell partials. Box length and width are a stop-gradient and get none.
template <typename Scalar> struct RasterGrad {
    CellWindow window;
    DenseGrid<Scalar> dx;      ///< 1/m³
    DenseGrid<Scalar> dy;      ///< 1/m³
    DenseGrid<Scalar> dtheta;  ///< 1/m² per radian
};

namespace detail {

template <typename Scalar>
void check_raster_args(const WaypointState<Scalar>& s, Scalar k, std::type_identity_t<Truncation<Scalar>> md) {
    validate(s, "rasterize_waypoint");
    if (!(k > Scalar(0))) throw InvalidArgument("rasterize_waypoint: k must be positive");
    if (md && !(*md > Scalar(0))) throw InvalidArgument("rasterize_waypoint: truncation radius must be positive");
}

template <typename Scalar, typename CellFn>
GaussianRaster<Scalar> rasterize_impl(const WaypointState<Scalar>& s, const GridSpec<Scalar>& grid, Scalar k,
                                      Truncation<Scalar> md, CellFn&& on_cell) {
    check_raster_args(s, k, md);
    const GaussianKernel<Scalar> kernel(s, k);
    GaussianRaster<Scalar> out{grid, raster_window(s, grid, k, md), {}, md};
    const CellWindow& win = out.window;
    out.values = DenseGrid<Scalar>::Zero(std::max(win.cols, 0), std::max(win.rows, 0));
    if (win.empty()) return out;
    const Scalar limit = md ? *md * *md : std::numeric_limits<Scalar>::infinity();
    for (int b = 0; b < win.rows; ++b) {
        for (int a = 0; a < win.cols; ++a) {
            const Vector2<Scalar> d = kernel.displacement(grid.cell_center(win.i0 + a, win.j0 + b));
            const Scalar q = kernel.mahalanobis_sq(d);
            if (q > limit) continue;
            const Scalar g = kernel.density_from_md2(q);
            out.values(a, b) = g;
            on_cell(kernel, a, b, d, g);
        }
    }
    return out;
}

}  // namespace detail

template <typename Scalar>
GaussianRaster<Scalar> rasterize_waypoint(const WaypointState<Scalar>& s, const GridSpec<Scalar>& grid,
                                          Scalar k = kCircumscribe<Scalar>, std::type_identity_t<Truncation<Scalar>> md = Scalar(1)) {
    return detail::rasterize_impl(s, grid, k, md, [](auto&&...) {});
}

template <typename Scalar>
std::pair<GaussianRaster<Scalar>, RasterGrad<Scalar>>
rasterize_waypoint_grad(const WaypointState<Scalar>& s, const GridSpec<Scalar>& grid,
                        Scalar k = kCircumscribe<Scalar>, std::type_identity_t<Truncation<Scalar>> md = Scalar(1)) {
    detail::check_raster_args(s, k, md);
    RasterGrad<Scalar> grad;
    grad.window = raster_window(s, grid, k, md);
    const int cols = std::max(grad.window.cols, 0);
    const int rows = std::max(grad.window.rows, 0);
    grad.dx = DenseGrid<Scalar>::Zero(cols, rows);
    grad.dy = DenseGrid<Scalar>::Zero(cols, rows);
    grad.dtheta = DenseGrid<Scalar>::Zero(cols, rows);
    auto raster = detail::rasterize_impl(
        s, grid, k, md,
        [&grad](const GaussianKernel<Scalar>& kernel, int a, int b, const Vector2<Scalar>& d, Scalar g) {
            const Vector2<Scalar> gc = kernel.grad_center(d, g);
            grad.dx(a, b) = gc.x();
            grad.dy(a, b) = gc.y();
            grad.dtheta(a, b) = kernel.grad_theta(d, g);
        });
    return {std::move(raster), std::move(grad)};
}

}  // namespace bdtr
