#include <bdtr/losses.hpp>
#include <bdtr/metrics.hpp>

#include <cmath>

namespace bdtr {

double smooth_l1(double r, double beta) {
    const double a = std::abs(r);
    return a < beta ? 0.5 * r * r / beta : a - 0.5 * beta;
}

namespace {

double regression_terms(const Waypoint& p, const Waypoint& g, double beta, double xy_weight) {
    return xy_weight * (smooth_l1(p.x - g.x, beta) + smooth_l1(p.y - g.y, beta)) + smooth_l1(p.l - g.l, beta) +
           smooth_l1(p.w - g.w, beta) + smooth_l1(std::sin(p.theta) - std::sin(g.theta), beta) +
           smooth_l1(std::cos(p.theta) - std::cos(g.theta), beta);
}

void check_beta(double beta) {
    if (!(beta > 0.0)) throw InvalidArgument("smooth-L1 beta must be positive");
}

}  // namespace

double vanilla_loss(std::span<const Track> preds, std::span<const Track> gts, double beta) {
    check_beta(beta);
    const std::size_t steps = check_aligned(preds, gts);
    double total = 0.0;
    for (std::size_t a = 0; a < preds.size(); ++a)
        for (std::size_t t = 0; t < steps; ++t) total += regression_terms(preds[a][t], gts[a][t], beta, 1.0);
    return total;
}

bool indicator_in_drivable(const Waypoint& gt, const DrivableMask& mask) {
    if (mask.query(gt.center()) != Drivability::drivable) return false;
    for (const auto& corner : box_corners(gt))
        if (mask.query(corner) != Drivability::drivable) return false;
    return true;
}

WaypointTerm waypoint_ellipse_term(const Waypoint& pred, const DrivableMask& mask, double k, Truncation<double> md) {
    const auto [raster, grad] = rasterize_waypoint_grad(pred, mask.grid(), k, md);
    WaypointTerm term;
    const CellWindow& win = raster.window;
    const MaskBits& bits = mask.bits();
    for (int b = 0; b < win.rows; ++b) {
        for (int a = 0; a < win.cols; ++a) {
            if (bits(win.i0 + a, win.j0 + b) != 0) continue;
            term.value += raster.values(a, b);
            term.grad.x() += grad.dx(a, b);
            term.grad.y() += grad.dy(a, b);
            term.grad.z() += grad.dtheta(a, b);
        }
    }
    return term;
}

EllipseLoss ellipse_loss(std::span<const Track> preds, std::span<const Track> gts, const DrivableMask& mask,
                         const Grid& grid, double k, Truncation<double> md) {
    if (!(mask.grid() == grid)) throw ConfigError("ellipse loss: drivable mask grid differs from the raster grid");
    const std::size_t steps = check_aligned(preds, gts);
    const auto n = static_cast<Eigen::Index>(preds.size());
    const auto tn = static_cast<Eigen::Index>(steps);

    EllipseLoss out;
    out.contributions = Eigen::MatrixXd::Zero(n, tn);
    out.indicators = Eigen::MatrixXi::Zero(n, tn);
    out.gradients.assign(preds.size(), StepGradients::Zero(tn, 3));
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index t = 0; t < tn; ++t) {
            const auto ai = static_cast<std::size_t>(a);
            const auto ti = static_cast<std::size_t>(t);
            if (!indicator_in_drivable(gts[ai][ti], mask)) continue;
            out.indicators(a, t) = 1;
            const WaypointTerm term = waypoint_ellipse_term(preds[ai][ti], mask, k, md);
            out.contributions(a, t) = term.value;
            out.gradients[ai].row(t) = term.grad.transpose();
        }
    }
    // Fixed actor-major order so the total is reproducible from the contributions.
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index t = 0; t < tn; ++t) out.value += out.contributions(a, t);
    return out;
}

LossReport combined_loss(std::span<const Track> preds, std::span<const Track> gts, const DrivableMask& mask,
                         const Grid& grid, const LossConfig& cfg) {
    if (!(cfg.lambda >= 0.0)) throw InvalidArgument("combined loss: lambda must be non-negative");
    LossReport report;
    report.config = cfg;
    report.vanilla = vanilla_loss(preds, gts, cfg.beta);
    EllipseLoss ell = ellipse_loss(preds, gts, mask, grid, cfg.k, cfg.truncation_md);
    report.ellipse = ell.value;
    report.total = report.vanilla + cfg.lambda * report.ellipse;
    report.waypoints = preds.size() * (preds.empty() ? 0 : preds.front().size());
    report.contributions = std::move(ell.contributions);
    report.indicators = std::move(ell.indicators);
    report.ellipse_gradients = std::move(ell.gradients);
    return report;
}

double offroad_reweighted_loss(std::span<const Track> preds, std::span<const Track> gts, const DrivableMask& mask,
                               double factor, double beta) {
    if (!(factor >= 1.0)) throw InvalidArgument("off-road reweighting factor must be at least 1");
    check_beta(beta);
    const FlagMatrix flags = orfp_flags(preds, gts, mask, OffroadPolicy::center);
    double total = 0.0;
    for (std::size_t a = 0; a < preds.size(); ++a) {
        for (std::size_t t = 0; t < preds[a].size(); ++t) {
            const bool orfp = flags(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(t)) != 0;
            total += regression_terms(preds[a][t], gts[a][t], beta, orfp ? factor : 1.0);
        }
    }
    return total;
}

}  // namespace bdtr
