// Acceptance checks; prints one PASS/FAIL line per criterion and exits non-zero on any failure.

#include "oracles.hpp"

#include <bdtr/losses.hpp>
#include <bdtr/metrics.hpp>
#include <bdtr/toy_optimizer.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace bdtr;

namespace {

constexpr double kK = kCircumscribe<double>;
constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass{false};
    std::string detail;
};

Track single(const Waypoint& s) { return Track{{s}, 0.1}; }

Waypoint random_state(std::mt19937_64& rng, double half_extent) {
    std::uniform_real_distribution<double> pos(-half_extent, half_extent), size(0.5, 6.0), ang(-7.0, 7.0);
    return {pos(rng), pos(rng), size(rng), size(rng), ang(rng)};
}

Outcome raster_oracle() {
    std::mt19937_64 rng(101);
    const Grid g = Grid::centered(16.0, 16.0, 0.25);  // 64 x 64
    const std::array<Truncation<double>, 4> variants{0.5, 1.0, 2.0, std::nullopt};
    const int states = 250;
    long long mismatches = 0, cells = 0;
    double raster_time = 0.0;
    for (int n = 0; n < states; ++n) {
        const Waypoint s = random_state(rng, 9.0);
        const Truncation<double> md = variants[static_cast<std::size_t>(n) % variants.size()];
        const auto t0 = Clock::now();
        const auto dense = rasterize_waypoint(s, g, kK, md).dense();
        raster_time += seconds_since(t0);
        for (int j = 0; j < g.rows(); ++j)
            for (int i = 0; i < g.cols(); ++i, ++cells)
                if (dense(i, j) != oracle::cell_density(s, g, i, j, kK, md)) ++mismatches;
    }
    std::ostringstream os;
    os << states << " states, " << cells << " cells, " << mismatches << " mismatches, raster time " << raster_time
       << " s";
    return {mismatches == 0 && raster_time < 10.0, os.str()};
}

Outcome gradient_check() {
    std::mt19937_64 rng(103);
    const Grid g = Grid::centered(20.0, 20.0, 0.2);
    std::uniform_int_distribution<int> cell(0, g.cols() - 1);
    const double h = 1e-5;
    int pairs = 0;
    double worst_cell = 0.0;
    while (pairs < 1200) {
        const Waypoint s = random_state(rng, 6.0);
        const CellIndex c{cell(rng), cell(rng)};
        if (std::sqrt(oracle::md2_closed_form(s, g.cell_center(c), kK)) > 1.0 - 0.05) continue;
        const auto [r, grad] = rasterize_waypoint_grad(s, g);
        const int a = c.i - grad.window.i0, b = c.j - grad.window.j0;
        const std::array<double, 3> an{grad.dx(a, b), grad.dy(a, b), grad.dtheta(a, b)};
        for (int axis = 0; axis < 3; ++axis) {
            Waypoint lo = s, hi = s;
            (axis == 0 ? lo.x : axis == 1 ? lo.y : lo.theta) -= h;
            (axis == 0 ? hi.x : axis == 1 ? hi.y : hi.theta) += h;
            const double fd = (rasterize_waypoint(hi, g).at(c) - rasterize_waypoint(lo, g).at(c)) / (2 * h);
            // Components that vanish by symmetry are judged against the cell's own scale.
            const double denom = std::max({std::abs(fd), std::abs(an[axis]), 1e-4 * r.at(c)});
            worst_cell = std::max(worst_cell, std::abs(fd - an[axis]) / denom);
        }
        ++pairs;
    }

    // End-to-end on half-plane scenes with a random boundary direction.
    std::uniform_real_distribution<double> unit(-1.0, 1.0), ang(-kPi, kPi), size(1.5, 5.0);
    double worst_loss = 0.0;
    int scenes = 0;
    while (scenes < 20) {
        const double phi = ang(rng);
        const Point2 n(std::cos(phi), std::sin(phi));
        const Point2 t(-n.y(), n.x());
        const Grid grid = Grid::centered(24.0, 24.0, 0.1);
        // Drivable side is {p : p·n < 0}, built as a large quad.
        const PolygonSet region{Polygon{{Point2(-40 * n + 40 * t), Point2(-40 * n - 40 * t), Point2(-40 * t),
                                         Point2(40 * t)},
                                        {}}};
        const DrivableMask mask = rasterize_drivable(region, grid);
        const Point2 c = 1.5 * unit(rng) * n + 2.0 * unit(rng) * t;
        const Waypoint pred{c.x(), c.y(), size(rng), size(rng), ang(rng)};
        if (!oracle::membership_stable(pred, grid, kK, 1.0, h)) continue;
        const Point2 gc = -6.0 * n;
        std::vector<Track> preds{single(pred)}, gts{single(Waypoint{gc.x(), gc.y(), 2.0, 1.0, phi})};
        const EllipseLoss base = ellipse_loss(preds, gts, mask, grid);
        if (base.value == 0.0) continue;
        for (int axis = 0; axis < 3; ++axis) {
            Waypoint lo = pred, hi = pred;
            (axis == 0 ? lo.x : axis == 1 ? lo.y : lo.theta) -= h;
            (axis == 0 ? hi.x : axis == 1 ? hi.y : hi.theta) += h;
            std::vector<Track> plo{single(lo)}, phi_{single(hi)};
            const double fd =
                (ellipse_loss(phi_, gts, mask, grid).value - ellipse_loss(plo, gts, mask, grid).value) / (2 * h);
            const double an = base.gradients[0](0, axis);
            const double grad_scale = base.gradients[0].row(0).norm();
            worst_loss = std::max(worst_loss, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-3 * grad_scale}));
        }
        ++scenes;
    }
    std::ostringstream os;
    os << pairs << " cell pairs, max rel err " << worst_cell << "; " << scenes << " loss scenes, max rel err "
       << worst_loss;
    return {pairs >= 1000 && worst_cell < 1e-5 && worst_loss < 1e-4, os.str()};
}

Outcome mass_check() {
    const Waypoint s{0.0013, -0.0027, 4.0, 2.0, 0.1};
    const Grid fine(8.0, 5.0, 0.01, 0.01, Point2(-4.0, -2.5));
    const double truncated = rasterize_waypoint(s, fine, kK, 1.0).sum() * fine.cell_area();
    const Grid wide(24.0, 14.0, 0.01, 0.01, Point2(-12.0, -7.0));
    const double full = rasterize_waypoint(s, wide, kK, std::nullopt).sum() * wide.cell_area();
    const double expected = 1.0 - std::exp(-0.5);
    std::ostringstream os;
    os.precision(8);
    os << "truncated " << truncated << " (expected " << expected << "), untruncated " << full;
    return {std::abs(truncated - expected) <= 1e-3 && full >= 0.999, os.str()};
}

Outcome circumscription() {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> size(0.2, 20.0), ang(-10.0, 10.0), pos(-100.0, 100.0);
    double worst = 0.0;
    for (int n = 0; n < 10000; ++n) {
        const Waypoint s{pos(rng), pos(rng), size(rng), size(rng), ang(rng)};
        const Covariance2<double> cov = covariance_from_state(s, kK);
        for (const Point2& c : box_corners(s))
            worst = std::max(worst, std::abs(std::sqrt(mahalanobis_sq(Point2(c - s.center()), cov)) - 1.0));
    }
    std::ostringstream os;
    os << "10000 boxes, max |md - 1| = " << worst;
    return {worst <= 1e-12, os.str()};
}

Outcome peak_gradient() {
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> size(0.5, 6.0), ang(-kPi, kPi);
    double worst = 0.0;
    const double h = 1e-6;
    for (int n = 0; n < 50; ++n) {
        const Waypoint s{0.0, 0.0, size(rng), size(rng), ang(rng)};
        const Covariance2<double> cov = covariance_from_state(s, kK);
        // Direction with unit Mahalanobis length, so r below is the Mahalanobis distance.
        const double a = ang(rng);
        Point2 dir(std::cos(a), std::sin(a));
        dir /= std::sqrt(mahalanobis_sq(dir, cov));
        double best_r = 0.0, best = -1.0;
        for (int step = 1; step <= 3000; ++step) {
            const double r = 0.001 * step;
            const Point2 p = r * dir;
            const double gx = (gaussian_value(s, Point2(p + Point2(h, 0)), kK, std::nullopt) -
                               gaussian_value(s, Point2(p - Point2(h, 0)), kK, std::nullopt)) / (2 * h);
            const double gy = (gaussian_value(s, Point2(p + Point2(0, h)), kK, std::nullopt) -
                               gaussian_value(s, Point2(p - Point2(0, h)), kK, std::nullopt)) / (2 * h);
            const double m = std::hypot(gx, gy);
            if (m > best) {
                best = m;
                best_r = r;
            }
        }
        worst = std::max(worst, std::abs(best_r - 1.0));
    }
    std::ostringstream os;
    os << "50 rays, max |argmax - 1| = " << worst;
    return {worst <= 0.02, os.str()};
}

struct ToyRuns {
    std::map<std::string, OptTrace> traces;
    std::map<std::string, double> seconds;
};

const ToyRuns& toy_runs() {
    static const ToyRuns runs = [] {
        ToyRuns r;
        const ToyScene scene = make_toy_scene();
        const std::array<std::pair<const char*, Truncation<double>>, 4> variants{
            {{"0.5", 0.5}, {"1", 1.0}, {"2", 2.0}, {"none", std::nullopt}}};
        for (const auto& [tag, md] : variants) {
            OptimizerConfig cfg;
            cfg.truncation_md = md;
            const auto t0 = Clock::now();
            r.traces.emplace(tag, run_toy(scene.initial, scene.mask, cfg));
            r.seconds.emplace(tag, seconds_since(t0));
        }
        return r;
    }();
    return runs;
}

Outcome toy_truncated() {
    const ToyScene scene = make_toy_scene();
    const OptTrace& t = toy_runs().traces.at("1");
    const double sigma_w = kK * scene.initial.w;
    const double clearance = scene.boundary.clearance(t.final().state.center());
    const double r0 = scene.boundary.orientation_residual(t.initial().state.theta);
    const double r1 = scene.boundary.orientation_residual(t.final().state.theta);
    const double secs = toy_runs().seconds.at("1");
    std::ostringstream os;
    os << to_string(t.status) << ", loss " << t.initial().loss << " -> " << t.final().loss << ", clearance "
       << clearance << " (limit " << sigma_w + 0.2 << "), residual " << r0 << " -> " << r1 << ", " << secs << " s";
    const bool ok = t.status == OptStatus::completed && t.final().iteration == 1000 &&
                    t.final().loss <= 1e-6 * t.initial().loss && std::abs(clearance) <= sigma_w + 0.2 && r1 < r0 &&
                    secs < 30.0;
    return {ok, os.str()};
}

Outcome toy_untruncated() {
    const ToyScene scene = make_toy_scene();
    const OptTrace& trunc = toy_runs().traces.at("1");
    const OptTrace& full = toy_runs().traces.at("none");
    const double d_trunc = scene.boundary.clearance(trunc.final().state.center());
    const double d_full = scene.boundary.clearance(full.final().state.center());
    bool cleared = false, monotone = true;
    double previous = 0.0;
    for (const auto& row : full.rows) {
        const double d = scene.boundary.clearance(row.state.center());
        if (cleared && d < previous) monotone = false;
        cleared = cleared || std::ranges::all_of(box_corners(row.state),
                                                 [&](const Point2& p) { return scene.boundary.clearance(p) > 0.0; });
        previous = d;
    }
    std::ostringstream os;
    os << "untruncated clearance " << d_full << " vs truncated " << d_trunc << ", cleared " << cleared
       << ", non-decreasing after clearing " << monotone;
    return {full.status == OptStatus::completed && d_full - d_trunc >= 0.1 && cleared && monotone, os.str()};
}

Outcome indicator_gating() {
    std::mt19937_64 rng(113);
    const Grid g = Grid::centered(20.0, 20.0, 0.1);
    const DrivableMask mask =
        rasterize_drivable({Polygon{{Point2(-10, -10), Point2(0, -10), Point2(0, 10), Point2(-10, 10)}, {}}}, g);
    std::uniform_real_distribution<double> pos(-4.0, 4.0), off(2.5, 7.0), ang(-kPi, kPi);
    int scenes = 0, nonzero = 0;
    for (; scenes < 30; ++scenes) {
        std::vector<Track> preds, gts;
        for (int a = 0; a < 5; ++a) {
            Track p{{}, 0.1}, t{{}, 0.1};
            for (int s = 0; s < 10; ++s) {
                p.waypoints.push_back({pos(rng), pos(rng), 4.0, 2.0, ang(rng)});
                t.waypoints.push_back({off(rng), pos(rng), 4.0, 2.0, 0.0});  // parked on the non-drivable side
            }
            preds.push_back(p);
            gts.push_back(t);
        }
        const EllipseLoss loss = ellipse_loss(preds, gts, mask, g);
        bool zero = loss.value == 0.0;
        for (const auto& grad : loss.gradients) zero = zero && grad.cwiseAbs().maxCoeff() == 0.0;
        if (!zero) ++nonzero;
    }
    std::ostringstream os;
    os << scenes << " scenes with off-road ground truth, " << nonzero << " with non-zero loss or gradient";
    return {nonzero == 0, os.str()};
}

Outcome metrics_oracle() {
    std::mt19937_64 rng(127);
    int scenes = 0, mismatches = 0, out_of_range = 0;
    for (; scenes < 40; ++scenes) {
        const Grid g(24.0, 16.0, 0.25, 0.25, Point2(-12.0, -8.0));
        std::uniform_real_distribution<double> cx(-9.0, 9.0), cy(-6.0, 6.0), ang(-3.2, 3.2), size(0.8, 5.0),
            jump(-1.2, 1.2);
        PolygonSet polys;
        for (int p = 0; p < 3; ++p)
            polys.push_back(Polygon{oracle::random_star(rng, Point2(cx(rng), cy(rng)), 2.0, 7.0, 6, p == 0), {}});
        const DrivableMask mask = rasterize_drivable(polys, g);
        std::vector<Track> preds, gts;
        for (int a = 0; a < 5; ++a) {
            const double l = size(rng), w = size(rng);
            Track p{{}, 0.1}, t{{}, 0.1};
            double px = cx(rng), py = cy(rng), gx = cx(rng), gy = cy(rng);
            for (int s = 0; s < 30; ++s) {
                px += 2.0 * jump(rng);
                py += 2.0 * jump(rng);
                gx += jump(rng);
                gy += jump(rng);
                p.waypoints.push_back({px, py, l, w, ang(rng)});
                t.waypoints.push_back({gx, gy, l, w, ang(rng)});
            }
            preds.push_back(p);
            gts.push_back(t);
        }
        for (std::size_t a = 0; a < preds.size(); ++a)
            for (std::size_t t = 0; t < 30; ++t)
                out_of_range += (oracle::label(preds[a][t], mask, true) < 0 || oracle::label(gts[a][t], mask, true) < 0);
        for (bool box : {false, true}) {
            const HorizonStats got = orfp_ratio(preds, gts, mask, box ? OffroadPolicy::box : OffroadPolicy::center);
            const oracle::OrfpResult want = oracle::orfp(preds, gts, mask, box);
            if (got.per_horizon != want.per_horizon || got.average != want.average) ++mismatches;
        }
    }

    // Pythagorean fixture: every actor is off by (3, 4) at the final step only.
    std::vector<Track> preds, gts;
    for (int a = 0; a < 5; ++a) {
        Track t{{}, 0.1};
        for (int s = 0; s < 30; ++s) t.waypoints.push_back({-5.0 + 0.1 * s, 1.0 * a, 4.0, 2.0, 0.0});
        Track p = t;
        p.waypoints.back().x += 3.0;
        p.waypoints.back().y += 4.0;
        preds.push_back(p);
        gts.push_back(t);
    }
    const HorizonStats l2 = l2_errors(preds, gts);
    const bool l2_ok = std::abs(l2.at_final - 5.0) <= 1e-12 && std::abs(l2.average - 5.0 / 30.0) <= 1e-12;
    std::ostringstream os;
    os << scenes << " random 5x30 scenes x 2 policies, " << mismatches << " mismatches, " << out_of_range
       << " box-policy steps out of range; l2 avg " << l2.average
       << " @final " << l2.at_final;
    return {mismatches == 0 && l2_ok, os.str()};
}

Outcome mask_oracle() {
    std::mt19937_64 rng(131);
    std::uniform_real_distribution<double> pos(-12.0, 12.0);
    std::uniform_int_distribution<int> verts(4, 16);
    long long cells = 0, mismatches = 0;
    int scenes = 0;
    for (; scenes < 50; ++scenes) {
        const Grid g(30.0, 24.0, 0.2, 0.2, Point2(-15.0, -12.0));
        PolygonSet polys;
        for (int p = 0; p < 4; ++p) {
            const Point2 c(pos(rng), pos(rng));
            Polygon poly{oracle::random_star(rng, c, 3.0, 9.0, verts(rng), p % 2 == 0), {}};
            if (p == 0) poly.holes.push_back(oracle::random_star(rng, c, 0.5, 1.5, 5, true));
            polys.push_back(poly);
        }
        const DrivableMask mask = rasterize_drivable(polys, g);
        for (int j = 0; j < g.rows(); ++j)
            for (int i = 0; i < g.cols(); ++i, ++cells)
                if (mask.drivable({i, j}) != oracle::point_in_polygons(polys, g.cell_center(i, j))) ++mismatches;
    }
    std::ostringstream os;
    os << scenes << " scenes, " << cells << " cells, " << mismatches << " mismatches";
    return {mismatches == 0, os.str()};
}

Outcome config_variants() {
    const ToyScene scene = make_toy_scene();
    std::ostringstream os;
    bool ok = true;
    double previous = -1e9;
    for (const char* tag : {"0.5", "1", "2", "none"}) {
        const OptTrace& t = toy_runs().traces.at(tag);
        const double d = scene.boundary.clearance(t.final().state.center());
        ok = ok && t.status == OptStatus::completed && d > previous;
        previous = d;
        os << tag << ": " << d << (std::string(tag) == "none" ? "" : ", ");
    }
    return {ok, os.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"raster matches per-cell oracle bit-exact", raster_oracle},
        {"analytic gradients match finite differences", gradient_check},
        {"raster mass on a fine grid", mass_check},
        {"box corners at Mahalanobis distance 1", circumscription},
        {"gradient magnitude peaks at Mahalanobis distance 1", peak_gradient},
        {"toy scene, truncated", toy_truncated},
        {"toy scene, untruncated contrast", toy_untruncated},
        {"off-road ground truth gates the ellipse loss", indicator_gating},
        {"metrics match the stateful oracle", metrics_oracle},
        {"drivable mask matches point-in-polygon", mask_oracle},
        {"truncation variants are ordered by clearance", config_variants},
    };
    int failures = 0;
    for (std::size_t n = 0; n < criteria.size(); ++n) {
        Outcome o;
        try {
            o = criteria[n].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("[%s] criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", n + 1, criteria[n].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
