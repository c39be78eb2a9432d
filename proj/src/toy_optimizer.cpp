#include <bdtr/toy_optimizer.hpp>

#include <cmath>
#include <numbers>

namespace bdtr {

void validate(const OptimizerConfig& cfg) {
    if (cfg.iterations < 1) throw InvalidArgument("optimizer: iterations must be at least 1");
    if (!(cfg.step_size_xy > 0.0) || !(cfg.step_size_theta > 0.0))
        throw InvalidArgument("optimizer: step sizes must be positive");
    if (!(cfg.k > 0.0)) throw InvalidArgument("optimizer: k must be positive");
    if (cfg.truncation_md && !(*cfg.truncation_md > 0.0))
        throw InvalidArgument("optimizer: truncation radius must be positive");
}

const char* to_string(OptStatus s) noexcept { return s == OptStatus::completed ? "completed" : "boundary_exit"; }

namespace {

bool leaves_grid(const Waypoint& s, const DrivableMask& mask, const OptimizerConfig& cfg) {
    if (cfg.truncation_md) return !window_inside_grid(s, mask.grid(), cfg.k, *cfg.truncation_md);
    return !mask.grid().world_to_cell(s.center()).has_value();
}

}  // namespace

OptTrace run_toy(const Waypoint& initial, const DrivableMask& mask, const OptimizerConfig& cfg) {
    validate(cfg);
    validate(initial, "toy initial state");
    OptTrace trace;
    trace.rows.reserve(static_cast<std::size_t>(cfg.iterations) + 1);

    Waypoint state = initial;
    if (leaves_grid(state, mask, cfg)) {
        trace.rows.push_back({0, state, 0.0, 0.0});
        trace.status = OptStatus::boundary_exit;
        return trace;
    }
    WaypointTerm term = waypoint_ellipse_term(state, mask, cfg.k, cfg.truncation_md);
    trace.rows.push_back({0, state, term.value, term.grad.norm()});

    for (int it = 1; it <= cfg.iterations; ++it) {
        Waypoint next = state;
        next.x -= cfg.step_size_xy * term.grad.x();
        next.y -= cfg.step_size_xy * term.grad.y();
        next.theta -= cfg.step_size_theta * term.grad.z();
        if (leaves_grid(next, mask, cfg)) {
            trace.status = OptStatus::boundary_exit;
            break;
        }
        state = next;
        term = waypoint_ellipse_term(state, mask, cfg.k, cfg.truncation_md);
        trace.rows.push_back({it, state, term.value, term.grad.norm()});
    }
    return trace;
}

double LineBoundary::orientation_residual(double theta) const {
    const Point2 dir(-normal.y(), normal.x());
    const double boundary_angle = std::atan2(dir.y(), dir.x());
    // Box axes are undirected, so the residual is taken modulo π.
    const double r = std::remainder(theta - boundary_angle, std::numbers::pi);
    return std::abs(r);
}

ToyScene make_toy_scene() {
    const Grid grid = Grid::centered(20.0, 20.0, 0.1);
    const PolygonSet drivable{Polygon{{Point2(-10.0, -10.0), Point2(0.0, -10.0), Point2(0.0, 10.0), Point2(-10.0, 10.0)}, {}}};
    const Waypoint initial{0.0, 0.0, 4.0, 2.0, std::numbers::pi / 2.0 + std::numbers::pi / 6.0};
    return ToyScene{grid, rasterize_drivable(drivable, grid), LineBoundary{Point2::Zero(), Point2::UnitX()}, initial};
}

}  // namespace bdtr
