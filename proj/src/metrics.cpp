#include <bdtr/metrics.hpp>

namespace bdtr {

const char* to_string(OffroadLabel l) noexcept {
    switch (l) {
        case OffroadLabel::inroad: return "inroad";
        case OffroadLabel::offroad: return "offroad";
        case OffroadLabel::out_of_range: return "out_of_range";
    }
    return "unknown";
}

const char* to_string(OffroadPolicy p) noexcept { return p == OffroadPolicy::center ? "center" : "box"; }

OffroadLabel is_offroad_center(const Waypoint& s, const DrivableMask& mask) {
    switch (mask.query(s.center())) {
        case Drivability::drivable: return OffroadLabel::inroad;
        case Drivability::non_drivable: return OffroadLabel::offroad;
        case Drivability::out_of_range: break;
    }
    return OffroadLabel::out_of_range;
}

OffroadLabel is_offroad_box(const Waypoint& s, const DrivableMask& mask) {
    bool any_out = false;
    for (const auto& corner : box_corners(s)) {
        const Drivability d = mask.query(corner);
        if (d == Drivability::non_drivable) return OffroadLabel::offroad;
        any_out = any_out || d == Drivability::out_of_range;
    }
    return any_out ? OffroadLabel::out_of_range : OffroadLabel::inroad;
}

OffroadLabel classify(const Waypoint& s, const DrivableMask& mask, OffroadPolicy policy) {
    return policy == OffroadPolicy::center ? is_offroad_center(s, mask) : is_offroad_box(s, mask);
}

FlagMatrix orfp_flags(std::span<const Track> preds, std::span<const Track> gts, const DrivableMask& mask,
                      OffroadPolicy policy) {
    const std::size_t steps = check_aligned(preds, gts);
    FlagMatrix flags = FlagMatrix::Zero(static_cast<Eigen::Index>(preds.size()), static_cast<Eigen::Index>(steps));
    for (std::size_t a = 0; a < preds.size(); ++a) {
        bool previous = false;
        for (std::size_t t = 0; t < steps; ++t) {
            const OffroadLabel p = classify(preds[a][t], mask, policy);
            const OffroadLabel g = classify(gts[a][t], mask, policy);
            bool flag = previous;
            if (p != OffroadLabel::out_of_range && g != OffroadLabel::out_of_range)
                flag = p == OffroadLabel::offroad && g == OffroadLabel::inroad;
            flags(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(t)) = flag ? 1 : 0;
            previous = flag;
        }
    }
    return flags;
}

namespace {

HorizonStats summarize(const Eigen::MatrixXd& per_actor_step) {
    HorizonStats out;
    const Eigen::Index steps = per_actor_step.cols();
    const Eigen::Index actors = per_actor_step.rows();
    out.per_horizon.assign(static_cast<std::size_t>(steps), 0.0);
    if (steps == 0 || actors == 0) return out;
    double total = 0.0;
    for (Eigen::Index t = 0; t < steps; ++t) {
        double acc = 0.0;
        for (Eigen::Index a = 0; a < actors; ++a) acc += per_actor_step(a, t);
        out.per_horizon[static_cast<std::size_t>(t)] = acc / static_cast<double>(actors);
        total += acc;
    }
    out.average = total / static_cast<double>(actors * steps);
    out.at_final = out.per_horizon.back();
    return out;
}

}  // namespace

HorizonStats orfp_ratio(std::span<const Track> preds, std::span<const Track> gts, const DrivableMask& mask,
                        OffroadPolicy policy) {
    return summarize(orfp_flags(preds, gts, mask, policy).cast<double>());
}

HorizonStats l2_errors(std::span<const Track> preds, std::span<const Track> gts) {
    const std::size_t steps = check_aligned(preds, gts);
    Eigen::MatrixXd err(static_cast<Eigen::Index>(preds.size()), static_cast<Eigen::Index>(steps));
    for (std::size_t a = 0; a < preds.size(); ++a)
        for (std::size_t t = 0; t < steps; ++t)
            err(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(t)) =
                (preds[a][t].center() - gts[a][t].center()).norm();
    return summarize(err);
}

MetricsReport evaluate_metrics(std::span<const Track> preds, std::span<const Track> gts, const DrivableMask& mask) {
    MetricsReport report;
    report.l2 = l2_errors(preds, gts);
    report.ctr_orfp = orfp_ratio(preds, gts, mask, OffroadPolicy::center);
    report.box_orfp = orfp_ratio(preds, gts, mask, OffroadPolicy::box);
    report.counts.assign(report.l2.per_horizon.size(), static_cast<long long>(preds.size()));
    return report;
}

}  // namespace bdtr
