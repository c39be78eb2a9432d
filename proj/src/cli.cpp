#include <bdtr/cli.hpp>
#include <bdtr/io.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <sstream>

namespace bdtr::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string scenario;
    std::optional<double> lambda;
    std::optional<double> k;
    std::vector<std::string> truncation;
    std::optional<double> beta;
    int iters{1000};
    double step_xy{0.05};
    double step_theta{0.01};
    std::string out_dir{"."};
    bool emit_rasters{false};
    double offroad_factor{kDefaultOffroadFactor};
};

Truncation<double> parse_truncation(const std::string& text) {
    if (text == "none") return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !(v > 0.0)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("--truncation-md expects a positive number or 'none', got '" + text + "'");
    }
}

std::string truncation_tag(const Truncation<double>& md) {
    if (!md) return "none";
    std::ostringstream os;
    os << *md;
    return os.str();
}

/// Defaults, then scenario overrides, then command-line flags.
LossConfig effective_config(const Options& o, const ConfigOverrides& scenario) {
    ConfigOverrides flags;
    flags.k = o.k;
    flags.lambda = o.lambda;
    flags.beta = o.beta;
    if (!o.truncation.empty()) flags.truncation_md = parse_truncation(o.truncation.front());
    LossConfig cfg = apply(flags, apply(scenario));
    if (!(cfg.k > 0.0)) throw ConfigError("--k must be positive");
    if (!(cfg.lambda >= 0.0)) throw ConfigError("--lambda must be non-negative");
    if (!(cfg.beta > 0.0)) throw ConfigError("--beta must be positive");
    return cfg;
}

fs::path prepare_out(const Options& o) {
    const fs::path dir(o.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("output directory '" + dir.string() + "' is not writable");
    return dir;
}

ScenarioDoc require_scenario(const Options& o) {
    if (o.scenario.empty()) throw ConfigError("--scenario is required for this command");
    return load_scenario(o.scenario);
}

std::vector<std::string> actor_ids(const ScenarioDoc& doc) {
    std::vector<std::string> ids;
    for (const auto& a : doc.actors) ids.push_back(a.id);
    return ids;
}

int cmd_loss(const Options& o, std::ostream& out) {
    const ScenarioDoc doc = require_scenario(o);
    const LossConfig cfg = effective_config(o, doc.config);
    const fs::path dir = prepare_out(o);
    const DrivableMask mask = rasterize_drivable(doc.drivable, doc.grid);
    const auto preds = doc.predictions();
    const auto gts = doc.ground_truths();
    const LossReport report = combined_loss(preds, gts, mask, doc.grid, cfg);
    auto j = loss_report_json(report, actor_ids(doc));
    j["offroad_baseline"] = {{"factor", o.offroad_factor},
                             {"sum", offroad_reweighted_loss(preds, gts, mask, o.offroad_factor, cfg.beta)}};
    write_json(j, dir / "loss_report.json");
    out << "vanilla " << report.vanilla << "  ellipse " << report.ellipse << "  total " << report.total << '\n';
    return ExitCode::ok;
}

int cmd_metrics(const Options& o, std::ostream& out) {
    const ScenarioDoc doc = require_scenario(o);
    const LossConfig cfg = effective_config(o, doc.config);
    const fs::path dir = prepare_out(o);
    const DrivableMask mask = rasterize_drivable(doc.drivable, doc.grid);
    const MetricsReport report = evaluate_metrics(doc.predictions(), doc.ground_truths(), mask);
    write_json(metrics_report_json(report, cfg), dir / "metrics_report.json");
    out << "l2 avg " << report.l2_avg() << " @final " << report.l2_at_final() << "  ctr_orfp avg "
        << report.ctr_orfp_avg() << "  box_orfp avg " << report.box_orfp_avg() << '\n';
    return ExitCode::ok;
}

struct ToyInput {
    DrivableMask mask;
    Waypoint initial;
    std::optional<LineBoundary> boundary;
    ConfigOverrides overrides;
};

ToyInput toy_input(const Options& o) {
    if (o.scenario.empty()) {
        ToyScene scene = make_toy_scene();
        return {scene.mask, scene.initial, scene.boundary, {}};
    }
    const ScenarioDoc doc = load_scenario(o.scenario);
    if (doc.actors.empty()) throw ValidationError("toy: scenario has no actors");
    return {rasterize_drivable(doc.drivable, doc.grid), doc.actors.front().predicted[0], std::nullopt, doc.config};
}

int cmd_toy(const Options& o, std::ostream& out) {
    const ToyInput in = toy_input(o);
    Options base = o;
    base.truncation.clear();
    const LossConfig cfg = effective_config(base, in.overrides);
    std::vector<Truncation<double>> variants;
    for (const auto& t : o.truncation) variants.push_back(parse_truncation(t));
    if (variants.empty()) variants.push_back(cfg.truncation_md);
    const fs::path dir = prepare_out(o);

    nlohmann::json summary;
    summary["config"] = config_to_json(cfg);
    summary["config"].erase("truncation_md");
    summary["config"]["iterations"] = o.iters;
    summary["config"]["step_size_xy"] = o.step_xy;
    summary["config"]["step_size_theta"] = o.step_theta;
    summary["runs"] = nlohmann::json::array();
    if (o.emit_rasters) write_mask_image(in.mask, dir / "toy_mask.pgm");

    for (const auto& md : variants) {
        OptimizerConfig oc{o.iters, o.step_xy, o.step_theta, md, cfg.k};
        const OptTrace trace = run_toy(in.initial, in.mask, oc);
        const std::string tag = truncation_tag(md);
        write_trace_csv(trace, dir / ("trace_md_" + tag + ".csv"));
        const auto& last = trace.final();
        nlohmann::json run{{"truncation_md", truncation_to_json(md)},
                           {"trace", "trace_md_" + tag + ".csv"},
                           {"status", to_string(trace.status)},
                           {"iterations_run", last.iteration},
                           {"initial_loss", trace.initial().loss},
                           {"final_loss", last.loss},
                           {"final_state",
                            {{"x", last.state.x}, {"y", last.state.y}, {"theta", last.state.theta}}}};
        if (in.boundary) {
            run["final_clearance"] = in.boundary->clearance(last.state.center());
            run["final_orientation_residual"] = in.boundary->orientation_residual(last.state.theta);
        }
        summary["runs"].push_back(run);
        if (o.emit_rasters) {
            const Grid& g = in.mask.grid();
            write_density_image(rasterize_waypoint(trace.initial().state, g, cfg.k, md).dense(),
                                dir / ("toy_md_" + tag + "_initial.pgm"));
            write_density_image(rasterize_waypoint(last.state, g, cfg.k, md).dense(),
                                dir / ("toy_md_" + tag + "_final.pgm"));
        }
        out << "md " << tag << ": " << to_string(trace.status) << " after " << last.iteration
            << " iterations, loss " << trace.initial().loss << " -> " << last.loss << '\n';
    }
    write_json(summary, dir / "toy_summary.json");
    return ExitCode::ok;
}

int cmd_raster(const Options& o, std::ostream& out) {
    const fs::path dir = prepare_out(o);
    if (o.scenario.empty()) {
        const ToyScene scene = make_toy_scene();
        const LossConfig cfg = effective_config(o, {});
        write_mask_image(scene.mask, dir / "mask.pgm");
        write_density_image(rasterize_waypoint(scene.initial, scene.grid, cfg.k, cfg.truncation_md).dense(),
                            dir / "raster_toy_0.pgm");
        out << "wrote mask and 1 raster to " << dir.string() << '\n';
        return ExitCode::ok;
    }
    const ScenarioDoc doc = load_scenario(o.scenario);
    const LossConfig cfg = effective_config(o, doc.config);
    write_mask_image(rasterize_drivable(doc.drivable, doc.grid), dir / "mask.pgm");
    std::size_t count = 0;
    for (const auto& a : doc.actors) {
        for (std::size_t t = 0; t < a.predicted.size(); ++t, ++count)
            write_density_image(rasterize_waypoint(a.predicted[t], doc.grid, cfg.k, cfg.truncation_md).dense(),
                                dir / ("raster_" + a.id + "_" + std::to_string(t) + ".pgm"));
    }
    out << "wrote mask and " << count << " rasters to " << dir.string() << '\n';
    return ExitCode::ok;
}

int cmd_template(const Options& o, std::ostream& out) {
    const fs::path dir = prepare_out(o);
    // 938 cells of 0.16 m: the 150 m extent rounded up to a whole cell count.
    const Grid grid(150.08, 100.0, 0.16, 0.16, Point2(-75.04, -50.0));
    Track pred;
    Track gt;
    for (int t = 0; t < 30; ++t) {
        const double x = -20.0 + 1.0 * t;
        gt.waypoints.push_back({x, 0.0, 4.5, 2.0, 0.0});
        pred.waypoints.push_back({x, 0.05 * t, 4.5, 2.0, 0.01 * t});
    }
    ScenarioDoc doc{kSchemaVersion,
                    grid,
                    {Polygon{{Point2(-75.0, -6.0), Point2(75.0, -6.0), Point2(75.0, 6.0), Point2(-75.0, 6.0)}, {}}},
                    {ActorRecord{"actor_0", pred, gt}},
                    {}};
    const fs::path path = dir / "scenario.json";
    save_scenario(doc, path);
    out << "wrote " << path.string() << '\n';
    return ExitCode::ok;
}

int exit_code_for(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::parse: return ExitCode::parse_failure;
        case ErrorCategory::validation:
        case ErrorCategory::alignment: return ExitCode::invalid_scenario;
        case ErrorCategory::configuration:
        case ErrorCategory::invalid_argument: return ExitCode::bad_configuration;
        case ErrorCategory::numerical: return ExitCode::numerical_failure;
        case ErrorCategory::io: return ExitCode::io_failure;
    }
    return ExitCode::usage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Box-aware differentiable trajectory rasterizer and ellipse loss tools", "bdtr"};
    app.require_subcommand(1);
    Options o;

    const auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--scenario", o.scenario, "Scenario JSON document");
        sub->add_option("--lambda", o.lambda, "Ellipse loss weight (default 0.03)");
        sub->add_option("--k", o.k, "Sigma scale relative to box size (default 0.7071067811865476)");
        sub->add_option("--beta", o.beta, "Smooth-L1 transition point (default 1)");
        sub->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
        sub->add_flag("--emit-rasters", o.emit_rasters, "Also write PGM raster images");
    };

    CLI::App* loss = app.add_subcommand("loss", "Vanilla, ellipse and combined loss report");
    add_common(loss);
    loss->add_option("--truncation-md", o.truncation, "Mahalanobis truncation radius or 'none' (default 1)")
        ->expected(1);
    loss->add_option("--offroad-factor", o.offroad_factor, "Weight of the off-road baseline x/y terms")
        ->capture_default_str();

    CLI::App* metrics = app.add_subcommand("metrics", "l2 and ORFP metrics report");
    add_common(metrics);
    metrics->add_option("--truncation-md", o.truncation, "Mahalanobis truncation radius or 'none'")->expected(1);

    CLI::App* toy = app.add_subcommand("toy", "Gradient-descent characterization of the ellipse loss");
    add_common(toy);
    toy->add_option("--truncation-md", o.truncation,
                    "Truncation radius or 'none'; several values (e.g. 0.5,1,2,none) give one trace each")
        ->delimiter(',')
        ->expected(1, 16);
    toy->add_option("--iters", o.iters, "Gradient steps")->capture_default_str();
    toy->add_option("--step-xy", o.step_xy, "Step size for x and y")->capture_default_str();
    toy->add_option("--step-theta", o.step_theta, "Step size for theta")->capture_default_str();

    CLI::App* raster = app.add_subcommand("raster", "Write the drivable mask and per-waypoint Gaussian rasters");
    add_common(raster);
    raster->add_option("--truncation-md", o.truncation, "Mahalanobis truncation radius or 'none'")->expected(1);

    CLI::App* tmpl = app.add_subcommand("template", "Write an example scenario on the full-size grid");
    tmpl->add_option("--out", o.out_dir, "Output directory")->capture_default_str();

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ExitCode::ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ExitCode::ok;
    } catch (const CLI::ParseError& e) {
        err << "bdtr: error[usage]: " << e.what() << '\n';
        return ExitCode::usage;
    }

    try {
        if (loss->parsed()) return cmd_loss(o, out);
        if (metrics->parsed()) return cmd_metrics(o, out);
        if (toy->parsed()) return cmd_toy(o, out);
        if (raster->parsed()) return cmd_raster(o, out);
        if (tmpl->parsed()) return cmd_template(o, out);
    } catch (const Error& e) {
        err << "bdtr: error[" << to_string(e.category()) << "]: " << e.what() << '\n';
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        err << "bdtr: error[internal]: " << e.what() << '\n';
        return ExitCode::usage;
    }
    return ExitCode::usage;
}

}  // namespace bdtr::cli
