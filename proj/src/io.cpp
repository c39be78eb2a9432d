#include <bdtr/io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace bdtr {

using nlohmann::json;

LossConfig apply(const ConfigOverrides& o, LossConfig base) {
    if (o.k) base.k = *o.k;
    if (o.lambda) base.lambda = *o.lambda;
    if (o.truncation_md) base.truncation_md = *o.truncation_md;
    if (o.beta) base.beta = *o.beta;
    return base;
}

std::vector<Track> ScenarioDoc::predictions() const {
    std::vector<Track> out;
    out.reserve(actors.size());
    for (const auto& a : actors) out.push_back(a.predicted);
    return out;
}

std::vector<Track> ScenarioDoc::ground_truths() const {
    std::vector<Track> out;
    out.reserve(actors.size());
    for (const auto& a : actors) out.push_back(a.ground_truth);
    return out;
}

void validate(const ScenarioDoc& doc) {
    if (doc.schema_version != kSchemaVersion)
        throw ParseError("schema_version " + std::to_string(doc.schema_version) + " is not supported (expected " +
                         std::to_string(kSchemaVersion) + ")");
    validate(doc.drivable);
    std::set<std::string> ids;
    for (const auto& a : doc.actors) {
        if (a.id.empty()) throw ValidationError("actors: actor id must not be empty");
        if (!ids.insert(a.id).second) throw ValidationError("actors: duplicate actor id '" + a.id + "'");
        validate(a.predicted, "actor '" + a.id + "' predicted");
        validate(a.ground_truth, "actor '" + a.id + "' ground_truth");
        if (a.predicted.size() != a.ground_truth.size())
            throw AlignmentError("actor '" + a.id + "': predicted has " + std::to_string(a.predicted.size()) +
                                 " waypoints but ground_truth has " + std::to_string(a.ground_truth.size()));
    }
    if (!doc.actors.empty()) {
        const auto& first = doc.actors.front();
        for (const auto& a : doc.actors) {
            if (a.predicted.size() != first.predicted.size())
                throw AlignmentError("actor '" + a.id + "': trajectory length " + std::to_string(a.predicted.size()) +
                                     " differs from actor '" + first.id + "' (" +
                                     std::to_string(first.predicted.size()) + ")");
            if (a.predicted.timestep != first.predicted.timestep || a.ground_truth.timestep != first.predicted.timestep)
                throw AlignmentError("actor '" + a.id + "': timestep differs from the scenario timestep");
        }
    }
    const auto& c = doc.config;
    if (c.k && !(*c.k > 0.0)) throw ValidationError("config.k must be positive");
    if (c.lambda && !(*c.lambda >= 0.0)) throw ValidationError("config.lambda must be non-negative");
    if (c.beta && !(*c.beta > 0.0)) throw ValidationError("config.beta must be positive");
    if (c.truncation_md && *c.truncation_md && !(**c.truncation_md > 0.0))
        throw ValidationError("config.truncation_md must be positive or \"none\"");
}

namespace {

const json& field(const json& j, const char* key, const std::string& ctx) {
    if (!j.is_object()) throw ParseError(ctx + ": expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError(ctx + ": missing field '" + key + "'");
    return *it;
}

double number(const json& j, const char* key, const std::string& ctx) {
    const json& v = field(j, key, ctx);
    if (!v.is_number()) throw ParseError(ctx + "." + key + ": expected a number");
    return v.get<double>();
}

Point2 point(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError(ctx + ": expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

Ring ring(const json& j, const std::string& ctx) {
    if (!j.is_array()) throw ParseError(ctx + ": expected an array of points");
    Ring out;
    for (std::size_t v = 0; v < j.size(); ++v) out.push_back(point(j[v], ctx + "[" + std::to_string(v) + "]"));
    return out;
}

json ring_json(const Ring& r) {
    json out = json::array();
    for (const auto& p : r) out.push_back({p.x(), p.y()});
    return out;
}

Track track(const json& j, double timestep, const std::string& ctx) {
    if (!j.is_array()) throw ParseError(ctx + ": expected an array of waypoints");
    Track out;
    out.timestep = timestep;
    for (std::size_t t = 0; t < j.size(); ++t) {
        const std::string wctx = ctx + "[" + std::to_string(t) + "]";
        const json& w = j[t];
        out.waypoints.push_back({number(w, "x", wctx), number(w, "y", wctx), number(w, "l", wctx),
                                 number(w, "w", wctx), number(w, "theta", wctx)});
    }
    return out;
}

json track_json(const Track& tr) {
    json out = json::array();
    for (const auto& s : tr.waypoints) out.push_back({{"x", s.x}, {"y", s.y}, {"l", s.l}, {"w", s.w}, {"theta", s.theta}});
    return out;
}

Grid grid_from_json(const json& j) {
    const std::string ctx = "grid";
    return Grid(number(j, "length_m", ctx), number(j, "width_m", ctx), number(j, "cell_l", ctx),
                number(j, "cell_w", ctx), point(field(j, "origin", ctx), ctx + ".origin"));
}

}  // namespace

json truncation_to_json(const Truncation<double>& md) { return md ? json(*md) : json("none"); }

Truncation<double> truncation_from_json(const json& j) {
    if (j.is_string() && j.get<std::string>() == "none") return std::nullopt;
    if (j.is_number()) return j.get<double>();
    throw ParseError("truncation_md: expected a number or \"none\"");
}

ScenarioDoc scenario_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("scenario: expected a JSON object");
    const json& ver = field(j, "schema_version", "scenario");
    if (!ver.is_number_integer()) throw ParseError("scenario.schema_version: expected an integer");
    if (ver.get<int>() != kSchemaVersion)
        throw ParseError("scenario: schema_version " + std::to_string(ver.get<int>()) + " is not supported (expected " +
                         std::to_string(kSchemaVersion) + ")");

    const double timestep = j.contains("timestep") ? number(j, "timestep", "scenario") : 0.1;
    ScenarioDoc doc{kSchemaVersion, grid_from_json(field(j, "grid", "scenario")), {}, {}, {}};

    if (j.contains("drivable")) {
        const json& polys = j.at("drivable");
        if (!polys.is_array()) throw ParseError("drivable: expected an array of polygons");
        for (std::size_t p = 0; p < polys.size(); ++p) {
            const std::string ctx = "drivable[" + std::to_string(p) + "]";
            Polygon poly{ring(field(polys[p], "outer", ctx), ctx + ".outer"), {}};
            if (polys[p].contains("holes")) {
                const json& holes = polys[p].at("holes");
                if (!holes.is_array()) throw ParseError(ctx + ".holes: expected an array of rings");
                for (std::size_t h = 0; h < holes.size(); ++h)
                    poly.holes.push_back(ring(holes[h], ctx + ".holes[" + std::to_string(h) + "]"));
            }
            doc.drivable.push_back(std::move(poly));
        }
    }

    const json& actors = field(j, "actors", "scenario");
    if (!actors.is_array()) throw ParseError("actors: expected an array");
    for (std::size_t a = 0; a < actors.size(); ++a) {
        const std::string ctx = "actors[" + std::to_string(a) + "]";
        const json& id = field(actors[a], "id", ctx);
        if (!id.is_string()) throw ParseError(ctx + ".id: expected a string");
        const std::string actor = "actor '" + id.get<std::string>() + "'";
        doc.actors.push_back({id.get<std::string>(),
                              track(field(actors[a], "predicted", ctx), timestep, actor + " predicted"),
                              track(field(actors[a], "ground_truth", ctx), timestep, actor + " ground_truth")});
    }

    if (j.contains("config")) {
        const json& c = j.at("config");
        if (!c.is_object()) throw ParseError("config: expected an object");
        if (c.contains("k")) doc.config.k = number(c, "k", "config");
        if (c.contains("lambda")) doc.config.lambda = number(c, "lambda", "config");
        if (c.contains("beta")) doc.config.beta = number(c, "beta", "config");
        if (c.contains("truncation_md")) doc.config.truncation_md = truncation_from_json(c.at("truncation_md"));
    }

    validate(doc);
    return doc;
}

json scenario_to_json(const ScenarioDoc& doc) {
    json j;
    j["schema_version"] = doc.schema_version;
    j["timestep"] = doc.timestep();
    j["grid"] = {{"length_m", doc.grid.length_m()},
                 {"width_m", doc.grid.width_m()},
                 {"cell_l", doc.grid.cell_l()},
                 {"cell_w", doc.grid.cell_w()},
                 {"origin", {doc.grid.origin().x(), doc.grid.origin().y()}}};
    j["drivable"] = json::array();
    for (const auto& p : doc.drivable) {
        json holes = json::array();
        for (const auto& h : p.holes) holes.push_back(ring_json(h));
        j["drivable"].push_back({{"outer", ring_json(p.outer)}, {"holes", holes}});
    }
    j["actors"] = json::array();
    for (const auto& a : doc.actors)
        j["actors"].push_back(
            {{"id", a.id}, {"predicted", track_json(a.predicted)}, {"ground_truth", track_json(a.ground_truth)}});
    json c = json::object();
    if (doc.config.k) c["k"] = *doc.config.k;
    if (doc.config.lambda) c["lambda"] = *doc.config.lambda;
    if (doc.config.truncation_md) c["truncation_md"] = truncation_to_json(*doc.config.truncation_md);
    if (doc.config.beta) c["beta"] = *doc.config.beta;
    j["config"] = c;
    return j;
}

ScenarioDoc load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path.string() + "': " + e.what());
    }
    return scenario_from_json(j);
}

void write_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void save_scenario(const ScenarioDoc& doc, const std::filesystem::path& path) {
    validate(doc);
    write_json(scenario_to_json(doc), path);
}

json config_to_json(const LossConfig& cfg) {
    return {{"k", cfg.k}, {"lambda", cfg.lambda}, {"truncation_md", truncation_to_json(cfg.truncation_md)},
            {"beta", cfg.beta}};
}

json loss_report_json(const LossReport& r, const std::vector<std::string>& actor_ids) {
    json j;
    j["config"] = config_to_json(r.config);
    j["waypoints"] = r.waypoints;
    j["vanilla"] = {{"sum", r.vanilla}, {"mean", r.vanilla_mean()}};
    j["ellipse"] = {{"sum", r.ellipse}, {"mean", r.ellipse_mean()}};
    j["total"] = {{"sum", r.total}, {"mean", r.total_mean()}};
    j["actors"] = json::array();
    for (Eigen::Index a = 0; a < r.contributions.rows(); ++a) {
        json contrib = json::array();
        json gate = json::array();
        json grads = json::array();
        const auto ai = static_cast<std::size_t>(a);
        for (Eigen::Index t = 0; t < r.contributions.cols(); ++t) {
            contrib.push_back(r.contributions(a, t));
            gate.push_back(r.indicators(a, t));
            const auto& g = r.ellipse_gradients[ai];
            grads.push_back({g(t, 0), g(t, 1), g(t, 2)});
        }
        j["actors"].push_back({{"id", ai < actor_ids.size() ? actor_ids[ai] : std::to_string(ai)},
                               {"ellipse_contributions", contrib},
                               {"indicator", gate},
                               {"ellipse_gradients_xy_theta", grads}});
    }
    return j;
}

namespace {

json stats_json(const HorizonStats& s) {
    return {{"avg", s.average}, {"at_final", s.at_final}, {"per_horizon", s.per_horizon}};
}

}  // namespace

json metrics_report_json(const MetricsReport& r, const LossConfig& cfg) {
    return {{"config", config_to_json(cfg)},
            {"l2", stats_json(r.l2)},
            {"ctr_orfp", stats_json(r.ctr_orfp)},
            {"box_orfp", stats_json(r.box_orfp)},
            {"counts", r.counts}};
}

void write_trace_csv(const OptTrace& trace, std::ostream& os) {
    os << "iter,x,y,theta,loss,grad_norm\n";
    char buf[256];
    for (const auto& row : trace.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.iteration, row.state.x,
                      row.state.y, row.state.theta, row.loss, row.grad_norm);
        os << buf;
    }
}

void write_trace_csv(const OptTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_trace_csv(trace, out);
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_pgm(const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& pixels,
               const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    const auto cols = pixels.rows();
    const auto rows = pixels.cols();
    out << "P5\n" << cols << ' ' << rows << "\n255\n";
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index j = rows - 1 - r;
        for (Eigen::Index i = 0; i < cols; ++i) out.put(static_cast<char>(pixels(i, j)));
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_mask_image(const DrivableMask& mask, const std::filesystem::path& path) {
    write_pgm((mask.bits().array() * std::uint8_t(255)).matrix(), path);
}

void write_density_image(const DenseGrid<double>& values, const std::filesystem::path& path) {
    const double vmax = values.size() ? values.maxCoeff() : 0.0;
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> px(values.rows(), values.cols());
    for (Eigen::Index j = 0; j < values.cols(); ++j)
        for (Eigen::Index i = 0; i < values.rows(); ++i)
            px(i, j) = vmax > 0.0 ? static_cast<std::uint8_t>(std::lround(255.0 * values(i, j) / vmax)) : 0;
    write_pgm(px, path);
    std::filesystem::path sidecar = path;
    sidecar += ".json";
    write_json({{"max_value", vmax}, {"units", "1/m^2"}, {"width", values.rows()}, {"height", values.cols()}},
               sidecar);
}

}  // namespace bdtr
