#pragma once
/**
 * @file   io.hpp
 * @brief  Scenario documents, JSON reports, CSV traces and PGM raster dumps.
 *
 * Scenario layout (schema_version 1):
 *
 *   {
 *     "schema_version": 1,
 *     "timestep": 0.1,
 *     "grid": {"length_m": 20, "width_m": 20, "cell_l": 0.1, "cell_w": 0.1, "origin": [-10, -10]},
 *     "drivable": [{"outer": [[x, y], ...], "holes": [[[x, y], ...]]}],
 *     "actors": [{"id": "a0",
 *                 "predicted":    [{"x": 0, "y": 0, "l": 4, "w": 2, "theta": 0}, ...],
 *                 "ground_truth": [{"x": 0, "y": 0, "l": 4, "w": 2, "theta": 0}, ...]}],
 *     "config": {"k": 0.7071067811865476, "lambda": 0.03, "truncation_md": 1 | "none", "beta": 1}
 *   }
 *
 * "config" and each of its keys are optional overrides of the library defaults.
 */

#include <bdtr/losses.hpp>
#include <bdtr/metrics.hpp>
#include <bdtr/toy_optimizer.hpp>

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace bdtr {

inline constexpr int kSchemaVersion = 1;

struct ConfigOverrides {
    std::optional<double> k;
    std::optional<double> lambda;
    std::optional<Truncation<double>> truncation_md;
    std::optional<double> beta;

    bool operator==(const ConfigOverrides&) const = default;
};

/// `base` with every present override applied.
LossConfig apply(const ConfigOverrides& overrides, LossConfig base = {});

struct ActorRecord {
    std::string id;
    Track predicted;
    Track ground_truth;

    bool operator==(const ActorRecord&) const = default;
};

struct ScenarioDoc {
    int schema_version{kSchemaVersion};
    Grid grid;
    PolygonSet drivable;
    std::vector<ActorRecord> actors;
    ConfigOverrides config;

    std::vector<Track> predictions() const;
    std::vector<Track> ground_truths() const;
    double timestep() const { return actors.empty() ? 0.1 : actors.front().predicted.timestep; }

    bool operator==(const ScenarioDoc&) const = default;
};

/// Checks every module invariant; errors name the offending field and actor id.
void validate(const ScenarioDoc& doc);

ScenarioDoc scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioDoc& doc);

ScenarioDoc load_scenario(const std::filesystem::path& path);
void save_scenario(const ScenarioDoc& doc, const std::filesystem::path& path);

nlohmann::json truncation_to_json(const Truncation<double>& md);
Truncation<double> truncation_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const LossConfig& cfg);
nlohmann::json loss_report_json(const LossReport& report, const std::vector<std::string>& actor_ids);
nlohmann::json metrics_report_json(const MetricsReport& report, const LossConfig& cfg);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);

/// Columns: iter,x,y,theta,loss,grad_norm.
void write_trace_csv(const OptTrace& trace, std::ostream& os);
void write_trace_csv(const OptTrace& trace, const std::filesystem::path& path);

/// 8-bit binary PGM, north-up: image row 0 is the grid's top row (largest y).
void write_pgm(const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& pixels,
               const std::filesystem::path& path);

/// Drivable cells as 255, non-drivable as 0.
void write_mask_image(const DrivableMask& mask, const std::filesystem::path& path);

/// Linear map of [0, max] to [0, 255]; the max value goes to `<path>.json`.
void write_density_image(const DenseGrid<double>& values, const std::filesystem::path& path);

}  // namespace bdtr
