#pragma once

#include "tsad/detector.hpp"
#include "tsad/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tsad {

struct DatasetEntry {
    std::string name;
    std::filesystem::path train_path;
    std::filesystem::path test_path;
    CsvSchema schema;
};

struct MethodEntry {
    std::string name;
    DetectorConfig config;
};

struct MetricSpec {
    MetricKind kind = MetricKind::PointAdjustedF1;
    std::optional<int> k;
    std::string label;  // e.g. "F1", "B-F-5", "E-F-5"
};

struct BenchConfig {
    std::vector<DatasetEntry> datasets;
    std::vector<MethodEntry> methods;
    std::vector<MetricSpec> metrics;
    std::filesystem::path output_dir = ".";
    int parallelism = 1;

    void validate() const;

    /// INI-style key-value file; relative paths resolve against the config
    /// file's directory. Grammar documented in the README.
    static BenchConfig load(const std::filesystem::path& path);
};

struct CellResult {
    std::map<std::string, EvalResult> metrics;  // keyed by metric label
    double wall_seconds = 0.0;
    std::size_t model_bytes = 0;
    std::optional<std::string> error;  // set when this cell failed

    bool failed() const { return error.has_value(); }
};

struct BenchReport {
    std::vector<std::string> datasets;
    std::vector<std::string> methods;
    std::vector<std::string> metric_labels;
    std::vector<std::vector<CellResult>> cells;  // [dataset][method]
    std::map<std::string, std::vector<double>> average_ranks;  // label -> per-method

    bool any_failures() const;
    nlohmann::json to_json() const;
    static BenchReport from_json(const nlohmann::json& j);
};

/// Runs every (dataset, method) cell: fit on train, score test, evaluate all
/// configured metrics. Unreadable datasets are recorded per-cell and the run
/// continues; determinism is guaranteed for a fixed config.
BenchReport run_benchmark(const BenchConfig& config);

/// Per dataset, methods ranked by descending metric value (ties share the
/// average rank); returns the per-method mean over datasets. Throws when any
/// cell is missing a value for the metric.
std::vector<double> average_rank(const BenchReport& report,
                                 const std::string& metric_label);

struct Efficiency {
    double wall_seconds = 0.0;
    std::size_t model_bytes = 0;
};

/// Wall-clock time of one fit+score run plus the serialized model size.
Efficiency measure_efficiency(const TimeSeries& train, const TimeSeries& test,
                              const DetectorConfig& config);

std::string render_markdown(const BenchReport& report);
std::string render_csv(const BenchReport& report);

}  // namespace tsad
