#pragma once

#include "tsad/solver.hpp"
#include "tsad/timeseries.hpp"

#include <limits>

namespace tsad {

/// Per-timestep anomaly scores aligned to the scored series. Indices before
/// valid_from carry the NaN sentinel and must never be read as scores.
struct ScoreSeries {
    Vector scores;
    Eigen::Index valid_from = 0;

    static double unscored() { return std::numeric_limits<double>::quiet_NaN(); }
    bool scored(Eigen::Index i) const { return i >= valid_from; }
    Eigen::Index length() const { return scores.size(); }
};

struct DetectorConfig {
    int p = 1;
    std::optional<double> lambda;  // absent = scale-relative default
    std::optional<int> rank;       // absent = full-rank ridge/OLS
    PreprocessSpec preprocess;
    // Benchmark mode: test directly follows train in the source series, so the
    // last p train points seed the first test windows and every test point
    // gets a score.
    bool contiguous_train_test = false;
};

/// s_t = ||y_t - W^T x_t||^2 for t >= p; earlier indices unscored.
ScoreSeries score(const TimeSeries& ts, const LinearModel& model);

/// End-to-end pipeline: preprocess train (fitting statistics), preprocess test
/// with train statistics, fit ridge or RRR on train lags, score test. The
/// returned scores align to the *preprocessed* test series, whose length is
/// test.length() - difference_order.
std::pair<LinearModel, ScoreSeries> fit_detect(const TimeSeries& train,
                                               const TimeSeries& test,
                                               const DetectorConfig& config);

/// CSV columns: index, score, label (label column only when labels given).
/// Unscored rows write an empty score cell.
void write_score_csv(const std::filesystem::path& path, const ScoreSeries& scores,
                     const std::optional<LabelVector>& labels = std::nullopt);

/// Line plot of channel 0 with the score trace underneath; labeled regions
/// shaded. For the case-study style visual checks.
void write_score_svg(const std::filesystem::path& path, const TimeSeries& series,
                     const ScoreSeries& scores);

}  // namespace tsad
