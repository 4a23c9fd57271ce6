#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tsad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using LabelVector = std::vector<std::uint8_t>;

/// Uniformly sampled d-channel series with optional point labels (1 = anomalous).
struct TimeSeries {
    Matrix values;                       // T x d
    std::optional<LabelVector> labels;   // length T, entries in {0,1}
    std::string name;

    Eigen::Index length() const { return values.rows(); }
    Eigen::Index channels() const { return values.cols(); }
    bool has_labels() const { return labels.has_value(); }

    /// Throws std::invalid_argument on any invariant violation
    /// (empty series, label length mismatch, non-binary label, non-finite value).
    void validate() const;
};

enum class Scaling { None, MinMax, Standard };

Scaling scaling_from_string(const std::string& s);
std::string to_string(Scaling s);

struct PreprocessSpec {
    Scaling scaling = Scaling::None;
    int difference_order = 0;
};

enum class NanPolicy { Reject, ForwardFill };

/// Column mapping for CSV ingestion. An empty value_columns list selects every
/// column except the label column, in header order.
struct CsvSchema {
    std::vector<std::string> value_columns;
    std::optional<std::string> label_column;
    NanPolicy nan_policy = NanPolicy::Reject;
};

TimeSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// JSON alternative: object with "values" (array of rows), optional "labels".
TimeSeries load_json(const std::filesystem::path& path,
                     NanPolicy nan_policy = NanPolicy::Reject);

/// Header row v1..vd plus a label column when labels are present.
void write_csv(const std::filesystem::path& path, const TimeSeries& ts);

/// Differencing first (length shrinks by difference_order, labels truncated at
/// the front), then per-channel scaling. Scaling statistics come from
/// stats_from (differenced the same way) when given, otherwise from the input.
/// Min-max maps a constant channel to zeros; standard scaling uses the
/// population (1/T) variance.
TimeSeries preprocess(const TimeSeries& ts, const PreprocessSpec& spec,
                      const TimeSeries* stats_from = nullptr);

/// Inverse of order-n differencing. anchors holds the first n rows of the
/// original series; recovers a series of length anchors.rows() + diffed.rows().
Matrix undifference(const Matrix& diffed, const Matrix& anchors);

/// Contiguous prefix/suffix split at an absolute index, 0 < boundary < T.
std::pair<TimeSeries, TimeSeries> train_test_split(const TimeSeries& ts,
                                                   Eigen::Index boundary);

/// Split at floor(fraction * T); requires the resulting index to be in (0, T).
std::pair<TimeSeries, TimeSeries> train_test_split_fraction(const TimeSeries& ts,
                                                            double fraction);

}  // namespace tsad
