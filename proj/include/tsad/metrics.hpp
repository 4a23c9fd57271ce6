#pragma once

#include "tsad/detector.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tsad {

/// Maximal runs of 1s as sorted, disjoint half-open [start, end) intervals.
struct EventList {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> intervals;

    std::size_t size() const { return intervals.size(); }
    bool empty() const { return intervals.empty(); }
};

EventList events_from_labels(const LabelVector& labels);
LabelVector labels_from_events(const EventList& events, std::size_t length);

enum class MetricKind {
    PointAdjustedF1,       // "F1"  : point-adjusted Best F1
    DelayPointAdjustedF1,  // "B-F-k": k-delay Best F1 on point-adjusted labels
    DelayEventF1,          // "E-F-k": event-level k-delay F1
};

std::string metric_label(MetricKind kind, std::optional<int> k);
std::pair<MetricKind, std::optional<int>> metric_from_label(const std::string& label);

/// What happens to raw alarms inside a ground-truth interval whose first alarm
/// came too late: cleared (treated as misses, the default reading) or kept as
/// false positives.
enum class LateAlarmPolicy { Clear, CountFalsePositive };

struct EvalResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double threshold = 0.0;
    MetricKind kind = MetricKind::PointAdjustedF1;
    std::optional<int> k;
};

nlohmann::json to_json(const EvalResult& result);

/// Point adjustment: every ground-truth interval containing a predicted point
/// is fully credited. With k, only intervals whose first alarm falls at offset
/// < k from the interval start are credited; alarms inside missed intervals
/// follow the late-alarm policy. Predictions outside intervals pass through.
LabelVector point_adjust(const LabelVector& preds, const LabelVector& labels,
                         std::optional<int> k = std::nullopt,
                         LateAlarmPolicy policy = LateAlarmPolicy::Clear);

/// Pointwise precision/recall/F1 over all indices (0/0 counts as 0).
EvalResult f1_point(const LabelVector& preds, const LabelVector& labels);

/// Event-level k-delay F1: a ground-truth event is detected iff its first
/// overlapping alarm has offset < k; a predicted event is a true positive iff
/// it overlaps some detected ground-truth event.
EvalResult event_f1_delay(const LabelVector& preds, const LabelVector& labels, int k);

/// Sweeps thresholds over all distinct scores on the valid region (plus +inf),
/// binarizing with score >= threshold, and returns the best result; ties
/// resolved toward the lowest threshold. Warm-up indices are excluded from
/// both predictions and labels. labels must have the scores' full length.
EvalResult best_f1_sweep(const ScoreSeries& scores, const LabelVector& labels,
                         MetricKind kind, std::optional<int> k = std::nullopt,
                         LateAlarmPolicy policy = LateAlarmPolicy::Clear);

}  // namespace tsad
