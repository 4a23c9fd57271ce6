#include "tsad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace tsad {

namespace {

void check_binary(const LabelVector& v, const char* what) {
    for (auto x : v) {
        if (x != 0 && x != 1) {
            throw std::invalid_argument(std::string(what) + ": non-binary entry");
        }
    }
}

double safe_ratio(double num, double denom) { return denom > 0.0 ? num / denom : 0.0; }

EvalResult make_result(double tp, double fp, double fn, MetricKind kind,
                       std::optional<int> k) {
    EvalResult r;
    r.kind = kind;
    r.k = k;
    r.precision = safe_ratio(tp, tp + fp);
    r.recall = safe_ratio(tp, tp + fn);
    r.f1 = safe_ratio(2.0 * r.precision * r.recall, r.precision + r.recall);
    return r;
}

}  // namespace

EventList events_from_labels(const LabelVector& labels) {
    check_binary(labels, "events_from_labels");
    EventList out;
    const auto n = static_cast<Eigen::Index>(labels.size());
    for (Eigen::Index i = 0; i < n;) {
        if (!labels[i]) {
            ++i;
            continue;
        }
        Eigen::Index j = i;
        while (j < n && labels[j]) ++j;
        out.intervals.emplace_back(i, j);
        i = j;
    }
    return out;
}

LabelVector labels_from_events(const EventList& events, std::size_t length) {
    LabelVector out(length, 0);
    for (const auto& [s, e] : events.intervals) {
        if (s < 0 || e > static_cast<Eigen::Index>(length) || s >= e) {
            throw std::invalid_argument("labels_from_events: interval out of range");
        }
        std::fill(out.begin() + s, out.begin() + e, 1);
    }
    return out;
}

std::string metric_label(MetricKind kind, std::optional<int> k) {
    switch (kind) {
        case MetricKind::PointAdjustedF1:
            return "F1";
        case MetricKind::DelayPointAdjustedF1:
            return "B-F-" + std::to_string(k.value_or(5));
        case MetricKind::DelayEventF1:
            return "E-F-" + std::to_string(k.value_or(5));
    }
    throw std::logic_error("unreachable");
}

std::pair<MetricKind, std::optional<int>> metric_from_label(const std::string& label) {
    if (label == "F1") return {MetricKind::PointAdjustedF1, std::nullopt};
    auto parse_k = [&](std::size_t prefix_len) {
        const int k = std::stoi(label.substr(prefix_len));
        if (k < 1) throw std::invalid_argument("metric delay k must be >= 1");
        return k;
    };
    if (label.rfind("B-F-", 0) == 0) return {MetricKind::DelayPointAdjustedF1, parse_k(4)};
    if (label.rfind("E-F-", 0) == 0) return {MetricKind::DelayEventF1, parse_k(4)};
    throw std::invalid_argument("unknown metric label '" + label + "'");
}

nlohmann::json to_json(const EvalResult& result) {
    nlohmann::json j{{"metric", metric_label(result.kind, result.k)},
                     {"precision", result.precision},
                     {"recall", result.recall},
                     {"f1", result.f1}};
    // JSON has no Infinity literal; the degenerate sweep threshold is a string.
    if (std::isfinite(result.threshold)) {
        j["threshold"] = result.threshold;
    } else {
        j["threshold"] = result.threshold > 0 ? "Infinity" : "-Infinity";
    }
    if (result.k) j["k"] = *result.k;
    return j;
}

LabelVector point_adjust(const LabelVector& preds, const LabelVector& labels,
                         std::optional<int> k, LateAlarmPolicy policy) {
    if (preds.size() != labels.size()) {
        throw std::invalid_argument("point_adjust: length mismatch");
    }
    check_binary(preds, "point_adjust");
    check_binary(labels, "point_adjust");
    if (k && *k < 1) {
        throw std::invalid_argument("point_adjust: k must be >= 1");
    }

    LabelVector out = preds;
    for (const auto& [s, e] : events_from_labels(labels).intervals) {
        Eigen::Index first = -1;
        for (Eigen::Index t = s; t < e; ++t) {
            if (preds[t]) {
                first = t;
                break;
            }
        }
        const bool detected = first >= 0 && (!k || first - s < *k);
        if (detected) {
            std::fill(out.begin() + s, out.begin() + e, 1);
        } else if (k && policy == LateAlarmPolicy::Clear) {
            // Late alarms are misses: neither credited nor penalized.
            std::fill(out.begin() + s, out.begin() + e, 0);
        }
    }
    return out;
}

EvalResult f1_point(const LabelVector& preds, const LabelVector& labels) {
    if (preds.size() != labels.size()) {
        throw std::invalid_argument("f1_point: length mismatch");
    }
    check_binary(preds, "f1_point");
    check_binary(labels, "f1_point");
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] && labels[i]) ++tp;
        if (preds[i] && !labels[i]) ++fp;
        if (!preds[i] && labels[i]) ++fn;
    }
    return make_result(tp, fp, fn, MetricKind::PointAdjustedF1, std::nullopt);
}

EvalResult event_f1_delay(const LabelVector& preds, const LabelVector& labels, int k) {
    if (preds.size() != labels.size()) {
        throw std::invalid_argument("event_f1_delay: length mismatch");
    }
    if (k < 1) {
        throw std::invalid_argument("event_f1_delay: k must be >= 1");
    }
    check_binary(preds, "event_f1_delay");
    check_binary(labels, "event_f1_delay");

    const EventList truth = events_from_labels(labels);
    const EventList alarms = events_from_labels(preds);

    // Ground-truth event detected iff its first overlapping alarm point sits
    // at offset < k from onset.
    std::vector<bool> detected(truth.size(), false);
    double tp_events = 0;
    for (std::size_t g = 0; g < truth.size(); ++g) {
        const auto [s, e] = truth.intervals[g];
        for (Eigen::Index t = s; t < e; ++t) {
            if (preds[t]) {
                detected[g] = t - s < k;
                break;
            }
        }
        if (detected[g]) ++tp_events;
    }

    double tp_alarms = 0;
    for (const auto& [as, ae] : alarms.intervals) {
        bool hit = false;
        for (std::size_t g = 0; g < truth.size() && !hit; ++g) {
            const auto [s, e] = truth.intervals[g];
            hit = detected[g] && as < e && s < ae;
        }
        if (hit) ++tp_alarms;
    }

    EvalResult r;
    r.kind = MetricKind::DelayEventF1;
    r.k = k;
    r.recall = safe_ratio(tp_events, static_cast<double>(truth.size()));
    r.precision = safe_ratio(tp_alarms, static_cast<double>(alarms.size()));
    r.f1 = safe_ratio(2.0 * r.precision * r.recall, r.precision + r.recall);
    return r;
}

EvalResult best_f1_sweep(const ScoreSeries& scores, const LabelVector& labels,
                         MetricKind kind, std::optional<int> k, LateAlarmPolicy policy) {
    if (static_cast<Eigen::Index>(labels.size()) != scores.length()) {
        throw std::invalid_argument("best_f1_sweep: label length mismatch");
    }
    const Eigen::Index n = scores.length() - scores.valid_from;
    if (n <= 0) {
        throw std::invalid_argument("best_f1_sweep: empty valid region");
    }
    if (kind != MetricKind::PointAdjustedF1 && !k) {
        throw std::invalid_argument("best_f1_sweep: delay metric needs k");
    }
    check_binary(labels, "best_f1_sweep");

    const Vector valid = scores.scores.tail(n);
    if (!valid.allFinite()) {
        throw std::invalid_argument("best_f1_sweep: non-finite score in valid region");
    }
    const LabelVector truth(labels.end() - n, labels.end());

    EvalResult best;
    best.kind = kind;
    best.k = kind == MetricKind::PointAdjustedF1 ? std::nullopt : k;

    // No anomalies to find: the empty prediction at threshold +inf is the
    // canonical degenerate answer.
    if (std::find(truth.begin(), truth.end(), 1) == truth.end()) {
        best.threshold = std::numeric_limits<double>::infinity();
        return best;
    }

    std::set<double> candidates(valid.begin(), valid.end());
    candidates.insert(std::numeric_limits<double>::infinity());

    best.f1 = -1.0;
    LabelVector preds(truth.size());
    for (double threshold : candidates) {
        for (std::size_t i = 0; i < preds.size(); ++i) {
            preds[i] = valid[static_cast<Eigen::Index>(i)] >= threshold ? 1 : 0;
        }
        EvalResult r;
        if (kind == MetricKind::DelayEventF1) {
            r = event_f1_delay(preds, truth, *k);
        } else {
            const auto adjusted = point_adjust(
                preds, truth,
                kind == MetricKind::DelayPointAdjustedF1 ? k : std::nullopt, policy);
            r = f1_point(adjusted, truth);
            r.kind = kind;
            r.k = best.k;
        }
        if (r.f1 > best.f1) {
            best = r;
            best.threshold = threshold;
        }
    }
    return best;
}

}  // namespace tsad
