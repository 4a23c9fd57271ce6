#include "tsad/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tsad {

AnomalyKind anomaly_kind_from_string(const std::string& s) {
    if (s == "point-global") return AnomalyKind::PointGlobal;
    if (s == "point-context") return AnomalyKind::PointContext;
    if (s == "pattern-shape") return AnomalyKind::PatternShape;
    if (s == "pattern-seasonal") return AnomalyKind::PatternSeasonal;
    if (s == "pattern-trend") return AnomalyKind::PatternTrend;
    throw std::invalid_argument("unknown anomaly kind '" + s + "'");
}

std::string to_string(AnomalyKind kind) {
    switch (kind) {
        case AnomalyKind::PointGlobal: return "point-global";
        case AnomalyKind::PointContext: return "point-context";
        case AnomalyKind::PatternShape: return "pattern-shape";
        case AnomalyKind::PatternSeasonal: return "pattern-seasonal";
        case AnomalyKind::PatternTrend: return "pattern-trend";
    }
    throw std::logic_error("unreachable");
}

namespace {

void validate_spec(const SynthSpec& spec) {
    if (spec.length < 64) {
        throw std::invalid_argument("synthetic series length must be >= 64");
    }
    if (spec.channels < 1) {
        throw std::invalid_argument("channels must be >= 1");
    }
    if (spec.noise_sigma < 0.0) {
        throw std::invalid_argument("noise sigma must be >= 0");
    }
    for (const auto& c : spec.components) {
        if (c.period <= 1.0) {
            throw std::invalid_argument("sinusoid period must be > 1");
        }
    }
}

void validate_anomaly(const AnomalySpec& spec, Eigen::Index T) {
    if (spec.start < 0 || spec.duration < 1 || spec.start + spec.duration > T) {
        throw std::invalid_argument("anomaly window out of range");
    }
    if (spec.magnitude < 0.0) {
        throw std::invalid_argument("anomaly magnitude must be >= 0");
    }
    const bool point = spec.kind == AnomalyKind::PointGlobal ||
                       spec.kind == AnomalyKind::PointContext;
    if (point && spec.duration > 3) {
        throw std::invalid_argument("point anomalies use duration <= 3");
    }
    if (!point && spec.duration < 10) {
        throw std::invalid_argument("pattern anomalies use duration >= 10");
    }
}

double channel_mean(const Vector& v, Eigen::Index from, Eigen::Index to) {
    return v.segment(from, to - from).mean();
}

double channel_std(const Vector& v, Eigen::Index from, Eigen::Index to) {
    const auto seg = v.segment(from, to - from);
    const double m = seg.mean();
    return std::sqrt((seg.array() - m).square().mean());
}

}  // namespace

// First local maximum of the sample autocorrelation over lags in [2, T/4].
Eigen::Index dominant_period(const Vector& v) {
    const Eigen::Index T = v.size();
    const Eigen::Index max_lag = T / 4;
    if (max_lag < 3) return std::min<Eigen::Index>(16, T);
    const double m = v.mean();
    const double denom = (v.array() - m).square().sum();
    if (denom == 0.0) return std::min<Eigen::Index>(16, T);
    double best = -2.0;
    Eigen::Index best_lag = 16;
    double prev = 2.0;
    bool rising = false;
    for (Eigen::Index lag = 1; lag <= max_lag; ++lag) {
        double acf = 0.0;
        for (Eigen::Index t = lag; t < T; ++t) {
            acf += (v[t] - m) * (v[t - lag] - m);
        }
        acf /= denom;
        if (lag >= 2 && rising && acf < prev && prev > 0.2 && prev > best) {
            best = prev;
            best_lag = lag - 1;
        }
        rising = acf > prev;
        prev = acf;
    }
    return best_lag;
}

TimeSeries generate_base(const SynthSpec& spec) {
    validate_spec(spec);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    TimeSeries ts;
    ts.name = "synthetic";
    ts.values.resize(spec.length, spec.channels);
    for (Eigen::Index t = 0; t < spec.length; ++t) {
        double base = spec.trend_slope * static_cast<double>(t);
        for (const auto& c : spec.components) {
            base += c.amplitude *
                    std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / c.period +
                             c.phase);
        }
        for (int ch = 0; ch < spec.channels; ++ch) {
            ts.values(t, ch) = base;
        }
    }
    if (spec.noise_sigma > 0.0) {
        for (Eigen::Index t = 0; t < spec.length; ++t) {
            for (int ch = 0; ch < spec.channels; ++ch) {
                ts.values(t, ch) += spec.noise_sigma * gauss(rng);
            }
        }
    }
    ts.labels = LabelVector(static_cast<std::size_t>(spec.length), 0);
    return ts;
}

TimeSeries inject_anomaly(const TimeSeries& ts, const AnomalySpec& spec,
                          std::uint64_t seed) {
    ts.validate();
    validate_anomaly(spec, ts.length());
    (void)seed;  // injections are fully determined by the anomaly parameters

    TimeSeries out = ts;
    if (!out.labels) {
        out.labels = LabelVector(static_cast<std::size_t>(ts.length()), 0);
    }
    for (Eigen::Index t = spec.start; t < spec.start + spec.duration; ++t) {
        (*out.labels)[static_cast<std::size_t>(t)] = 1;
    }
    if (spec.magnitude == 0.0) {
        return out;  // null injection: labels only
    }

    const Eigen::Index T = ts.length();
    const Eigen::Index end = spec.start + spec.duration;

    for (Eigen::Index ch = 0; ch < ts.channels(); ++ch) {
        const Vector v = ts.values.col(ch);
        switch (spec.kind) {
            case AnomalyKind::PointGlobal: {
                const double sd = channel_std(v, 0, T);
                const double mean = channel_mean(v, 0, T);
                for (Eigen::Index t = spec.start; t < end; ++t) {
                    const double dir = v[t] >= mean ? 1.0 : -1.0;
                    out.values(t, ch) = v[t] + dir * spec.magnitude * sd;
                }
                break;
            }
            case AnomalyKind::PointContext: {
                // Local window of 4x the dominant period around the anomaly,
                // excluding the anomaly itself.
                const Eigen::Index period = dominant_period(v);
                const Eigen::Index half = 2 * period;
                const Eigen::Index lo = std::max<Eigen::Index>(0, spec.start - half);
                const Eigen::Index hi = std::min(T, end + half);
                double sum = 0.0, sum2 = 0.0;
                Eigen::Index n = 0;
                for (Eigen::Index t = lo; t < hi; ++t) {
                    if (t >= spec.start && t < end) continue;
                    sum += v[t];
                    sum2 += v[t] * v[t];
                    ++n;
                }
                const double lmean = sum / static_cast<double>(n);
                const double lsd = std::sqrt(
                    std::max(0.0, sum2 / static_cast<double>(n) - lmean * lmean));
                const double gmin = v.minCoeff();
                const double gmax = v.maxCoeff();
                for (Eigen::Index t = spec.start; t < end; ++t) {
                    const double dir = v[t] >= lmean ? 1.0 : -1.0;
                    double cand = v[t] + dir * spec.magnitude * lsd;
                    if (cand > gmax || cand < gmin) {
                        const double flipped = v[t] - dir * spec.magnitude * lsd;
                        cand = (flipped >= gmin && flipped <= gmax)
                                   ? flipped
                                   : std::clamp(cand, gmin, gmax);
                    }
                    out.values(t, ch) = cand;
                }
                break;
            }
            case AnomalyKind::PatternShape: {
                // Time-reversed copy blended in by magnitude (clamped to 1).
                const double w = std::min(spec.magnitude, 1.0);
                for (Eigen::Index t = spec.start; t < end; ++t) {
                    const double rev = v[end - 1 - (t - spec.start)];
                    out.values(t, ch) = (1.0 - w) * v[t] + w * rev;
                }
                break;
            }
            case AnomalyKind::PatternSeasonal: {
                // Re-read the segment at 1/magnitude speed: local period scales
                // by magnitude. Linear interpolation, clamped at the series end.
                for (Eigen::Index t = spec.start; t < end; ++t) {
                    const double pos = static_cast<double>(spec.start) +
                                       static_cast<double>(t - spec.start) / spec.magnitude;
                    const double clamped =
                        std::clamp(pos, 0.0, static_cast<double>(T - 1));
                    const auto i0 = static_cast<Eigen::Index>(std::floor(clamped));
                    const Eigen::Index i1 = std::min(i0 + 1, T - 1);
                    const double frac = clamped - static_cast<double>(i0);
                    out.values(t, ch) = (1.0 - frac) * v[i0] + frac * v[i1];
                }
                break;
            }
            case AnomalyKind::PatternTrend: {
                // Ramp over the window, then a persistent level shift.
                for (Eigen::Index t = spec.start; t < end; ++t) {
                    out.values(t, ch) =
                        v[t] + spec.magnitude * static_cast<double>(t - spec.start + 1);
                }
                const double shift = spec.magnitude * static_cast<double>(spec.duration);
                for (Eigen::Index t = end; t < T; ++t) {
                    out.values(t, ch) = v[t] + shift;
                }
                break;
            }
        }
    }
    return out;
}

}  // namespace tsad
