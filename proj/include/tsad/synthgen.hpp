#pragma once

#include "tsad/timeseries.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tsad {

struct SinusoidComponent {
    double amplitude = 1.0;
    double period = 32.0;  // > 1
    double phase = 0.0;
};

struct SynthSpec {
    Eigen::Index length = 256;  // >= 64
    int channels = 1;
    std::vector<SinusoidComponent> components;
    double trend_slope = 0.0;
    double noise_sigma = 0.0;  // >= 0
    std::uint64_t seed = 0;
};

enum class AnomalyKind {
    PointGlobal,
    PointContext,
    PatternShape,
    PatternSeasonal,
    PatternTrend,
};

AnomalyKind anomaly_kind_from_string(const std::string& s);
std::string to_string(AnomalyKind kind);

/// Window [start, start+duration) must lie inside the series; point kinds use
/// duration <= 3, pattern kinds duration >= 10.
struct AnomalySpec {
    AnomalyKind kind = AnomalyKind::PointGlobal;
    Eigen::Index start = 0;
    Eigen::Index duration = 1;
    double magnitude = 1.0;
};

/// Sum of sinusoids + linear trend + Gaussian noise, labels all zero.
/// Bit-identical output for a fixed seed.
TimeSeries generate_base(const SynthSpec& spec);

/// Dominant cycle length from the sample autocorrelation (first clear local
/// maximum); 16 when no cycle stands out. Context anomalies use a local
/// window of 4x this period.
Eigen::Index dominant_period(const Vector& values);

/// Returns a copy with the anomaly applied per channel and labels set to 1 on
/// exactly [start, start+duration). magnitude 0 leaves values untouched.
TimeSeries inject_anomaly(const TimeSeries& ts, const AnomalySpec& spec,
                          std::uint64_t seed = 0);

}  // namespace tsad
