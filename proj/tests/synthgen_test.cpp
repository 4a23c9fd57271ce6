#include "tsad/synthgen.hpp"

#include <doctest.h>

#include <cmath>

using namespace tsad;

namespace {

SynthSpec basic_spec() {
    SynthSpec spec;
    spec.length = 256;
    spec.components = {{1.0, 32.0, 0.0}};
    spec.noise_sigma = 0.05;
    spec.seed = 1;
    return spec;
}

double local_std(const Vector& v, Eigen::Index lo, Eigen::Index hi,
                 Eigen::Index skip_from, Eigen::Index skip_to) {
    double sum = 0, sum2 = 0;
    Eigen::Index n = 0;
    for (Eigen::Index t = lo; t < hi; ++t) {
        if (t >= skip_from && t < skip_to) continue;
        sum += v[t];
        sum2 += v[t] * v[t];
        ++n;
    }
    const double m = sum / static_cast<double>(n);
    return std::sqrt(std::max(0.0, sum2 / static_cast<double>(n) - m * m));
}

}  // namespace

TEST_CASE("generate_base") {
    SUBCASE("silent spec yields the zero series") {
        SynthSpec spec;
        spec.length = 64;
        spec.components = {{0.0, 32.0, 0.0}};
        TimeSeries ts = generate_base(spec);
        CHECK(ts.values.cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(ts.has_labels());
        for (auto l : *ts.labels) CHECK(l == 0);
    }
    SUBCASE("amplitude and trend bound the values") {
        SynthSpec spec;
        spec.length = 128;
        spec.components = {{2.0, 16.0, 0.4}};
        spec.trend_slope = 0.01;
        TimeSeries ts = generate_base(spec);
        CHECK(ts.values.cwiseAbs().maxCoeff() <= 2.0 + 0.01 * 128 + 1e-12);
    }
    SUBCASE("same seed is bit-identical") {
        SynthSpec spec = basic_spec();
        CHECK(generate_base(spec).values == generate_base(spec).values);
        spec.seed = 2;
        CHECK(generate_base(basic_spec()).values != generate_base(spec).values);
    }
    SUBCASE("invalid specs rejected") {
        SynthSpec spec = basic_spec();
        spec.length = 32;
        CHECK_THROWS_AS(generate_base(spec), std::invalid_argument);
        spec = basic_spec();
        spec.noise_sigma = -1;
        CHECK_THROWS_AS(generate_base(spec), std::invalid_argument);
        spec = basic_spec();
        spec.components[0].period = 1.0;
        CHECK_THROWS_AS(generate_base(spec), std::invalid_argument);
    }
}

TEST_CASE("null injection marks labels only") {
    TimeSeries base = generate_base(basic_spec());
    for (AnomalyKind kind : {AnomalyKind::PointGlobal, AnomalyKind::PointContext,
                             AnomalyKind::PatternShape, AnomalyKind::PatternSeasonal,
                             AnomalyKind::PatternTrend}) {
        const bool point =
            kind == AnomalyKind::PointGlobal || kind == AnomalyKind::PointContext;
        AnomalySpec spec{kind, 100, point ? 2 : 16, 0.0};
        TimeSeries out = inject_anomaly(base, spec);
        CHECK(out.values == base.values);
        Eigen::Index marked = 0;
        for (auto l : *out.labels) marked += l;
        CHECK(marked == spec.duration);
        for (Eigen::Index t = spec.start; t < spec.start + spec.duration; ++t) {
            CHECK((*out.labels)[t] == 1);
        }
    }
}

TEST_CASE("point-global spike becomes the global extremum") {
    TimeSeries base = generate_base(basic_spec());
    AnomalySpec spec{AnomalyKind::PointGlobal, 120, 1, 10.0};
    TimeSeries out = inject_anomaly(base, spec);
    Eigen::Index argmax = -1;
    out.values.col(0).cwiseAbs().maxCoeff(&argmax);
    CHECK(argmax == 120);
    const double sd = local_std(base.values.col(0), 0, base.length(), -1, -1);
    CHECK(std::abs(out.values(120, 0) - base.values(120, 0)) ==
          doctest::Approx(10.0 * sd));
}

TEST_CASE("point-context spike stays inside the envelope but off the local scale") {
    // Rising ramp makes the global range much wider than any local window.
    SynthSpec spec;
    spec.length = 1024;
    spec.components = {{0.5, 32.0, 0.0}};
    spec.trend_slope = 0.05;
    spec.noise_sigma = 0.02;
    spec.seed = 9;
    TimeSeries base = generate_base(spec);

    AnomalySpec anom{AnomalyKind::PointContext, 500, 1, 3.0};
    TimeSeries out = inject_anomaly(base, anom);
    const double injected = out.values(500, 0);
    CHECK(injected >= base.values.col(0).minCoeff());
    CHECK(injected <= base.values.col(0).maxCoeff());

    // Local statistics recomputed post-injection over the injector's window
    // (4x the dominant period), with the anomalous point excluded.
    const Eigen::Index half = 2 * dominant_period(base.values.col(0));
    const Vector v = out.values.col(0);
    double sum = 0;
    Eigen::Index n = 0;
    for (Eigen::Index t = 500 - half; t < 501 + half; ++t) {
        if (t == 500) continue;
        sum += v[t];
        ++n;
    }
    const double lmean = sum / static_cast<double>(n);
    const double lsd = local_std(v, 500 - half, 501 + half, 500, 501);
    CHECK(std::abs(injected - lmean) > 3.0 * lsd);
}

TEST_CASE("values outside the window are bit-identical") {
    TimeSeries base = generate_base(basic_spec());
    for (AnomalyKind kind : {AnomalyKind::PointGlobal, AnomalyKind::PointContext,
                             AnomalyKind::PatternShape, AnomalyKind::PatternSeasonal}) {
        const bool point =
            kind == AnomalyKind::PointGlobal || kind == AnomalyKind::PointContext;
        AnomalySpec spec{kind, 96, point ? 2 : 32, 1.5};
        TimeSeries out = inject_anomaly(base, spec);
        for (Eigen::Index t = 0; t < base.length(); ++t) {
            if (t >= spec.start && t < spec.start + spec.duration) continue;
            CHECK(out.values(t, 0) == base.values(t, 0));
        }
    }
}

TEST_CASE("pattern-trend ramps inside the window and shifts the tail") {
    TimeSeries base = generate_base(basic_spec());
    AnomalySpec spec{AnomalyKind::PatternTrend, 100, 20, 0.3};
    TimeSeries out = inject_anomaly(base, spec);
    CHECK(out.values(100, 0) == doctest::Approx(base.values(100, 0) + 0.3));
    CHECK(out.values(119, 0) == doctest::Approx(base.values(119, 0) + 0.3 * 20));
    // Level shift persists after the window.
    for (Eigen::Index t = 120; t < base.length(); ++t) {
        CHECK(out.values(t, 0) == doctest::Approx(base.values(t, 0) + 6.0));
    }
    // Before the window: untouched.
    CHECK(out.values(99, 0) == base.values(99, 0));
}

TEST_CASE("pattern-shape at magnitude 1 is a pure time reversal") {
    TimeSeries base = generate_base(basic_spec());
    AnomalySpec spec{AnomalyKind::PatternShape, 64, 16, 1.0};
    TimeSeries out = inject_anomaly(base, spec);
    for (Eigen::Index t = 0; t < 16; ++t) {
        CHECK(out.values(64 + t, 0) == doctest::Approx(base.values(79 - t, 0)));
    }
}

TEST_CASE("pattern-seasonal rereads the segment at scaled speed") {
    SynthSpec sp = basic_spec();
    sp.noise_sigma = 0.0;
    TimeSeries base = generate_base(sp);
    AnomalySpec spec{AnomalyKind::PatternSeasonal, 64, 32, 2.0};
    TimeSeries out = inject_anomaly(base, spec);
    // Period doubled: position t reads the base at half speed.
    CHECK(out.values(64, 0) == doctest::Approx(base.values(64, 0)));
    CHECK(out.values(80, 0) == doctest::Approx(base.values(72, 0)));
    CHECK(out.values(95, 0) != doctest::Approx(base.values(95, 0)).epsilon(1e-3));
}

TEST_CASE("injection is deterministic and validates its window") {
    TimeSeries base = generate_base(basic_spec());
    AnomalySpec spec{AnomalyKind::PointGlobal, 50, 2, 5.0};
    CHECK(inject_anomaly(base, spec, 3).values == inject_anomaly(base, spec, 3).values);

    AnomalySpec outside{AnomalyKind::PointGlobal, 255, 3, 1.0};
    CHECK_THROWS_WITH_AS(inject_anomaly(base, outside), doctest::Contains("window"),
                         std::invalid_argument);
    AnomalySpec long_point{AnomalyKind::PointGlobal, 10, 5, 1.0};
    CHECK_THROWS_AS(inject_anomaly(base, long_point), std::invalid_argument);
    AnomalySpec short_pattern{AnomalyKind::PatternShape, 10, 5, 1.0};
    CHECK_THROWS_AS(inject_anomaly(base, short_pattern), std::invalid_argument);
}
