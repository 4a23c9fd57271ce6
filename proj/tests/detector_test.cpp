#include "tsad/detector.hpp"

#include "tsad/synthgen.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

using namespace tsad;

namespace {

TimeSeries make_series(std::initializer_list<double> vals) {
    TimeSeries ts;
    ts.values.resize(static_cast<Eigen::Index>(vals.size()), 1);
    Eigen::Index i = 0;
    for (double v : vals) ts.values(i++, 0) = v;
    return ts;
}

TimeSeries sine_series(Eigen::Index T, double period, double noise, std::uint64_t seed) {
    SynthSpec spec;
    spec.length = T;
    spec.components = {{1.0, period, 0.0}};
    spec.noise_sigma = noise;
    spec.seed = seed;
    return generate_base(spec);
}

}  // namespace

TEST_CASE("previous-value predictor scores squared first differences") {
    LinearModel model;
    model.p = 1;
    model.d = 1;
    model.rank = 1;
    model.W = (Matrix(2, 1) << 0.0, 1.0).finished();

    ScoreSeries s = score(make_series({0, 0, 5, 0}), model);
    CHECK(s.valid_from == 1);
    CHECK(std::isnan(s.scores[0]));
    CHECK(s.scores[1] == doctest::Approx(0.0));
    CHECK(s.scores[2] == doctest::Approx(25.0));
    CHECK(s.scores[3] == doctest::Approx(25.0));
}

TEST_CASE("zero predictor scores squared norms") {
    LinearModel model;
    model.p = 1;
    model.d = 2;
    model.rank = 2;
    model.W = Matrix::Zero(3, 2);

    TimeSeries ts;
    ts.values.resize(3, 2);
    ts.values << 1, 2, 3, 4, 5, 6;
    ScoreSeries s = score(ts, model);
    CHECK(s.scores[1] == doctest::Approx(9.0 + 16.0));
    CHECK(s.scores[2] == doctest::Approx(25.0 + 36.0));
}

TEST_CASE("score equals a scalar-loop recomputation") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 10; ++trial) {
        const int p = 1 + static_cast<int>(rng() % 4);
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 3);
        const Eigen::Index T = p + 2 + static_cast<Eigen::Index>(rng() % 30);
        TimeSeries ts;
        ts.values.resize(T, d);
        for (Eigen::Index t = 0; t < T; ++t) {
            for (Eigen::Index c = 0; c < d; ++c) ts.values(t, c) = gauss(rng);
        }
        LinearModel model;
        model.p = p;
        model.d = static_cast<int>(d);
        model.W.resize(1 + d * p, d);
        for (Eigen::Index i = 0; i < model.W.rows(); ++i) {
            for (Eigen::Index j = 0; j < d; ++j) model.W(i, j) = gauss(rng);
        }

        ScoreSeries s = score(ts, model);
        for (Eigen::Index t = p; t < T; ++t) {
            double expected = 0.0;
            for (Eigen::Index c = 0; c < d; ++c) {
                double pred = model.W(0, c);
                for (int lag = 1; lag <= p; ++lag) {
                    for (Eigen::Index cc = 0; cc < d; ++cc) {
                        pred += model.W(1 + (lag - 1) * d + cc, c) * ts.values(t - lag, cc);
                    }
                }
                const double r = ts.values(t, c) - pred;
                expected += r * r;
            }
            CHECK(s.scores[t] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("score error cases") {
    LinearModel model;
    model.p = 2;
    model.d = 1;
    model.W = Matrix::Zero(3, 1);

    TimeSeries wide;
    wide.values = Matrix::Zero(5, 2);
    CHECK_THROWS_WITH_AS(score(wide, model), doctest::Contains("channel"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(score(make_series({1, 2}), model), doctest::Contains("short"),
                         std::invalid_argument);
}

TEST_CASE("fit_detect flags a spike on top of a sine") {
    TimeSeries train = sine_series(512, 32, 0.01, 1);
    TimeSeries test = sine_series(256, 32, 0.01, 2);
    const Eigen::Index spike = 130;
    test.values(spike, 0) += 15.0;

    DetectorConfig config;
    config.p = 32;
    auto [model, scores] = fit_detect(train, test, config);
    Eigen::Index argmax = -1;
    scores.scores.tail(scores.length() - scores.valid_from).maxCoeff(&argmax);
    CHECK(argmax + scores.valid_from == spike);
}

TEST_CASE("rank = d reproduces the full-rank pipeline") {
    TimeSeries train = sine_series(300, 24, 0.05, 3);
    TimeSeries test = sine_series(200, 24, 0.05, 4);

    DetectorConfig plain;
    plain.p = 8;
    DetectorConfig full_rank = plain;
    full_rank.rank = 1;  // univariate: full rank is 1

    auto [m1, s1] = fit_detect(train, test, plain);
    auto [m2, s2] = fit_detect(train, test, full_rank);
    CHECK((s1.scores.tail(192) - s2.scores.tail(192)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("benchmark-style multivariate config runs end-to-end") {
    // Window 64, rank 16, min-max scaling, first differences.
    SynthSpec spec;
    spec.length = 512;
    spec.channels = 20;
    spec.components = {{1.0, 48.0, 0.3}};
    spec.noise_sigma = 0.2;
    spec.seed = 5;
    TimeSeries train = generate_base(spec);
    spec.seed = 6;
    spec.length = 256;
    TimeSeries test = generate_base(spec);

    DetectorConfig config;
    config.p = 64;
    config.rank = 16;
    config.preprocess.scaling = Scaling::MinMax;
    config.preprocess.difference_order = 1;

    auto [model, scores] = fit_detect(train, test, config);
    CHECK(model.rank == 16);
    CHECK(model.d == 20);
    CHECK(scores.length() == 255);  // differencing drops one point
    CHECK(scores.scores.tail(scores.length() - scores.valid_from).minCoeff() >= 0.0);
}

TEST_CASE("constant channel offset is absorbed by standard scaling") {
    TimeSeries train = sine_series(400, 20, 0.02, 7);
    TimeSeries test = sine_series(300, 20, 0.02, 8);
    DetectorConfig config;
    config.p = 16;
    config.preprocess.scaling = Scaling::Standard;

    auto [m1, s1] = fit_detect(train, test, config);
    TimeSeries train_off = train;
    TimeSeries test_off = test;
    train_off.values.array() += 100.0;
    test_off.values.array() += 100.0;
    auto [m2, s2] = fit_detect(train_off, test_off, config);

    const Eigen::Index n = s1.length() - s1.valid_from;
    CHECK((s1.scores.tail(n) - s2.scores.tail(n)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("noise-free linear-AR data is recovered exactly") {
    // y_t = 0.1 + 1.8 y_{t-1} - 0.9025 y_{t-2}: a slowly decaying oscillation,
    // so the design stays well-conditioned over the whole horizon.
    auto simulate = [](Eigen::Index T, double y0, double y1) {
        TimeSeries ts;
        ts.values.resize(T, 1);
        ts.values(0, 0) = y0;
        ts.values(1, 0) = y1;
        for (Eigen::Index t = 2; t < T; ++t) {
            ts.values(t, 0) =
                0.1 + 1.8 * ts.values(t - 1, 0) - 0.9025 * ts.values(t - 2, 0);
        }
        return ts;
    };
    TimeSeries train = simulate(80, 1.0, -0.5);
    TimeSeries test = simulate(50, 5.0, -1.0);

    DetectorConfig config;
    config.p = 2;
    config.lambda = 0.0;
    auto [model, scores] = fit_detect(train, test, config);
    CHECK(model.W(0, 0) == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(model.W(1, 0) == doctest::Approx(1.8).epsilon(1e-6));
    CHECK(scores.scores.tail(48).maxCoeff() <= 1e-10);
}

TEST_CASE("contiguous mode scores every test point") {
    TimeSeries full = sine_series(600, 32, 0.01, 9);
    auto [train, test] = train_test_split(full, 400);

    DetectorConfig config;
    config.p = 32;
    SUBCASE("warm-up seeded from the train tail") {
        config.contiguous_train_test = true;
        auto [model, scores] = fit_detect(train, test, config);
        CHECK(scores.valid_from == 0);
        CHECK(scores.length() == 200);
        CHECK(scores.scores.allFinite());
        // The seam is genuine signal, so warm-up scores stay at the noise floor.
        CHECK(scores.scores.head(32).maxCoeff() < 0.1);
    }
    SUBCASE("without the flag the warm-up is unscored") {
        auto [model, scores] = fit_detect(train, test, config);
        CHECK(scores.valid_from == 32);
        CHECK(std::isnan(scores.scores[0]));
        CHECK(std::isnan(scores.scores[31]));
        CHECK(std::isfinite(scores.scores[32]));
    }
    SUBCASE("contiguous mode composes with differencing") {
        config.contiguous_train_test = true;
        config.preprocess.difference_order = 1;
        auto [model, scores] = fit_detect(train, test, config);
        CHECK(scores.valid_from == 0);
        CHECK(scores.length() == 199);  // differenced test is one shorter
        CHECK(scores.scores.allFinite());
    }
}

TEST_CASE("score CSV export") {
    const auto path = std::filesystem::temp_directory_path() /
                      ("tsad_scores_" + std::to_string(::getpid()) + ".csv");
    ScoreSeries s;
    s.valid_from = 1;
    s.scores = (Vector(3) << ScoreSeries::unscored(), 0.5, 2.0).finished();
    write_score_csv(path, s, LabelVector{0, 1, 0});

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "index,score,label");
    std::getline(in, line);
    CHECK(line == "0,,0");  // unscored sentinel stays empty
    std::getline(in, line);
    CHECK(line == "1,0.5,1");
    std::filesystem::remove(path);

    CHECK_THROWS_AS(write_score_csv(path, s, LabelVector{0, 1}), std::invalid_argument);
}

TEST_CASE("score SVG export writes shaded regions and two traces") {
    const auto path = std::filesystem::temp_directory_path() /
                      ("tsad_plot_" + std::to_string(::getpid()) + ".svg");
    TimeSeries ts = sine_series(128, 16, 0.0, 11);
    ts.labels = LabelVector(128, 0);
    (*ts.labels)[60] = 1;
    (*ts.labels)[61] = 1;
    LinearModel model;
    model.p = 1;
    model.d = 1;
    model.W = (Matrix(2, 1) << 0.0, 1.0).finished();
    write_score_svg(path, ts, score(ts, model));

    std::ifstream in(path);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(all.find("<svg") != std::string::npos);
    CHECK(all.find("<rect") != std::string::npos);
    CHECK(all.find("polyline") != std::string::npos);
    std::filesystem::remove(path);
}
