#include "tsad/timeseries.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

using namespace tsad;

namespace {

struct TempFile {
    std::filesystem::path path;

    explicit TempFile(const std::string& content, const char* ext = ".csv") {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("tsad_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++) + ext);
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

TimeSeries make_series(std::initializer_list<double> vals) {
    TimeSeries ts;
    ts.values.resize(static_cast<Eigen::Index>(vals.size()), 1);
    Eigen::Index i = 0;
    for (double v : vals) ts.values(i++, 0) = v;
    return ts;
}

}  // namespace

TEST_CASE("load_csv univariate without labels") {
    TempFile f("v\n1\n2\n3\n");
    TimeSeries ts = load_csv(f.path, {.value_columns = {"v"}});
    CHECK(ts.length() == 3);
    CHECK(ts.channels() == 1);
    CHECK_FALSE(ts.has_labels());
    CHECK(ts.values(0, 0) == 1.0);
    CHECK(ts.values(2, 0) == 3.0);
}

TEST_CASE("load_csv multivariate with labels") {
    TempFile f("v1,v2,label\n1,2,0\n3,4,1\n");
    CsvSchema schema;
    schema.value_columns = {"v1", "v2"};
    schema.label_column = "label";
    TimeSeries ts = load_csv(f.path, schema);
    CHECK(ts.length() == 2);
    CHECK(ts.channels() == 2);
    REQUIRE(ts.has_labels());
    CHECK((*ts.labels)[0] == 0);
    CHECK((*ts.labels)[1] == 1);
    CHECK(ts.values(1, 1) == 4.0);
}

TEST_CASE("load_csv default schema takes all non-label columns") {
    TempFile f("a,b,label\n1,2,0\n3,4,0\n");
    CsvSchema schema;
    schema.label_column = "label";
    TimeSeries ts = load_csv(f.path, schema);
    CHECK(ts.channels() == 2);
}

TEST_CASE("load_csv error cases") {
    SUBCASE("missing file") {
        CHECK_THROWS_WITH_AS(load_csv("/nonexistent/file.csv", {}),
                             doctest::Contains("cannot open"), std::runtime_error);
    }
    SUBCASE("non-numeric cell") {
        TempFile f("v\n1\nabc\n");
        CHECK_THROWS_WITH_AS(load_csv(f.path, {.value_columns = {"v"}}),
                             doctest::Contains("non-numeric cell"), std::runtime_error);
    }
    SUBCASE("ragged row") {
        TempFile f("v1,v2\n1,2\n3\n");
        CHECK_THROWS_WITH_AS(load_csv(f.path, {}), doctest::Contains("ragged"),
                             std::runtime_error);
    }
    SUBCASE("label outside {0,1}") {
        TempFile f("v,label\n1,0\n2,2\n");
        CsvSchema schema;
        schema.label_column = "label";
        CHECK_THROWS_WITH_AS(load_csv(f.path, schema),
                             doctest::Contains("label outside"), std::runtime_error);
    }
    SUBCASE("unknown column") {
        TempFile f("v\n1\n");
        CHECK_THROWS_AS(load_csv(f.path, {.value_columns = {"w"}}), std::runtime_error);
    }
}

TEST_CASE("missing values: reject by default, forward-fill on request") {
    TempFile f("v\n1\nnan\n3\n");
    CHECK_THROWS_WITH_AS(load_csv(f.path, {.value_columns = {"v"}}),
                         doctest::Contains("missing value"), std::runtime_error);

    CsvSchema ffill{.value_columns = {"v"}, .nan_policy = NanPolicy::ForwardFill};
    TimeSeries ts = load_csv(f.path, ffill);
    CHECK(ts.values(1, 0) == 1.0);

    TempFile lead("v\nnan\n1\n");
    CHECK_THROWS_AS(load_csv(lead.path, ffill), std::runtime_error);
}

TEST_CASE("load_json") {
    TempFile f(R"({"values": [[1, 10], [2, 20]], "labels": [0, 1]})", ".json");
    TimeSeries ts = load_json(f.path);
    CHECK(ts.length() == 2);
    CHECK(ts.channels() == 2);
    CHECK(ts.values(1, 1) == 20.0);
    REQUIRE(ts.has_labels());
    CHECK((*ts.labels)[1] == 1);

    TempFile flat(R"({"values": [1, 2, 3]})", ".json");
    CHECK(load_json(flat.path).length() == 3);
}

TEST_CASE("write_csv/load_csv round-trip is bit-exact") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    TimeSeries ts;
    ts.values.resize(20, 3);
    for (Eigen::Index t = 0; t < 20; ++t) {
        for (Eigen::Index c = 0; c < 3; ++c) ts.values(t, c) = gauss(rng) * 1e3;
    }
    ts.labels = LabelVector(20, 0);
    (*ts.labels)[5] = 1;

    TempFile f("");
    write_csv(f.path, ts);
    CsvSchema schema;
    schema.label_column = "label";
    TimeSeries back = load_csv(f.path, schema);
    CHECK(back.values == ts.values);
    CHECK(*back.labels == *ts.labels);
}

TEST_CASE("preprocess examples") {
    SUBCASE("min-max, diff 0") {
        TimeSeries ts = make_series({0, 5, 10});
        TimeSeries out = preprocess(ts, {Scaling::MinMax, 0});
        CHECK(out.values(0, 0) == doctest::Approx(0.0));
        CHECK(out.values(1, 0) == doctest::Approx(0.5));
        CHECK(out.values(2, 0) == doctest::Approx(1.0));
    }
    SUBCASE("none, diff 1") {
        TimeSeries ts = make_series({1, 3, 6});
        TimeSeries out = preprocess(ts, {Scaling::None, 1});
        REQUIRE(out.length() == 2);
        CHECK(out.values(0, 0) == 2.0);
        CHECK(out.values(1, 0) == 3.0);
    }
    SUBCASE("standard uses population variance") {
        TimeSeries ts = make_series({2, 4});
        TimeSeries out = preprocess(ts, {Scaling::Standard, 0});
        CHECK(out.values(0, 0) == doctest::Approx(-1.0));
        CHECK(out.values(1, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("preprocess error cases") {
    TimeSeries ts = make_series({1, 2, 3});
    CHECK_THROWS_AS(preprocess(ts, {Scaling::None, 3}), std::invalid_argument);

    TimeSeries wide;
    wide.values = Matrix::Zero(3, 2);
    CHECK_THROWS_WITH_AS(preprocess(ts, {Scaling::None, 0}, &wide),
                         doctest::Contains("channel"), std::invalid_argument);
}

TEST_CASE("preprocess labels truncate with differencing") {
    TimeSeries ts = make_series({1, 2, 4, 8});
    ts.labels = LabelVector{1, 0, 1, 0};
    TimeSeries out = preprocess(ts, {Scaling::None, 1});
    REQUIRE(out.has_labels());
    CHECK(*out.labels == LabelVector{0, 1, 0});
}

TEST_CASE("preprocess with stats_from scales the test set on the train scale") {
    TimeSeries train = make_series({0, 10});
    TimeSeries test = make_series({5, 20});
    TimeSeries out = preprocess(test, {Scaling::MinMax, 0}, &train);
    CHECK(out.values(0, 0) == doctest::Approx(0.5));
    CHECK(out.values(1, 0) == doctest::Approx(2.0));  // beyond train range
}

TEST_CASE("constant channel under min-max maps to zeros") {
    TimeSeries ts = make_series({3, 3, 3});
    TimeSeries out = preprocess(ts, {Scaling::MinMax, 0});
    CHECK(out.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("preprocess identity and range properties") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index T = 5 + static_cast<Eigen::Index>(rng() % 60);
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 4);
        TimeSeries ts;
        ts.values.resize(T, d);
        for (Eigen::Index t = 0; t < T; ++t) {
            for (Eigen::Index c = 0; c < d; ++c) ts.values(t, c) = gauss(rng) * 10;
        }

        TimeSeries id = preprocess(ts, {Scaling::None, 0});
        CHECK(id.values == ts.values);

        TimeSeries mm = preprocess(ts, {Scaling::MinMax, 0});
        CHECK(mm.values.minCoeff() >= -1e-15);
        CHECK(mm.values.maxCoeff() <= 1.0 + 1e-15);
    }
}

TEST_CASE("diff then undiff recovers the series") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss;
    for (int order = 1; order <= 2; ++order) {
        TimeSeries ts;
        ts.values.resize(40, 2);
        for (Eigen::Index t = 0; t < 40; ++t) {
            for (Eigen::Index c = 0; c < 2; ++c) ts.values(t, c) = gauss(rng) * 5;
        }
        TimeSeries diffed = preprocess(ts, {Scaling::None, order});
        Matrix rec = undifference(diffed.values, ts.values.topRows(order));
        CHECK((rec - ts.values).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("train_test_split") {
    TimeSeries ts = make_series({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    ts.labels = LabelVector{0, 0, 0, 1, 0, 0, 1, 0, 0, 0};

    SUBCASE("fraction 0.5") {
        auto [head, tail] = train_test_split_fraction(ts, 0.5);
        CHECK(head.length() == 5);
        CHECK(tail.length() == 5);
    }
    SUBCASE("index 7") {
        auto [head, tail] = train_test_split(ts, 7);
        CHECK(head.length() == 7);
        CHECK(tail.length() == 3);
        CHECK((*head.labels)[6] == 1);
        CHECK(tail.values(0, 0) == 7.0);
    }
    SUBCASE("fraction 1.0 is out of range") {
        CHECK_THROWS_WITH_AS(train_test_split_fraction(ts, 1.0),
                             doctest::Contains("boundary out of range"),
                             std::invalid_argument);
    }
    SUBCASE("concatenation reproduces the original exactly") {
        for (Eigen::Index b = 1; b < ts.length(); ++b) {
            auto [head, tail] = train_test_split(ts, b);
            Matrix cat(ts.length(), 1);
            cat.topRows(head.length()) = head.values;
            cat.bottomRows(tail.length()) = tail.values;
            CHECK(cat == ts.values);
            LabelVector lcat = *head.labels;
            lcat.insert(lcat.end(), tail.labels->begin(), tail.labels->end());
            CHECK(lcat == *ts.labels);
        }
    }
}

TEST_CASE("TimeSeries validation") {
    TimeSeries empty;
    empty.values.resize(0, 1);
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);

    TimeSeries bad = make_series({1, 2});
    bad.labels = LabelVector{1};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    TimeSeries nan = make_series({1, std::numeric_limits<double>::quiet_NaN()});
    CHECK_THROWS_AS(nan.validate(), std::invalid_argument);
}
