#include "tsad/bench.hpp"
#include "tsad/detector.hpp"
#include "tsad/metrics.hpp"
#include "tsad/synthgen.hpp"
#include "tsad/timeseries.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

tsad::SinusoidComponent parse_component(const std::string& s) {
    tsad::SinusoidComponent c;
    std::stringstream ss(s);
    std::string part;
    std::vector<double> vals;
    while (std::getline(ss, part, ':')) vals.push_back(std::stod(part));
    if (vals.empty() || vals.size() > 3) {
        throw CLI::ValidationError("--component expects amplitude:period[:phase]");
    }
    c.amplitude = vals[0];
    if (vals.size() > 1) c.period = vals[1];
    if (vals.size() > 2) c.phase = vals[2];
    return c;
}

tsad::AnomalySpec parse_anomaly(const std::string& s) {
    auto first = s.find(':');
    if (first == std::string::npos) {
        throw CLI::ValidationError("--anomaly expects kind:start:duration:magnitude");
    }
    tsad::AnomalySpec spec;
    spec.kind = tsad::anomaly_kind_from_string(s.substr(0, first));
    std::stringstream ss(s.substr(first + 1));
    std::string part;
    std::vector<double> vals;
    while (std::getline(ss, part, ':')) vals.push_back(std::stod(part));
    if (vals.size() != 3) {
        throw CLI::ValidationError("--anomaly expects kind:start:duration:magnitude");
    }
    spec.start = static_cast<Eigen::Index>(vals[0]);
    spec.duration = static_cast<Eigen::Index>(vals[1]);
    spec.magnitude = vals[2];
    return spec;
}

struct SchemaFlags {
    std::string values;
    std::string label;
    std::string impute = "reject";

    tsad::CsvSchema schema() const {
        tsad::CsvSchema s;
        if (!values.empty()) {
            std::stringstream ss(values);
            std::string col;
            while (std::getline(ss, col, ',')) {
                if (!col.empty()) s.value_columns.push_back(col);
            }
        }
        if (!label.empty()) s.label_column = label;
        if (impute == "ffill") {
            s.nan_policy = tsad::NanPolicy::ForwardFill;
        } else if (impute != "reject") {
            throw CLI::ValidationError("--impute must be reject or ffill");
        }
        return s;
    }

    void add_to(CLI::App* cmd) {
        cmd->add_option("--values", values, "Comma-separated value column names");
        cmd->add_option("--label", label, "Label column name");
        cmd->add_option("--impute", impute, "Missing-value policy: reject|ffill");
    }
};

struct PreprocessFlags {
    std::string scaling = "none";
    int diff = 0;

    tsad::PreprocessSpec spec() const {
        tsad::PreprocessSpec s;
        s.scaling = tsad::scaling_from_string(scaling);
        s.difference_order = diff;
        return s;
    }

    void add_to(CLI::App* cmd) {
        cmd->add_option("--scaling", scaling, "none|min-max|standard");
        cmd->add_option("--diff", diff, "Difference order (0 or 1 typical)");
    }
};

// Reads a score CSV produced by `tsad score` (index,score[,label]).
std::pair<tsad::ScoreSeries, std::optional<tsad::LabelVector>> read_score_csv(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty score file");
    const bool has_label = line.find("label") != std::string::npos;
    std::vector<double> scores;
    tsad::LabelVector labels;
    Eigen::Index valid_from = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string idx, score, label;
        std::getline(ss, idx, ',');
        std::getline(ss, score, ',');
        if (has_label) std::getline(ss, label, ',');
        if (score.empty()) {
            if (valid_from >= 0) {
                throw std::runtime_error("unscored row after scored region in " +
                                         path.string());
            }
            scores.push_back(tsad::ScoreSeries::unscored());
        } else {
            if (valid_from < 0) valid_from = static_cast<Eigen::Index>(scores.size());
            scores.push_back(std::stod(score));
        }
        if (has_label) labels.push_back(static_cast<std::uint8_t>(std::stoi(label)));
    }
    if (valid_from < 0) throw std::runtime_error("no scored rows in " + path.string());
    tsad::ScoreSeries s;
    s.scores = Eigen::Map<tsad::Vector>(scores.data(), static_cast<Eigen::Index>(scores.size()));
    s.valid_from = valid_from;
    if (has_label) return {std::move(s), std::move(labels)};
    return {std::move(s), std::nullopt};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-form linear anomaly detection for time series"};
    app.require_subcommand(1);

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic series");
    std::string synth_out;
    tsad::SynthSpec synth_spec;
    std::vector<std::string> component_args, anomaly_args;
    std::uint64_t anomaly_seed = 0;
    synth->add_option("--out", synth_out, "Output CSV path")->required();
    synth->add_option("--length", synth_spec.length, "Series length (>= 64)");
    synth->add_option("--channels", synth_spec.channels, "Channel count");
    synth->add_option("--component", component_args,
                      "Sinusoid amplitude:period[:phase] (repeatable)");
    synth->add_option("--trend", synth_spec.trend_slope, "Linear trend slope");
    synth->add_option("--noise", synth_spec.noise_sigma, "Gaussian noise sigma");
    synth->add_option("--seed", synth_spec.seed, "Base-signal seed");
    synth->add_option("--anomaly", anomaly_args,
                      "kind:start:duration:magnitude (repeatable); kinds: point-global, "
                      "point-context, pattern-shape, pattern-seasonal, pattern-trend");
    synth->add_option("--anomaly-seed", anomaly_seed, "Injection seed");

    // --- fit ---
    auto* fit = app.add_subcommand("fit", "Fit a linear model on a training series");
    std::string fit_train, fit_model;
    int fit_p = 1;
    double fit_lambda = -1.0;
    int fit_rank = 0;
    SchemaFlags fit_schema;
    PreprocessFlags fit_pre;
    fit->add_option("--train", fit_train, "Training CSV")->required();
    fit->add_option("--model", fit_model, "Output model JSON")->required();
    fit->add_option("-p,--p,--window", fit_p, "Lag order")->required();
    fit->add_option("--lambda", fit_lambda, "Ridge strength (default: scale-relative)");
    fit->add_option("--rank", fit_rank, "RRR rank (default: full rank)");
    fit_schema.add_to(fit);
    fit_pre.add_to(fit);

    // --- score ---
    auto* sc = app.add_subcommand("score", "Score a series with a fitted model");
    std::string sc_model, sc_data, sc_train, sc_out, sc_svg;
    bool sc_contiguous = false;
    SchemaFlags sc_schema;
    PreprocessFlags sc_pre;
    sc->add_option("--model", sc_model, "Model JSON")->required();
    sc->add_option("--data", sc_data, "Series CSV to score")->required();
    sc->add_option("--train", sc_train,
                   "Training CSV supplying preprocessing statistics");
    sc->add_option("--out", sc_out, "Output score CSV")->required();
    sc->add_option("--svg", sc_svg, "Optional SVG line plot");
    sc->add_flag("--contiguous", sc_contiguous,
                 "Data directly follows the training series (seeds warm-up)");
    sc_schema.add_to(sc);
    sc_pre.add_to(sc);

    // --- eval ---
    auto* ev = app.add_subcommand("eval", "Evaluate scores against labels");
    std::string ev_scores;
    std::vector<std::string> ev_metrics{"F1"};
    ev->add_option("--scores", ev_scores, "Score CSV with a label column")->required();
    ev->add_option("--metric", ev_metrics, "Metric label: F1, B-F-5, E-F-5, ... (repeatable)");

    // --- bench ---
    auto* be = app.add_subcommand("bench", "Run a benchmark config");
    std::string be_config;
    be->add_option("--config", be_config, "INI-style benchmark config")->required();

    // --- report ---
    auto* re = app.add_subcommand("report", "Render a benchmark report");
    std::string re_report, re_format = "md";
    re->add_option("--report", re_report, "report.json from a bench run")->required();
    re->add_option("--format", re_format, "md|csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            for (const auto& s : component_args) {
                synth_spec.components.push_back(parse_component(s));
            }
            if (synth_spec.components.empty()) {
                synth_spec.components.push_back({1.0, 64.0, 0.0});
            }
            tsad::TimeSeries ts = tsad::generate_base(synth_spec);
            for (const auto& s : anomaly_args) {
                ts = tsad::inject_anomaly(ts, parse_anomaly(s), anomaly_seed);
            }
            tsad::write_csv(synth_out, ts);
            std::cout << "wrote " << synth_out << " (T=" << ts.length()
                      << ", d=" << ts.channels() << ")\n";
        } else if (*fit) {
            const tsad::TimeSeries train = tsad::load_csv(fit_train, fit_schema.schema());
            const tsad::TimeSeries pre = tsad::preprocess(train, fit_pre.spec());
            const tsad::LagDataset lags = tsad::build_lag_dataset(pre, fit_p);
            const double lambda =
                fit_lambda >= 0.0 ? fit_lambda : tsad::default_ridge_lambda(lags);
            const tsad::LinearModel model = fit_rank > 0
                                                ? tsad::rrr_fit(lags, fit_rank, lambda)
                                                : tsad::ridge_fit(lags, lambda);
            tsad::save_model(fit_model, model);
            std::cout << "wrote " << fit_model << " (p=" << model.p << ", d=" << model.d
                      << ", rank=" << model.rank << ", lambda=" << model.lambda << ")\n";
        } else if (*sc) {
            const tsad::LinearModel model = tsad::load_model(sc_model);
            const tsad::TimeSeries data = tsad::load_csv(sc_data, sc_schema.schema());
            std::optional<tsad::TimeSeries> train;
            if (!sc_train.empty()) {
                train = tsad::load_csv(sc_train, sc_schema.schema());
            }
            const tsad::TimeSeries pre =
                tsad::preprocess(data, sc_pre.spec(), train ? &*train : nullptr);

            tsad::ScoreSeries scores;
            if (sc_contiguous) {
                if (!train) {
                    throw std::runtime_error("--contiguous needs --train");
                }
                tsad::TimeSeries train_pre = tsad::preprocess(*train, sc_pre.spec());
                tsad::TimeSeries extended;
                extended.values.resize(model.p + pre.length(), pre.channels());
                extended.values.topRows(model.p) = train_pre.values.bottomRows(model.p);
                extended.values.bottomRows(pre.length()) = pre.values;
                tsad::ScoreSeries ext = tsad::score(extended, model);
                scores.valid_from = 0;
                scores.scores = ext.scores.tail(pre.length());
            } else {
                scores = tsad::score(pre, model);
            }
            tsad::write_score_csv(sc_out, scores, pre.labels);
            if (!sc_svg.empty()) {
                tsad::write_score_svg(sc_svg, pre, scores);
            }
            std::cout << "wrote " << sc_out << '\n';
        } else if (*ev) {
            auto [scores, labels] = read_score_csv(ev_scores);
            if (!labels) {
                throw std::runtime_error("score file has no label column");
            }
            nlohmann::json out = nlohmann::json::array();
            for (const auto& label : ev_metrics) {
                auto [kind, k] = tsad::metric_from_label(label);
                out.push_back(tsad::to_json(tsad::best_f1_sweep(scores, *labels, kind, k)));
            }
            std::cout << out.dump(2) << '\n';
        } else if (*be) {
            const tsad::BenchConfig config = tsad::BenchConfig::load(be_config);
            const tsad::BenchReport report = tsad::run_benchmark(config);
            std::filesystem::create_directories(config.output_dir);
            {
                std::ofstream out(config.output_dir / "report.json");
                out << report.to_json().dump(2) << '\n';
            }
            {
                std::ofstream out(config.output_dir / "report.md");
                out << tsad::render_markdown(report);
            }
            {
                std::ofstream out(config.output_dir / "report.csv");
                out << tsad::render_csv(report);
            }
            std::cout << tsad::render_markdown(report);
            if (report.any_failures()) {
                std::cerr << "some cells failed; see report.json\n";
                return 2;
            }
        } else if (*re) {
            std::ifstream in(re_report);
            if (!in) throw std::runtime_error("cannot open " + re_report);
            nlohmann::json j;
            in >> j;
            const tsad::BenchReport report = tsad::BenchReport::from_json(j);
            std::cout << (re_format == "csv" ? tsad::render_csv(report)
                                             : tsad::render_markdown(report));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
