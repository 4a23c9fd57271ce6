#include "tsad/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tsad {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct IniSection {
    std::string kind;  // first word of the header
    std::string name;  // remainder (may be empty)
    std::map<std::string, std::string> entries;
};

std::vector<IniSection> parse_ini(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config: " + path.string());
    }
    std::vector<IniSection> sections;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": unterminated section header");
            }
            std::string header = trim(line.substr(1, line.size() - 2));
            IniSection sec;
            auto space = header.find_first_of(" \t");
            if (space == std::string::npos) {
                sec.kind = header;
            } else {
                sec.kind = header.substr(0, space);
                sec.name = trim(header.substr(space + 1));
            }
            sections.push_back(std::move(sec));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos || sections.empty()) {
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected 'key = value' inside a section");
        }
        sections.back().entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return sections;
}

DetectorConfig parse_detector(const IniSection& sec) {
    DetectorConfig cfg;
    for (const auto& [key, value] : sec.entries) {
        if (key == "p" || key == "window") {
            cfg.p = std::stoi(value);
        } else if (key == "lambda") {
            cfg.lambda = std::stod(value);
        } else if (key == "rank") {
            cfg.rank = std::stoi(value);
        } else if (key == "scaling") {
            cfg.preprocess.scaling = scaling_from_string(value);
        } else if (key == "diff") {
            cfg.preprocess.difference_order = std::stoi(value);
        } else if (key == "contiguous") {
            cfg.contiguous_train_test = value == "true" || value == "1";
        } else {
            throw std::runtime_error("unknown detector key '" + key + "'");
        }
    }
    if (cfg.p < 1) {
        throw std::runtime_error("detector '" + sec.name + "' needs p >= 1");
    }
    return cfg;
}

}  // namespace

void BenchConfig::validate() const {
    if (datasets.empty()) {
        throw std::runtime_error("config needs at least one dataset");
    }
    if (methods.empty()) {
        throw std::runtime_error("config needs at least one detector");
    }
    if (metrics.empty()) {
        throw std::runtime_error("config needs at least one metric");
    }
    for (const auto& ds : datasets) {
        for (const auto& p : {ds.train_path, ds.test_path}) {
            if (!std::filesystem::exists(p)) {
                throw std::runtime_error("dataset '" + ds.name + "': missing file " +
                                         p.string());
            }
        }
    }
}

BenchConfig BenchConfig::load(const std::filesystem::path& path) {
    const auto base = std::filesystem::absolute(path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    BenchConfig cfg;
    cfg.metrics = {{MetricKind::PointAdjustedF1, std::nullopt, "F1"}};  // default

    for (const auto& sec : parse_ini(path)) {
        if (sec.kind == "dataset") {
            DatasetEntry ds;
            ds.name = sec.name;
            for (const auto& [key, value] : sec.entries) {
                if (key == "train") {
                    ds.train_path = resolve(value);
                } else if (key == "test") {
                    ds.test_path = resolve(value);
                } else if (key == "values") {
                    ds.schema.value_columns = split_list(value);
                } else if (key == "label") {
                    ds.schema.label_column = value;
                } else if (key == "impute") {
                    if (value == "ffill") {
                        ds.schema.nan_policy = NanPolicy::ForwardFill;
                    } else if (value != "reject") {
                        throw std::runtime_error("unknown impute policy '" + value + "'");
                    }
                } else {
                    throw std::runtime_error("unknown dataset key '" + key + "'");
                }
            }
            if (ds.name.empty() || ds.train_path.empty() || ds.test_path.empty()) {
                throw std::runtime_error("dataset section needs a name, train and test");
            }
            cfg.datasets.push_back(std::move(ds));
        } else if (sec.kind == "detector") {
            if (sec.name.empty()) {
                throw std::runtime_error("detector section needs a name");
            }
            cfg.methods.push_back({sec.name, parse_detector(sec)});
        } else if (sec.kind == "metrics") {
            auto it = sec.entries.find("list");
            if (it != sec.entries.end()) {
                cfg.metrics.clear();
                for (const auto& label : split_list(it->second)) {
                    auto [kind, k] = metric_from_label(label);
                    cfg.metrics.push_back({kind, k, label});
                }
            }
        } else if (sec.kind == "output") {
            for (const auto& [key, value] : sec.entries) {
                if (key == "dir") {
                    cfg.output_dir = resolve(value);
                } else if (key == "parallelism") {
                    cfg.parallelism = std::max(1, std::stoi(value));
                } else {
                    throw std::runtime_error("unknown output key '" + key + "'");
                }
            }
        } else {
            throw std::runtime_error("unknown section kind '" + sec.kind + "'");
        }
    }
    cfg.validate();
    return cfg;
}

bool BenchReport::any_failures() const {
    for (const auto& row : cells) {
        for (const auto& cell : row) {
            if (cell.failed()) return true;
        }
    }
    return false;
}

nlohmann::json BenchReport::to_json() const {
    nlohmann::json cells_json = nlohmann::json::array();
    for (std::size_t di = 0; di < cells.size(); ++di) {
        for (std::size_t mi = 0; mi < cells[di].size(); ++mi) {
            const auto& cell = cells[di][mi];
            nlohmann::json c{{"dataset", datasets[di]},
                             {"method", methods[mi]},
                             {"wall_seconds", cell.wall_seconds},
                             {"model_bytes", cell.model_bytes}};
            if (cell.error) {
                c["error"] = *cell.error;
            } else {
                nlohmann::json m = nlohmann::json::object();
                for (const auto& [label, result] : cell.metrics) {
                    m[label] = tsad::to_json(result);
                }
                c["metrics"] = std::move(m);
            }
            cells_json.push_back(std::move(c));
        }
    }
    nlohmann::json ranks = nlohmann::json::object();
    for (const auto& [label, values] : average_ranks) {
        ranks[label] = values;
    }
    return nlohmann::json{{"datasets", datasets},
                          {"methods", methods},
                          {"metrics", metric_labels},
                          {"cells", std::move(cells_json)},
                          {"average_ranks", std::move(ranks)}};
}

BenchReport BenchReport::from_json(const nlohmann::json& j) {
    BenchReport r;
    r.datasets = j.at("datasets").get<std::vector<std::string>>();
    r.methods = j.at("methods").get<std::vector<std::string>>();
    r.metric_labels = j.at("metrics").get<std::vector<std::string>>();
    r.cells.assign(r.datasets.size(), std::vector<CellResult>(r.methods.size()));
    auto index_of = [](const std::vector<std::string>& v, const std::string& s) {
        auto it = std::find(v.begin(), v.end(), s);
        if (it == v.end()) throw std::runtime_error("report JSON: unknown name " + s);
        return static_cast<std::size_t>(it - v.begin());
    };
    for (const auto& c : j.at("cells")) {
        auto& cell = r.cells[index_of(r.datasets, c.at("dataset"))]
                            [index_of(r.methods, c.at("method"))];
        cell.wall_seconds = c.at("wall_seconds").get<double>();
        cell.model_bytes = c.at("model_bytes").get<std::size_t>();
        if (c.contains("error")) {
            cell.error = c.at("error").get<std::string>();
        } else {
            for (const auto& [label, rj] : c.at("metrics").items()) {
                EvalResult res;
                auto [kind, k] = metric_from_label(rj.at("metric").get<std::string>());
                res.kind = kind;
                res.k = k;
                res.precision = rj.at("precision").get<double>();
                res.recall = rj.at("recall").get<double>();
                res.f1 = rj.at("f1").get<double>();
                const auto& thr = rj.at("threshold");
                res.threshold = thr.is_string()
                                    ? (thr.get<std::string>() == "-Infinity"
                                           ? -std::numeric_limits<double>::infinity()
                                           : std::numeric_limits<double>::infinity())
                                    : thr.get<double>();
                cell.metrics[label] = res;
            }
        }
    }
    if (j.contains("average_ranks")) {
        for (const auto& [label, values] : j.at("average_ranks").items()) {
            r.average_ranks[label] = values.get<std::vector<double>>();
        }
    }
    return r;
}

Efficiency measure_efficiency(const TimeSeries& train, const TimeSeries& test,
                              const DetectorConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    auto [model, scores] = fit_detect(train, test, config);
    const auto stop = std::chrono::steady_clock::now();
    Efficiency eff;
    eff.wall_seconds = std::chrono::duration<double>(stop - start).count();
    eff.model_bytes = model_to_json(model).dump().size();
    return eff;
}

namespace {

struct SeriesEval {
    std::map<std::string, EvalResult> metrics;
    double wall_seconds = 0.0;
    std::size_t model_bytes = 0;
};

SeriesEval run_series(const TimeSeries& train, const TimeSeries& test,
                      const MethodEntry& method, const std::vector<MetricSpec>& metrics) {
    if (!test.has_labels()) {
        throw std::runtime_error("test set has no labels to evaluate against");
    }
    SeriesEval out;
    const auto start = std::chrono::steady_clock::now();
    auto [model, scores] = fit_detect(train, test, method.config);
    const auto stop = std::chrono::steady_clock::now();
    out.wall_seconds = std::chrono::duration<double>(stop - start).count();
    out.model_bytes = model_to_json(model).dump().size();

    // Scores align to the differenced test series; labels follow suit.
    const auto order =
        static_cast<std::size_t>(method.config.preprocess.difference_order);
    const LabelVector labels(test.labels->begin() + order, test.labels->end());
    for (const auto& spec : metrics) {
        out.metrics[spec.label] = best_f1_sweep(scores, labels, spec.kind, spec.k);
    }
    return out;
}

CellResult run_cell(const DatasetEntry& ds, const MethodEntry& method,
                    const std::vector<MetricSpec>& metrics) {
    CellResult cell;
    try {
        if (std::filesystem::is_directory(ds.train_path)) {
            // A collection: one model per sequence, paired by filename, with
            // macro-averaged metrics. Per-series thresholds are not
            // comparable, so the aggregate threshold is reported as 0.
            if (!std::filesystem::is_directory(ds.test_path)) {
                throw std::runtime_error("train is a directory but test is not");
            }
            std::vector<std::filesystem::path> files;
            for (const auto& entry : std::filesystem::directory_iterator(ds.train_path)) {
                if (entry.path().extension() == ".csv") files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end());
            if (files.empty()) {
                throw std::runtime_error("no .csv series in " + ds.train_path.string());
            }
            std::size_t count = 0;
            for (const auto& train_file : files) {
                const auto test_file = ds.test_path / train_file.filename();
                if (!std::filesystem::exists(test_file)) {
                    throw std::runtime_error("missing test series " + test_file.string());
                }
                const SeriesEval eval =
                    run_series(load_csv(train_file, ds.schema),
                               load_csv(test_file, ds.schema), method, metrics);
                cell.wall_seconds += eval.wall_seconds;
                cell.model_bytes += eval.model_bytes;
                for (const auto& spec : metrics) {
                    const EvalResult& r = eval.metrics.at(spec.label);
                    EvalResult& agg = cell.metrics[spec.label];
                    agg.kind = r.kind;
                    agg.k = r.k;
                    agg.precision += r.precision;
                    agg.recall += r.recall;
                    agg.f1 += r.f1;
                }
                ++count;
            }
            for (auto& [label, agg] : cell.metrics) {
                agg.precision /= static_cast<double>(count);
                agg.recall /= static_cast<double>(count);
                agg.f1 /= static_cast<double>(count);
                agg.threshold = 0.0;
            }
        } else {
            const SeriesEval eval = run_series(load_csv(ds.train_path, ds.schema),
                                               load_csv(ds.test_path, ds.schema),
                                               method, metrics);
            cell.metrics = eval.metrics;
            cell.wall_seconds = eval.wall_seconds;
            cell.model_bytes = eval.model_bytes;
        }
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

std::vector<double> average_rank(const BenchReport& report,
                                 const std::string& metric_label) {
    const std::size_t m = report.methods.size();
    std::vector<double> sums(m, 0.0);
    for (std::size_t di = 0; di < report.datasets.size(); ++di) {
        std::vector<double> values(m);
        for (std::size_t mi = 0; mi < m; ++mi) {
            const auto& cell = report.cells[di][mi];
            auto it = cell.metrics.find(metric_label);
            if (cell.failed() || it == cell.metrics.end()) {
                throw std::runtime_error("average_rank: missing cell for dataset '" +
                                         report.datasets[di] + "', method '" +
                                         report.methods[mi] + "'");
            }
            values[mi] = it->second.f1;
        }
        // Rank 1 = best (highest value); ties share the average rank.
        for (std::size_t mi = 0; mi < m; ++mi) {
            double higher = 0, equal = 0;
            for (std::size_t mj = 0; mj < m; ++mj) {
                if (values[mj] > values[mi]) ++higher;
                if (values[mj] == values[mi]) ++equal;
            }
            sums[mi] += higher + (equal + 1.0) / 2.0;
        }
    }
    std::vector<double> out(m);
    for (std::size_t mi = 0; mi < m; ++mi) {
        out[mi] = sums[mi] / static_cast<double>(report.datasets.size());
    }
    return out;
}

BenchReport run_benchmark(const BenchConfig& config) {
    config.validate();
    BenchReport report;
    for (const auto& ds : config.datasets) report.datasets.push_back(ds.name);
    for (const auto& me : config.methods) report.methods.push_back(me.name);
    for (const auto& sp : config.metrics) report.metric_labels.push_back(sp.label);
    report.cells.assign(config.datasets.size(),
                        std::vector<CellResult>(config.methods.size()));

    // Worker pool over independent (dataset, method) cells; each cell writes
    // only its own slot, so the merge is an ordered no-op.
    const std::size_t total = config.datasets.size() * config.methods.size();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1)) {
            const std::size_t di = idx / config.methods.size();
            const std::size_t mi = idx % config.methods.size();
            report.cells[di][mi] =
                run_cell(config.datasets[di], config.methods[mi], config.metrics);
        }
    };
    const int threads = std::clamp<int>(config.parallelism, 1, static_cast<int>(total));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (const auto& spec : config.metrics) {
        try {
            report.average_ranks[spec.label] = average_rank(report, spec.label);
        } catch (const std::exception&) {
            // Partial failures leave this metric without ranks.
        }
    }
    return report;
}

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

std::string render_markdown(const BenchReport& report) {
    std::ostringstream out;
    out << "| Method |";
    for (const auto& ds : report.datasets) {
        out << ' ' << ds << " (";
        for (std::size_t i = 0; i < report.metric_labels.size(); ++i) {
            if (i) out << " / ";
            out << report.metric_labels[i];
        }
        out << ") |";
    }
    out << " Average Rank (";
    for (std::size_t i = 0; i < report.metric_labels.size(); ++i) {
        if (i) out << " / ";
        out << report.metric_labels[i];
    }
    out << ") |\n|";
    for (std::size_t i = 0; i < report.datasets.size() + 2; ++i) out << "---|";
    out << '\n';

    for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
        out << "| " << report.methods[mi] << " |";
        for (std::size_t di = 0; di < report.datasets.size(); ++di) {
            const auto& cell = report.cells[di][mi];
            out << ' ';
            if (cell.failed()) {
                out << "error";
            } else {
                for (std::size_t k = 0; k < report.metric_labels.size(); ++k) {
                    if (k) out << " / ";
                    out << format_value(cell.metrics.at(report.metric_labels[k]).f1);
                }
            }
            out << " |";
        }
        out << ' ';
        for (std::size_t k = 0; k < report.metric_labels.size(); ++k) {
            if (k) out << " / ";
            auto it = report.average_ranks.find(report.metric_labels[k]);
            if (it == report.average_ranks.end()) {
                out << "-";
            } else {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.2f", it->second[mi]);
                out << buf;
            }
        }
        out << " |\n";
    }
    return out.str();
}

std::string render_csv(const BenchReport& report) {
    std::ostringstream out;
    out << "dataset,method";
    for (const auto& label : report.metric_labels) {
        out << ',' << label << "_precision," << label << "_recall," << label << "_f1,"
            << label << "_threshold";
    }
    out << ",wall_seconds,model_bytes,error\n";
    out.precision(17);
    for (std::size_t di = 0; di < report.datasets.size(); ++di) {
        for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
            const auto& cell = report.cells[di][mi];
            out << report.datasets[di] << ',' << report.methods[mi];
            for (const auto& label : report.metric_labels) {
                if (cell.failed()) {
                    out << ",,,,";
                } else {
                    const auto& r = cell.metrics.at(label);
                    out << ',' << r.precision << ',' << r.recall << ',' << r.f1 << ','
                        << r.threshold;
                }
            }
            out << ',' << cell.wall_seconds << ',' << cell.model_bytes << ','
                << (cell.error ? *cell.error : std::string()) << '\n';
        }
    }
    return out.str();
}

}  // namespace tsad
