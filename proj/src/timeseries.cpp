#include "tsad/timeseries.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tsad {

void TimeSeries::validate() const {
    if (values.rows() < 1 || values.cols() < 1) {
        throw std::invalid_argument("TimeSeries: values must be at least 1x1");
    }
    if (!values.allFinite()) {
        throw std::invalid_argument("TimeSeries: non-finite value");
    }
    if (labels) {
        if (static_cast<Eigen::Index>(labels->size()) != values.rows()) {
            throw std::invalid_argument("TimeSeries: label length mismatch");
        }
        for (auto v : *labels) {
            if (v != 0 && v != 1) {
                throw std::invalid_argument("TimeSeries: label outside {0,1}");
            }
        }
    }
}

Scaling scaling_from_string(const std::string& s) {
    if (s == "none") return Scaling::None;
    if (s == "min-max" || s == "minmax") return Scaling::MinMax;
    if (s == "standard") return Scaling::Standard;
    throw std::invalid_argument("unknown scaling '" + s + "'");
}

std::string to_string(Scaling s) {
    switch (s) {
        case Scaling::None: return "none";
        case Scaling::MinMax: return "min-max";
        case Scaling::Standard: return "standard";
    }
    throw std::logic_error("unreachable");
}

namespace {

std::vector<std::string> split_line(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, sep)) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

bool is_missing(const std::string& cell) {
    if (cell.empty()) return true;
    std::string low = cell;
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return low == "nan" || low == "na" || low == "null";
}

double parse_numeric(const std::string& cell, std::size_t row, const std::string& col) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != cell.size()) {
        throw std::runtime_error("non-numeric cell '" + cell + "' in column '" + col +
                                 "', row " + std::to_string(row));
    }
    return v;
}

std::uint8_t parse_label(double v, std::size_t row) {
    if (v == 0.0) return 0;
    if (v == 1.0) return 1;
    throw std::runtime_error("label outside {0,1} at row " + std::to_string(row));
}

void apply_nan_policy(Matrix& values, NanPolicy policy) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        for (Eigen::Index t = 0; t < values.rows(); ++t) {
            if (std::isfinite(values(t, c))) continue;
            if (policy == NanPolicy::Reject) {
                throw std::runtime_error("missing value at row " + std::to_string(t) +
                                         ", channel " + std::to_string(c) +
                                         " (rerun with forward-fill imputation to repair)");
            }
            if (t == 0) {
                throw std::runtime_error("missing value at row 0 cannot be forward-filled");
            }
            values(t, c) = values(t - 1, c);
        }
    }
}

}  // namespace

TimeSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty file: " + path.string());
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);  // UTF-8 BOM
    }
    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trim(h);

    auto column_index = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw std::runtime_error("column '" + name + "' not found in " + path.string());
        }
        return static_cast<std::size_t>(it - header.begin());
    };

    std::optional<std::size_t> label_idx;
    if (schema.label_column) {
        label_idx = column_index(*schema.label_column);
    }
    std::vector<std::size_t> value_idx;
    std::vector<std::string> value_names;
    if (schema.value_columns.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (label_idx && i == *label_idx) continue;
            value_idx.push_back(i);
            value_names.push_back(header[i]);
        }
    } else {
        for (const auto& name : schema.value_columns) {
            value_idx.push_back(column_index(name));
            value_names.push_back(name);
        }
    }
    if (value_idx.empty()) {
        throw std::runtime_error("no value columns in " + path.string());
    }

    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> labels;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("ragged row " + std::to_string(row_no) + " in " +
                                     path.string() + ": expected " +
                                     std::to_string(header.size()) + " cells, got " +
                                     std::to_string(cells.size()));
        }
        std::vector<double> row(value_idx.size());
        for (std::size_t j = 0; j < value_idx.size(); ++j) {
            std::string cell = trim(cells[value_idx[j]]);
            row[j] = is_missing(cell) ? std::numeric_limits<double>::quiet_NaN()
                                      : parse_numeric(cell, row_no, value_names[j]);
        }
        rows.push_back(std::move(row));
        if (label_idx) {
            std::string cell = trim(cells[*label_idx]);
            labels.push_back(parse_label(
                parse_numeric(cell, row_no, *schema.label_column), row_no));
        }
        ++row_no;
    }
    if (rows.empty()) {
        throw std::runtime_error("no data rows in " + path.string());
    }

    TimeSeries ts;
    ts.name = path.stem().string();
    ts.values.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(value_idx.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t j = 0; j < value_idx.size(); ++j) {
            ts.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
        }
    }
    apply_nan_policy(ts.values, schema.nan_policy);
    if (label_idx) {
        ts.labels = std::move(labels);
    }
    ts.validate();
    return ts;
}

TimeSeries load_json(const std::filesystem::path& path, NanPolicy nan_policy) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid JSON in " + path.string() + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("values") || !j["values"].is_array() ||
        j["values"].empty()) {
        throw std::runtime_error("expected object with non-empty 'values' array in " +
                                 path.string());
    }
    const auto& rows = j["values"];
    std::size_t d = rows.front().is_array() ? rows.front().size() : 1;
    TimeSeries ts;
    ts.name = path.stem().string();
    ts.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        const auto& row = rows[t];
        if (row.is_array()) {
            if (row.size() != d) {
                throw std::runtime_error("ragged row " + std::to_string(t) + " in " +
                                         path.string());
            }
            for (std::size_t c = 0; c < d; ++c) {
                ts.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) =
                    row[c].is_null() ? std::numeric_limits<double>::quiet_NaN()
                                     : row[c].get<double>();
            }
        } else if (d == 1) {
            ts.values(static_cast<Eigen::Index>(t), 0) =
                row.is_null() ? std::numeric_limits<double>::quiet_NaN() : row.get<double>();
        } else {
            throw std::runtime_error("ragged row " + std::to_string(t) + " in " + path.string());
        }
    }
    apply_nan_policy(ts.values, nan_policy);
    if (j.contains("labels")) {
        LabelVector labels;
        for (const auto& v : j["labels"]) {
            labels.push_back(parse_label(v.get<double>(), labels.size()));
        }
        ts.labels = std::move(labels);
    }
    ts.validate();
    return ts;
}

void write_csv(const std::filesystem::path& path, const TimeSeries& ts) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path.string());
    }
    out.precision(17);
    for (Eigen::Index c = 0; c < ts.channels(); ++c) {
        if (c > 0) out << ',';
        out << 'v' << (c + 1);
    }
    if (ts.has_labels()) out << ",label";
    out << '\n';
    for (Eigen::Index t = 0; t < ts.length(); ++t) {
        for (Eigen::Index c = 0; c < ts.channels(); ++c) {
            if (c > 0) out << ',';
            out << ts.values(t, c);
        }
        if (ts.has_labels()) out << ',' << static_cast<int>((*ts.labels)[t]);
        out << '\n';
    }
}

namespace {

Matrix difference(const Matrix& values, int order) {
    Matrix out = values;
    for (int k = 0; k < order; ++k) {
        out = (out.bottomRows(out.rows() - 1) - out.topRows(out.rows() - 1)).eval();
    }
    return out;
}

struct ChannelStats {
    Eigen::RowVectorXd lo, hi;      // min-max
    Eigen::RowVectorXd mean, sdev;  // standard
};

ChannelStats fit_stats(const Matrix& values, Scaling scaling) {
    ChannelStats s;
    if (scaling == Scaling::MinMax) {
        s.lo = values.colwise().minCoeff();
        s.hi = values.colwise().maxCoeff();
    } else if (scaling == Scaling::Standard) {
        s.mean = values.colwise().mean();
        const auto n = static_cast<double>(values.rows());
        s.sdev = ((values.rowwise() - s.mean).array().square().colwise().sum() / n).sqrt();
    }
    return s;
}

void apply_scaling(Matrix& values, Scaling scaling, const ChannelStats& s) {
    if (scaling == Scaling::None) return;
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        if (scaling == Scaling::MinMax) {
            double range = s.hi[c] - s.lo[c];
            if (range == 0.0) range = 1.0;  // constant channel maps to zeros
            values.col(c) = (values.col(c).array() - s.lo[c]) / range;
        } else {
            double sd = s.sdev[c];
            if (sd == 0.0) sd = 1.0;
            values.col(c) = (values.col(c).array() - s.mean[c]) / sd;
        }
    }
}

}  // namespace

TimeSeries preprocess(const TimeSeries& ts, const PreprocessSpec& spec,
                      const TimeSeries* stats_from) {
    ts.validate();
    if (spec.difference_order < 0) {
        throw std::invalid_argument("difference_order must be >= 0");
    }
    if (spec.difference_order >= ts.length()) {
        throw std::invalid_argument("difference_order >= series length");
    }
    if (stats_from) {
        if (stats_from->channels() != ts.channels()) {
            throw std::invalid_argument("stats_from channel count mismatch");
        }
        if (spec.difference_order >= stats_from->length()) {
            throw std::invalid_argument("difference_order >= stats_from length");
        }
    }

    TimeSeries out;
    out.name = ts.name;
    out.values = difference(ts.values, spec.difference_order);
    if (ts.labels) {
        out.labels = LabelVector(ts.labels->begin() + spec.difference_order, ts.labels->end());
    }

    if (spec.scaling != Scaling::None) {
        ChannelStats stats =
            stats_from ? fit_stats(difference(stats_from->values, spec.difference_order),
                                   spec.scaling)
                       : fit_stats(out.values, spec.scaling);
        apply_scaling(out.values, spec.scaling, stats);
    }
    return out;
}

Matrix undifference(const Matrix& diffed, const Matrix& anchors) {
    if (anchors.cols() != diffed.cols()) {
        throw std::invalid_argument("undifference: channel count mismatch");
    }
    const int order = static_cast<int>(anchors.rows());
    Matrix cur = diffed;
    for (int k = order - 1; k >= 0; --k) {
        // The anchor rows of stage k are the first differences of the deeper
        // anchors; rebuild them on the way out.
        Matrix stage(cur.rows() + 1, cur.cols());
        stage.row(0) = difference(anchors.topRows(k + 1), k).row(0);
        for (Eigen::Index t = 0; t < cur.rows(); ++t) {
            stage.row(t + 1) = stage.row(t) + cur.row(t);
        }
        cur = std::move(stage);
    }
    return cur;
}

std::pair<TimeSeries, TimeSeries> train_test_split(const TimeSeries& ts,
                                                   Eigen::Index boundary) {
    ts.validate();
    if (boundary <= 0 || boundary >= ts.length()) {
        throw std::invalid_argument("boundary out of range");
    }
    TimeSeries head, tail;
    head.name = ts.name;
    tail.name = ts.name;
    head.values = ts.values.topRows(boundary);
    tail.values = ts.values.bottomRows(ts.length() - boundary);
    if (ts.labels) {
        head.labels = LabelVector(ts.labels->begin(), ts.labels->begin() + boundary);
        tail.labels = LabelVector(ts.labels->begin() + boundary, ts.labels->end());
    }
    return {std::move(head), std::move(tail)};
}

std::pair<TimeSeries, TimeSeries> train_test_split_fraction(const TimeSeries& ts,
                                                            double fraction) {
    const auto boundary =
        static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(ts.length())));
    if (boundary <= 0 || boundary >= ts.length()) {
        throw std::invalid_argument("boundary out of range");
    }
    return train_test_split(ts, boundary);
}

}  // namespace tsad
