#include "tsad/detector.hpp"

#include "tsad/lagmatrix.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace tsad {

ScoreSeries score(const TimeSeries& ts, const LinearModel& model) {
    ts.validate();
    if (ts.channels() != model.d) {
        throw std::invalid_argument("score: channel count does not match model");
    }
    if (ts.length() <= model.p) {
        throw std::invalid_argument("score: series too short for lag order");
    }
    const LagDataset lags = build_lag_dataset(ts.values, model.p);
    const Matrix residual = lags.Y - lags.X * model.W;

    ScoreSeries out;
    out.valid_from = model.p;
    out.scores = Vector::Constant(ts.length(), ScoreSeries::unscored());
    out.scores.tail(residual.rows()) = residual.rowwise().squaredNorm();
    return out;
}

std::pair<LinearModel, ScoreSeries> fit_detect(const TimeSeries& train,
                                               const TimeSeries& test,
                                               const DetectorConfig& config) {
    if (train.channels() != test.channels()) {
        throw std::invalid_argument("fit_detect: train/test channel mismatch");
    }
    const TimeSeries train_pre = preprocess(train, config.preprocess);
    const TimeSeries test_pre = preprocess(test, config.preprocess, &train);

    const LagDataset lags = build_lag_dataset(train_pre.values, config.p);
    const double lambda = config.lambda.value_or(default_ridge_lambda(lags));
    const LinearModel model = config.rank ? rrr_fit(lags, *config.rank, lambda)
                                          : ridge_fit(lags, lambda);

    if (config.contiguous_train_test) {
        if (train_pre.length() < config.p) {
            throw std::invalid_argument("fit_detect: train too short to seed test windows");
        }
        TimeSeries extended;
        extended.values.resize(config.p + test_pre.length(), test_pre.channels());
        extended.values.topRows(config.p) = train_pre.values.bottomRows(config.p);
        extended.values.bottomRows(test_pre.length()) = test_pre.values;
        ScoreSeries ext = score(extended, model);
        ScoreSeries out;
        out.valid_from = 0;
        out.scores = ext.scores.tail(test_pre.length());
        return {model, std::move(out)};
    }
    return {model, score(test_pre, model)};
}

void write_score_csv(const std::filesystem::path& path, const ScoreSeries& scores,
                     const std::optional<LabelVector>& labels) {
    if (labels && static_cast<Eigen::Index>(labels->size()) != scores.length()) {
        throw std::invalid_argument("write_score_csv: label length mismatch");
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path.string());
    }
    out.precision(17);
    out << "index,score";
    if (labels) out << ",label";
    out << '\n';
    for (Eigen::Index i = 0; i < scores.length(); ++i) {
        out << i << ',';
        if (scores.scored(i)) out << scores.scores[i];
        if (labels) out << ',' << static_cast<int>((*labels)[i]);
        out << '\n';
    }
}

namespace {

void polyline(std::ofstream& out, const Vector& ys, Eigen::Index from, double x0,
              double y0, double w, double h, const char* color) {
    double lo = ys[from], hi = ys[from];
    for (Eigen::Index i = from; i < ys.size(); ++i) {
        lo = std::min(lo, ys[i]);
        hi = std::max(hi, ys[i]);
    }
    const double range = hi > lo ? hi - lo : 1.0;
    const double n = static_cast<double>(ys.size() - 1);
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
    for (Eigen::Index i = from; i < ys.size(); ++i) {
        const double x = x0 + w * static_cast<double>(i) / std::max(n, 1.0);
        const double y = y0 + h - h * (ys[i] - lo) / range;
        out << x << ',' << y << ' ';
    }
    out << "\"/>\n";
}

}  // namespace

void write_score_svg(const std::filesystem::path& path, const TimeSeries& series,
                     const ScoreSeries& scores) {
    if (series.length() != scores.length()) {
        throw std::invalid_argument("write_score_svg: series/score length mismatch");
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path.string());
    }
    const double W = 1000, H = 150, pad = 10;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << ' '
        << 2 * H + 3 * pad << "\">\n";
    if (series.has_labels()) {
        const auto& labels = *series.labels;
        const double n = static_cast<double>(series.length() - 1);
        for (Eigen::Index i = 0; i < series.length();) {
            if (!labels[i]) {
                ++i;
                continue;
            }
            Eigen::Index j = i;
            while (j < series.length() && labels[j]) ++j;
            const double x = pad + (W - 2 * pad) * static_cast<double>(i) / std::max(n, 1.0);
            const double x2 = pad + (W - 2 * pad) * static_cast<double>(j - 1) / std::max(n, 1.0);
            out << "<rect x=\"" << x << "\" y=\"0\" width=\"" << std::max(x2 - x, 2.0)
                << "\" height=\"" << 2 * H + 3 * pad << "\" fill=\"#ffc0cb\" opacity=\"0.5\"/>\n";
            i = j;
        }
    }
    polyline(out, series.values.col(0), 0, pad, pad, W - 2 * pad, H, "black");
    polyline(out, scores.scores, scores.valid_from, pad, H + 2 * pad, W - 2 * pad, H, "red");
    out << "</svg>\n";
}

}  // namespace tsad
