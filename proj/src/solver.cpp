#include "tsad/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <fstream>
#include <stdexcept>

namespace tsad {

double default_ridge_lambda(const LagDataset& data) {
    return 1e-6 * (data.X.transpose() * data.X).trace() /
           static_cast<double>(data.X.cols());
}

LinearModel ridge_fit(const LagDataset& data, double lambda) {
    if (lambda < 0.0) {
        throw std::invalid_argument("ridge lambda must be >= 0");
    }
    if (!data.X.allFinite() || !data.Y.allFinite()) {
        throw std::invalid_argument("ridge_fit: non-finite input");
    }
    const Eigen::Index k = data.X.cols();
    Matrix gram = data.X.transpose() * data.X;
    gram.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        if (lambda == 0.0) {
            throw std::runtime_error(
                "singular normal equations at lambda = 0; use a positive ridge");
        }
        throw std::runtime_error("normal equations not positive definite");
    }
    LinearModel model;
    model.W = llt.solve(data.X.transpose() * data.Y);
    if (!model.W.allFinite()) {
        throw std::runtime_error("ridge_fit produced non-finite coefficients");
    }
    model.p = data.p;
    model.d = data.d;
    model.lambda = lambda;
    model.rank = static_cast<int>(std::min(k, static_cast<Eigen::Index>(data.d)));
    return model;
}

Matrix truncated_projection(const Matrix& M, int r) {
    const Eigen::Index d = M.cols();
    if (r < 1 || r > d) {
        throw std::invalid_argument("projection rank out of range");
    }
    if (!M.allFinite()) {
        throw std::invalid_argument("truncated_projection: non-finite input");
    }
    Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeFullV);
    const Matrix vr = svd.matrixV().leftCols(r);
    return vr * vr.transpose();
}

LinearModel rrr_fit(const LagDataset& data, int r, double lambda) {
    if (r < 1 || r > data.d) {
        throw std::invalid_argument("rrr rank out of range [1, d]");
    }
    LinearModel model = ridge_fit(data, lambda);
    const Matrix fitted = data.X * model.W;
    model.W = model.W * truncated_projection(fitted, r);
    model.rank = r;
    return model;
}

nlohmann::json model_to_json(const LinearModel& model) {
    nlohmann::json w = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.W.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < model.W.cols(); ++j) {
            row.push_back(model.W(i, j));
        }
        w.push_back(std::move(row));
    }
    return nlohmann::json{{"p", model.p},
                          {"d", model.d},
                          {"lambda", model.lambda},
                          {"rank", model.rank},
                          {"W", std::move(w)}};
}

LinearModel model_from_json(const nlohmann::json& j) {
    LinearModel model;
    model.p = j.at("p").get<int>();
    model.d = j.at("d").get<int>();
    model.lambda = j.at("lambda").get<double>();
    model.rank = j.at("rank").get<int>();
    const auto& w = j.at("W");
    const auto rows = static_cast<Eigen::Index>(w.size());
    if (rows != 1 + static_cast<Eigen::Index>(model.d) * model.p) {
        throw std::runtime_error("model JSON: W row count does not match p and d");
    }
    model.W.resize(rows, model.d);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = w.at(i);
        if (static_cast<Eigen::Index>(row.size()) != model.d) {
            throw std::runtime_error("model JSON: ragged W row");
        }
        for (Eigen::Index c = 0; c < model.d; ++c) {
            model.W(i, c) = row.at(c).get<double>();
        }
    }
    if (!model.W.allFinite()) {
        throw std::runtime_error("model JSON: non-finite coefficient");
    }
    return model;
}

void save_model(const std::filesystem::path& path, const LinearModel& model) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path.string());
    }
    out << model_to_json(model).dump(2) << '\n';
}

LinearModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path.string());
    }
    nlohmann::json j;
    in >> j;
    return model_from_json(j);
}

}  // namespace tsad
