#pragma once

#include "tsad/lagmatrix.hpp"

#include <json.hpp>

#include <filesystem>

namespace tsad {

struct LinearModel {
    Matrix W;            // (1+dp) x d coefficients, intercept row first
    int p = 0;
    int d = 0;
    double lambda = 0.0;
    int rank = 0;        // requested rank; min(1+dp, d) for plain ridge/OLS
};

/// Scale-relative default: 1e-6 * trace(X'X) / (1+dp).
double default_ridge_lambda(const LagDataset& data);

/// W = (X'X + lambda I)^{-1} X'Y via Cholesky of the normal equations.
/// lambda = 0 requires invertible X'X (throws std::runtime_error otherwise).
LinearModel ridge_fit(const LagDataset& data, double lambda);

/// Reduced-rank regression: ridge solution projected onto the top-r right
/// singular subspace of the fitted responses X * W_ridge.
LinearModel rrr_fit(const LagDataset& data, int r, double lambda);

/// V_r V_r^T from the SVD of M; symmetric idempotent with trace r.
Matrix truncated_projection(const Matrix& M, int r);

nlohmann::json model_to_json(const LinearModel& model);
LinearModel model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const LinearModel& model);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace tsad
