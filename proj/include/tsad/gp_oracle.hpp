#pragma once

#include "tsad/timeseries.hpp"

#include <cstdint>
#include <vector>

namespace tsad {

enum class KernelFamily { SquaredExponential, Matern32, WhiteNoise };

/// Stationary kernel: value depends only on |t - t'|, k(0) = variance.
struct Kernel {
    KernelFamily family = KernelFamily::SquaredExponential;
    double lengthscale = 1.0;  // unused for white noise
    double variance = 1.0;     // sigma_f^2

    double operator()(double dt) const;
};

/// Multi-output GP under the linear model of coregionalization: covariance
/// between channels at times t, t' is sum_q k_q(t,t') * B_q, plus iid
/// observation noise on the diagonal.
struct GpModel {
    std::vector<Kernel> kernels;  // Q >= 1
    std::vector<Matrix> coreg;    // Q symmetric PSD d x d matrices
    double noise = 0.0;           // observation noise variance

    int dimension() const;
    void validate() const;

    static GpModel univariate(Kernel k, double noise);
};

/// Finite-history conditional of y_t given the previous h observations.
/// coeffs is (1 + h*d) x d: intercept row (zero for a zero-mean GP) followed
/// by lag blocks ordered most-recent-first, matching the lag-feature layout.
struct ConditionalLaw {
    Matrix coeffs;
    Matrix covariance;  // d x d PSD (scalar sigma_h^2 when d = 1)
    int h = 0;
    int d = 0;

    /// Univariate lag coefficients alpha_h (requires d == 1).
    Vector alpha() const;
    /// Univariate conditional variance (requires d == 1).
    double sigma2() const;
};

/// M[i][j] = k(t_i, t_j); times must be strictly increasing. No noise term.
Matrix kernel_matrix(const Kernel& kernel, const std::vector<double>& times);

/// Exact leave-one-out Gaussian conditional of observation i given all other
/// points of a univariate series, under gp (kernels + noise).
std::pair<double, double> full_conditional(const TimeSeries& series,
                                           Eigen::Index i, const GpModel& gp);

ConditionalLaw finite_history_law(const GpModel& gp, int h);

/// Negative log-likelihood of y under N(mean, covariance).
double gp_nll_score(const Vector& y, const Vector& mean, const Matrix& covariance);
double gp_nll_score(double y, double mean, double variance);

/// (T*d) x (T*d) block covariance, time-major: block (i,j) is
/// sum_q k_q(t_i, t_j) * B_q. Noise is not included.
Matrix lmc_covariance(const GpModel& gp, const std::vector<double>& times);

struct RankBoundResult {
    Matrix W;            // h*d x d lag-coefficient block
    int bound = 0;       // sum_q rank(B_q)
    int numerical_rank = 0;
    bool holds = false;
};

/// Checks rank(W) <= sum_q rank(B_q) at tolerance 1e-8 * sigma_max.
RankBoundResult rank_bound_check(const GpModel& gp, int h);

/// Draws one realization on the grid 0..length-1 via a Cholesky factor of the
/// (jittered) LMC covariance, then adds observation noise. Deterministic for a
/// fixed seed. Univariate stationary draws use the banded form of the same
/// factor, so long series stay cheap.
TimeSeries sample_path(const GpModel& gp, Eigen::Index length, std::uint64_t seed);

namespace detail {

/// Lower Cholesky band of the symmetric Toeplitz matrix with autocovariance
/// gamma(0..b) (entries beyond the band treated as zero). Returns (b+1) x T:
/// entry (r, t) holds L(t+r, t).
Matrix banded_toeplitz_cholesky(const Vector& gamma, Eigen::Index T, int bandwidth);

/// Smallest lag beyond which the univariate stationary autocovariance of gp
/// stays below rel_cutoff * gamma(0), capped at max_lag.
int stationary_bandwidth(const GpModel& gp, double rel_cutoff, int max_lag);

}  // namespace detail

}  // namespace tsad
