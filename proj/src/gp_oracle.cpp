#include "tsad/gp_oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tsad {

double Kernel::operator()(double dt) const {
    const double r = std::abs(dt);
    switch (family) {
        case KernelFamily::SquaredExponential:
            return variance * std::exp(-r * r / (2.0 * lengthscale * lengthscale));
        case KernelFamily::Matern32: {
            const double s = std::numbers::sqrt3 * r / lengthscale;
            return variance * (1.0 + s) * std::exp(-s);
        }
        case KernelFamily::WhiteNoise:
            return r == 0.0 ? variance : 0.0;
    }
    throw std::logic_error("unreachable");
}

namespace {

void validate_kernel(const Kernel& k) {
    if (k.variance <= 0.0) {
        throw std::invalid_argument("kernel variance must be > 0");
    }
    if (k.family != KernelFamily::WhiteNoise && k.lengthscale <= 0.0) {
        throw std::invalid_argument("kernel lengthscale must be > 0");
    }
}

void validate_grid(const std::vector<double>& times) {
    if (times.empty()) {
        throw std::invalid_argument("time grid is empty");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i] <= times[i - 1]) {
            throw std::invalid_argument("time grid must be strictly increasing");
        }
    }
}

// LDLT solve with an explicit singularity check; Eigen's LDLT does not flag
// rank deficiency on its own.
Eigen::LDLT<Matrix> checked_ldlt(const Matrix& A, const char* what) {
    Eigen::LDLT<Matrix> ldlt(A);
    const auto& D = ldlt.vectorD();
    const double dmax = D.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || dmax <= 0.0 ||
        D.minCoeff() <= dmax * 1e-14) {
        throw std::runtime_error(std::string("singular covariance in ") + what);
    }
    return ldlt;
}

int psd_rank(const Matrix& B) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(B);
    const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (lmax == 0.0) return 0;
    return static_cast<int>((eig.eigenvalues().array() > 1e-8 * lmax).count());
}

}  // namespace

int GpModel::dimension() const {
    return coreg.empty() ? 0 : static_cast<int>(coreg.front().rows());
}

void GpModel::validate() const {
    if (kernels.empty() || kernels.size() != coreg.size()) {
        throw std::invalid_argument("GpModel needs Q >= 1 kernels with matching coreg matrices");
    }
    if (noise < 0.0) {
        throw std::invalid_argument("observation noise must be >= 0");
    }
    for (const auto& k : kernels) validate_kernel(k);
    const Eigen::Index d = coreg.front().rows();
    for (const auto& B : coreg) {
        if (B.rows() != d || B.cols() != d) {
            throw std::invalid_argument("coregionalization matrices must all be d x d");
        }
        const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
        if ((B - B.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
            throw std::invalid_argument("coregionalization matrix not symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> eig(B);
        if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
            throw std::invalid_argument("coregionalization matrix not PSD");
        }
    }
}

GpModel GpModel::univariate(Kernel k, double noise) {
    GpModel gp;
    gp.kernels = {k};
    gp.coreg = {Matrix::Ones(1, 1)};
    gp.noise = noise;
    return gp;
}

Vector ConditionalLaw::alpha() const {
    if (d != 1) {
        throw std::logic_error("alpha() requires a univariate law");
    }
    return coeffs.col(0).tail(h);
}

double ConditionalLaw::sigma2() const {
    if (d != 1) {
        throw std::logic_error("sigma2() requires a univariate law");
    }
    return covariance(0, 0);
}

Matrix kernel_matrix(const Kernel& kernel, const std::vector<double>& times) {
    validate_kernel(kernel);
    validate_grid(times);
    const auto n = static_cast<Eigen::Index>(times.size());
    Matrix M(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = kernel(times[i] - times[j]);
            M(i, j) = v;
            M(j, i) = v;
        }
    }
    return M;
}

Matrix lmc_covariance(const GpModel& gp, const std::vector<double>& times) {
    gp.validate();
    validate_grid(times);
    const auto T = static_cast<Eigen::Index>(times.size());
    const Eigen::Index d = gp.dimension();
    Matrix K = Matrix::Zero(T * d, T * d);
    for (std::size_t q = 0; q < gp.kernels.size(); ++q) {
        for (Eigen::Index i = 0; i < T; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                const double kv = gp.kernels[q](times[i] - times[j]);
                if (kv == 0.0) continue;
                K.block(i * d, j * d, d, d) += kv * gp.coreg[q];
                if (i != j) {
                    K.block(j * d, i * d, d, d) += kv * gp.coreg[q];
                }
            }
        }
    }
    return K;
}

std::pair<double, double> full_conditional(const TimeSeries& series, Eigen::Index i,
                                           const GpModel& gp) {
    series.validate();
    gp.validate();
    if (gp.dimension() != 1 || series.channels() != 1) {
        throw std::invalid_argument("full_conditional handles univariate series only");
    }
    const Eigen::Index T = series.length();
    if (T < 2) {
        throw std::invalid_argument("full_conditional needs at least 2 points");
    }
    if (i < 0 || i >= T) {
        throw std::invalid_argument("full_conditional index out of range");
    }

    auto cov = [&](Eigen::Index a, Eigen::Index b) {
        double v = 0.0;
        for (std::size_t q = 0; q < gp.kernels.size(); ++q) {
            v += gp.kernels[q](static_cast<double>(a - b)) * gp.coreg[q](0, 0);
        }
        if (a == b) v += gp.noise;
        return v;
    };

    Matrix K(T - 1, T - 1);
    Vector k_i(T - 1), y_rest(T - 1);
    Eigen::Index r = 0;
    for (Eigen::Index a = 0; a < T; ++a) {
        if (a == i) continue;
        k_i[r] = cov(i, a);
        y_rest[r] = series.values(a, 0);
        Eigen::Index c = 0;
        for (Eigen::Index b = 0; b < T; ++b) {
            if (b == i) continue;
            K(r, c) = cov(a, b);
            ++c;
        }
        ++r;
    }
    const auto ldlt = checked_ldlt(K, "full_conditional");
    const Vector w = ldlt.solve(k_i);
    const double mean = w.dot(y_rest);
    const double var = cov(i, i) - w.dot(k_i);
    return {mean, var};
}

ConditionalLaw finite_history_law(const GpModel& gp, int h) {
    gp.validate();
    if (h < 1) {
        throw std::invalid_argument("history length h must be >= 1");
    }
    const Eigen::Index d = gp.dimension();

    // Stationary cross-channel covariance at lag delta, without noise.
    auto block = [&](int delta) {
        Matrix B = Matrix::Zero(d, d);
        for (std::size_t q = 0; q < gp.kernels.size(); ++q) {
            B += gp.kernels[q](static_cast<double>(delta)) * gp.coreg[q];
        }
        return B;
    };

    // Lag-ordered history: block row a covers y_{t-(a+1)}.
    Matrix K_hist(h * d, h * d);
    Matrix k_cross(h * d, d);
    for (int a = 0; a < h; ++a) {
        k_cross.middleRows(a * d, d) = block(a + 1);
        for (int b = 0; b <= a; ++b) {
            Matrix B = block(a - b);
            if (a == b) B.diagonal().array() += gp.noise;
            K_hist.block(a * d, b * d, d, d) = B;
            K_hist.block(b * d, a * d, d, d) = B.transpose();
        }
    }

    const auto ldlt = checked_ldlt(K_hist, "finite_history_law");
    const Matrix A = ldlt.solve(k_cross);

    ConditionalLaw law;
    law.h = h;
    law.d = static_cast<int>(d);
    law.coeffs = Matrix::Zero(1 + h * d, d);
    law.coeffs.bottomRows(h * d) = A;
    Matrix C0 = block(0);
    C0.diagonal().array() += gp.noise;
    const Matrix S = C0 - k_cross.transpose() * A;
    law.covariance = 0.5 * (S + S.transpose());
    return law;
}

double gp_nll_score(const Vector& y, const Vector& mean, const Matrix& covariance) {
    const Eigen::Index d = y.size();
    if (mean.size() != d || covariance.rows() != d || covariance.cols() != d) {
        throw std::invalid_argument("gp_nll_score: dimension mismatch");
    }
    Eigen::LLT<Matrix> llt(covariance);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("gp_nll_score: covariance not positive definite");
    }
    const Vector r = y - mean;
    const double quad = r.dot(llt.solve(r));
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return 0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

double gp_nll_score(double y, double mean, double variance) {
    if (variance <= 0.0) {
        throw std::runtime_error("gp_nll_score: variance must be > 0");
    }
    const double r = y - mean;
    return 0.5 * (std::log(2.0 * std::numbers::pi * variance) + r * r / variance);
}

RankBoundResult rank_bound_check(const GpModel& gp, int h) {
    const ConditionalLaw law = finite_history_law(gp, h);
    RankBoundResult out;
    out.W = law.coeffs.bottomRows(law.h * law.d);
    out.bound = 0;
    for (const auto& B : gp.coreg) out.bound += psd_rank(B);

    Eigen::BDCSVD<Matrix> svd(out.W);
    const double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    out.numerical_rank =
        smax == 0.0
            ? 0
            : static_cast<int>((svd.singularValues().array() > 1e-8 * smax).count());
    out.holds = out.numerical_rank <= out.bound;
    return out;
}

namespace detail {

Matrix banded_toeplitz_cholesky(const Vector& gamma, Eigen::Index T, int bandwidth) {
    if (gamma.size() != bandwidth + 1) {
        throw std::invalid_argument("gamma must hold bandwidth+1 autocovariances");
    }
    Matrix L = Matrix::Zero(bandwidth + 1, T);
    for (Eigen::Index t = 0; t < T; ++t) {
        const Eigen::Index rmax = std::min<Eigen::Index>(bandwidth, T - 1 - t);
        for (Eigen::Index r = 0; r <= rmax; ++r) {
            const Eigen::Index i = t + r;
            double s = gamma[r];
            for (Eigen::Index j = std::max<Eigen::Index>(0, i - bandwidth); j < t; ++j) {
                s -= L(i - j, j) * L(t - j, j);
            }
            if (r == 0) {
                if (s <= 0.0) {
                    throw std::runtime_error("covariance not positive definite");
                }
                L(0, t) = std::sqrt(s);
            } else {
                L(r, t) = s / L(0, t);
            }
        }
    }
    return L;
}

int stationary_bandwidth(const GpModel& gp, double rel_cutoff, int max_lag) {
    auto gamma = [&](int lag) {
        double v = 0.0;
        for (std::size_t q = 0; q < gp.kernels.size(); ++q) {
            v += gp.kernels[q](static_cast<double>(lag)) * gp.coreg[q](0, 0);
        }
        return v;
    };
    const double cutoff = rel_cutoff * gamma(0);
    int b = max_lag;
    while (b > 0 && std::abs(gamma(b)) <= cutoff) --b;
    return b;
}

}  // namespace detail

TimeSeries sample_path(const GpModel& gp, Eigen::Index length, std::uint64_t seed) {
    gp.validate();
    if (length < 1) {
        throw std::invalid_argument("sample length must be >= 1");
    }
    const Eigen::Index d = gp.dimension();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    TimeSeries ts;
    ts.name = "gp-sample";
    ts.values.resize(length, d);

    if (d == 1) {
        // Band form of the Cholesky factor: autocovariance entries below
        // 1e-16 * gamma(0) are zero at working precision.
        const int b = detail::stationary_bandwidth(gp, 1e-16,
                                                   static_cast<int>(length - 1));
        double gamma0 = 0.0;
        for (std::size_t q = 0; q < gp.kernels.size(); ++q) {
            gamma0 += gp.kernels[q](0.0) * gp.coreg[q](0, 0);
        }
        const double jitter = 1e-9 * gamma0;
        Vector gamma(b + 1);
        for (int r = 0; r <= b; ++r) {
            gamma[r] = 0.0;
            for (std::size_t q = 0; q < gp.kernels.size(); ++q) {
                gamma[r] += gp.kernels[q](static_cast<double>(r)) * gp.coreg[q](0, 0);
            }
        }
        gamma[0] += jitter;
        const Matrix L = detail::banded_toeplitz_cholesky(gamma, length, b);
        Vector z(length);
        for (Eigen::Index i = 0; i < length; ++i) z[i] = gauss(rng);
        for (Eigen::Index i = 0; i < length; ++i) {
            double v = 0.0;
            for (Eigen::Index j = std::max<Eigen::Index>(0, i - b); j <= i; ++j) {
                v += L(i - j, j) * z[j];
            }
            ts.values(i, 0) = v;
        }
    } else {
        std::vector<double> times(length);
        for (Eigen::Index i = 0; i < length; ++i) times[i] = static_cast<double>(i);
        Matrix K = lmc_covariance(gp, times);
        double scale = 0.0;
        for (std::size_t q = 0; q < gp.kernels.size(); ++q) {
            scale += gp.kernels[q](0.0) * gp.coreg[q].diagonal().maxCoeff();
        }
        K.diagonal().array() += 1e-9 * scale;
        Eigen::LLT<Matrix> llt(K);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("sample_path: covariance not positive definite");
        }
        Vector z(length * d);
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = gauss(rng);
        const Vector f = llt.matrixL() * z;
        for (Eigen::Index t = 0; t < length; ++t) {
            ts.values.row(t) = f.segment(t * d, d).transpose();
        }
    }

    if (gp.noise > 0.0) {
        const double sd = std::sqrt(gp.noise);
        for (Eigen::Index t = 0; t < length; ++t) {
            for (Eigen::Index c = 0; c < d; ++c) {
                ts.values(t, c) += sd * gauss(rng);
            }
        }
    }
    return ts;
}

}  // namespace tsad
