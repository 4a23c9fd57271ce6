#include "tsad/lagmatrix.hpp"

#include <stdexcept>

namespace tsad {

LagDataset build_lag_dataset(const Matrix& values, int p) {
    const Eigen::Index T = values.rows();
    const Eigen::Index d = values.cols();
    if (p < 1) {
        throw std::invalid_argument("lag order p must be >= 1");
    }
    if (T <= p) {
        throw std::invalid_argument("series length must exceed lag order p");
    }

    LagDataset out;
    out.p = p;
    out.d = static_cast<int>(d);
    out.t0 = p;
    const Eigen::Index n = T - p;
    out.X.resize(n, 1 + d * p);
    out.Y.resize(n, d);
    out.X.col(0).setOnes();
    for (int lag = 1; lag <= p; ++lag) {
        // rows t = p..T-1 take y_{t-lag}; lag 1 sits right after the intercept
        out.X.middleCols(1 + static_cast<Eigen::Index>(lag - 1) * d, d) =
            values.middleRows(p - lag, n);
    }
    out.Y = values.bottomRows(n);
    return out;
}

LagDataset build_lag_dataset(const TimeSeries& ts, int p) {
    ts.validate();
    return build_lag_dataset(ts.values, p);
}

}  // namespace tsad
