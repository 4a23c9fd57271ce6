#pragma once

#include "tsad/timeseries.hpp"

namespace tsad {

/// Lagged design/response matrices. X row i is (1, y_{t-1}^T, ..., y_{t-p}^T)
/// for response time t = t0 + i: intercept column first, then lags ordered
/// most-recent-first, channels contiguous within each lag.
struct LagDataset {
    Matrix X;            // (T-p) x (1+dp), column 0 identically 1
    Matrix Y;            // (T-p) x d
    int p = 0;
    int d = 0;
    Eigen::Index t0 = 0; // source index of the first response row (= p)
};

LagDataset build_lag_dataset(const Matrix& values, int p);
LagDataset build_lag_dataset(const TimeSeries& ts, int p);

}  // namespace tsad
