#pragma once

#include <vector>

#include "exboot/array_model.hpp"
#include "exboot/bootstrap_core.hpp"

namespace exboot::separable {

/// Row i of axes[k] is the mean over every index except i_k = i.
struct LeaveOneIndexMeans {
  std::vector<Matrix> axes;
};

/// Coordinatewise mean over all cells.
Vector sample_mean(const MultiwayArray& array);

LeaveOneIndexMeans leave_one_index_means(const MultiwayArray& array);

/// Variance estimates sum_k (n / (N_k * d_k)) sum_i (Xbar_{k,i} - S)^2 with
/// d_k = N_k (plain) or N_k - 1 (Bessel).
Vector variance_estimate(const LeaveOneIndexMeans& means, const Vector& mean,
                         double rate_n, ScaleEstimator scale);

/// p x p conditional covariance of sqrt(n) S^MB:
/// sum_k (n / N_k^2) sum_i (Xbar_{k,i} - S)(Xbar_{k,i} - S)^T.
Matrix conditional_covariance(const LeaveOneIndexMeans& means, const Vector& mean,
                              double rate_n);

/// Multiplier bootstrap for separately exchangeable arrays with one
/// standard normal multiplier per (axis, index).
BootstrapResult bootstrap(const MultiwayArray& array, const BootstrapOptions& options);

/// Same engine on precomputed projections; used by the Lasso penalty
/// choice, which bootstraps a score array.
BootstrapResult bootstrap(const LeaveOneIndexMeans& means, const Vector& mean,
                          double rate_n, const BootstrapOptions& options);

/// Rows N_k^{-1}(Xbar_{k,i} - S) stacked over axes, with their multiplier keys.
Matrix centered_rows(const LeaveOneIndexMeans& means, const Vector& mean,
                     std::vector<MultiplierKey>& keys);

}  // namespace exboot::separable
