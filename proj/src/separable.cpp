#include "exboot/separable.hpp"

#include <cmath>

#include "exboot/error.hpp"

namespace exboot::separable {

Vector sample_mean(const MultiwayArray& array) {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(array.p()));
  for (std::size_t c = 0; c < array.cells(); ++c) {
    const auto x = array.cell(c);
    for (std::size_t j = 0; j < x.size(); ++j) sum[static_cast<Eigen::Index>(j)] += x[j];
  }
  return sum / static_cast<double>(array.cells());
}

LeaveOneIndexMeans leave_one_index_means(const MultiwayArray& array) {
  const std::size_t K = array.order();
  const auto p = static_cast<Eigen::Index>(array.p());
  LeaveOneIndexMeans out;
  out.axes.reserve(K);
  for (std::size_t k = 0; k < K; ++k)
    out.axes.push_back(Matrix::Zero(static_cast<Eigen::Index>(array.dim(k)), p));

  // Walk cells in storage order, tracking the multi-index incrementally.
  std::vector<std::size_t> index(K, 0);
  for (std::size_t c = 0; c < array.cells(); ++c) {
    const auto x = array.cell(c);
    const Eigen::Map<const Vector> xv(x.data(), p);
    for (std::size_t k = 0; k < K; ++k)
      out.axes[k].row(static_cast<Eigen::Index>(index[k])) += xv.transpose();
    for (std::size_t k = K; k-- > 0;) {
      if (++index[k] < array.dim(k)) break;
      index[k] = 0;
    }
  }
  for (std::size_t k = 0; k < K; ++k)
    out.axes[k] /= static_cast<double>(array.cells() / array.dim(k));
  return out;
}

Vector variance_estimate(const LeaveOneIndexMeans& means, const Vector& mean,
                         double rate_n, ScaleEstimator scale) {
  Vector var = Vector::Zero(mean.size());
  for (const auto& axis : means.axes) {
    const double N = static_cast<double>(axis.rows());
    const double denom = N * (scale == ScaleEstimator::Bessel ? N - 1.0 : N);
    const Matrix centered = axis.rowwise() - mean.transpose();
    var += (rate_n / denom) * centered.array().square().colwise().sum().transpose().matrix();
  }
  return var;
}

Matrix conditional_covariance(const LeaveOneIndexMeans& means, const Vector& mean,
                              double rate_n) {
  Matrix cov = Matrix::Zero(mean.size(), mean.size());
  for (const auto& axis : means.axes) {
    const double N = static_cast<double>(axis.rows());
    const Matrix centered = axis.rowwise() - mean.transpose();
    cov += (rate_n / (N * N)) * (centered.transpose() * centered);
  }
  return cov;
}

Matrix centered_rows(const LeaveOneIndexMeans& means, const Vector& mean,
                     std::vector<MultiplierKey>& keys) {
  Eigen::Index total = 0;
  for (const auto& axis : means.axes) total += axis.rows();
  Matrix rows(total, mean.size());
  keys.clear();
  keys.reserve(static_cast<std::size_t>(total));
  Eigen::Index offset = 0;
  for (std::size_t k = 0; k < means.axes.size(); ++k) {
    const auto& axis = means.axes[k];
    const double N = static_cast<double>(axis.rows());
    rows.middleRows(offset, axis.rows()) = (axis.rowwise() - mean.transpose()) / N;
    for (Eigen::Index i = 0; i < axis.rows(); ++i)
      keys.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(i)});
    offset += axis.rows();
  }
  return rows;
}

BootstrapResult bootstrap(const LeaveOneIndexMeans& means, const Vector& mean,
                          double rate_n, const BootstrapOptions& options) {
  BootstrapResult result;
  result.engine = "separable";
  result.estimate = mean;
  result.rate_n = rate_n;
  result.mode = options.mode;
  result.scale = options.scale;
  result.sigma_hat = variance_estimate(means, mean, rate_n, ScaleEstimator::Plain);
  result.sigma_tilde = variance_estimate(means, mean, rate_n, ScaleEstimator::Bessel);
  std::vector<MultiplierKey> keys;
  const Matrix rows = centered_rows(means, mean, keys);
  run_multiplier_bootstrap(result, rows, keys, options);
  return result;
}

BootstrapResult bootstrap(const MultiwayArray& array, const BootstrapOptions& options) {
  for (auto d : array.dims())
    require(d >= 2, "bootstrap needs every cluster size N_k >= 2");
  return bootstrap(leave_one_index_means(array), sample_mean(array),
                   static_cast<double>(array.min_dim()), options);
}

}  // namespace exboot::separable
