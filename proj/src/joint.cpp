#include "exboot/joint.hpp"

#include <cmath>

#include "exboot/error.hpp"

namespace exboot::joint {

PolyadicArray::PolyadicArray(std::size_t n, std::size_t order, std::size_t p)
    : n_(n), order_(order), p_(p) {
  require(order_ >= 1 && p_ >= 1, "polyadic array needs K >= 1 and p >= 1");
  std::size_t slots = 1;
  for (std::size_t k = 0; k < order_; ++k) slots *= n_;
  values_.assign(slots * p_, 0.0);
}

std::size_t PolyadicArray::offset(std::span<const std::size_t> tuple) const {
  require(tuple.size() == order_, "tuple arity does not match K");
  std::size_t flat = 0;
  for (auto u : tuple) {
    require(u < n_, "unit out of range");
    flat = flat * n_ + u;
  }
  return flat * p_;
}

std::span<double> PolyadicArray::at(std::span<const std::size_t> tuple) {
  return {values_.data() + offset(tuple), p_};
}

std::span<const double> PolyadicArray::at(std::span<const std::size_t> tuple) const {
  return {values_.data() + offset(tuple), p_};
}

PolyadicMeans polyadic_means(const DyadicArray& array) {
  const std::size_t n = array.n();
  if (n < 3)
    throw Error(ErrorCode::TooFewUnits, "dyadic inference needs n >= 3 units");
  const auto p = static_cast<Eigen::Index>(array.p());
  PolyadicMeans out;
  out.order = 2;
  out.mean = Vector::Zero(p);
  out.w_hat = Matrix::Zero(static_cast<Eigen::Index>(n), p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Eigen::Map<const Vector> x(array.at(i, j).data(), p);
      out.mean += x;
      out.w_hat.row(static_cast<Eigen::Index>(i)) += x.transpose();
      out.w_hat.row(static_cast<Eigen::Index>(j)) += x.transpose();
    }
  const double nd = static_cast<double>(n);
  out.mean /= nd * (nd - 1.0);
  // (n-K)!/(n-1)! = 1/(n-1) for K = 2.
  out.w_hat /= nd - 1.0;
  return out;
}

PolyadicMeans polyadic_means(const PolyadicArray& array) {
  const std::size_t n = array.n();
  const std::size_t K = array.order();
  if (n < K + 1)
    throw Error(ErrorCode::TooFewUnits, "polyadic inference needs n >= K + 1 units");
  const auto p = static_cast<Eigen::Index>(array.p());
  PolyadicMeans out;
  out.order = K;
  out.mean = Vector::Zero(p);
  out.w_hat = Matrix::Zero(static_cast<Eigen::Index>(n), p);
  std::size_t tuples = 0;
  array.for_each_tuple([&](std::span<const std::size_t> tuple) {
    const Eigen::Map<const Vector> x(array.at(tuple).data(), p);
    out.mean += x;
    for (auto u : tuple) out.w_hat.row(static_cast<Eigen::Index>(u)) += x.transpose();
    ++tuples;
  });
  out.mean /= static_cast<double>(tuples);  // n!/(n-K)!
  // (n-K)!/(n-1)! = 1 / ((n-1)(n-2)...(n-K+1))
  double falling = 1.0;
  for (std::size_t k = 1; k < K; ++k) falling *= static_cast<double>(n - k);
  out.w_hat /= falling;
  return out;
}

DyadicArray symmetrize(const DyadicArray& array) {
  const std::size_t n = array.n();
  const std::size_t p = array.p();
  std::vector<double> values(array.values().begin(), array.values().end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t l = 0; l < p; ++l) {
        double& a = values[(i * n + j) * p + l];
        double& b = values[(j * n + i) * p + l];
        const double avg = 0.5 * (a + b);
        a = avg;
        b = avg;
      }
  return DyadicArray(n, p, std::move(values), true);
}

Vector variance_estimate(const PolyadicMeans& means, ScaleEstimator scale) {
  const double n = static_cast<double>(means.w_hat.rows());
  const Matrix centered =
      means.w_hat.rowwise() - static_cast<double>(means.order) * means.mean.transpose();
  const double denom = scale == ScaleEstimator::Bessel ? n - 1.0 : n;
  return centered.array().square().colwise().sum().transpose().matrix() / denom;
}

Matrix conditional_covariance(const PolyadicMeans& means) {
  const double n = static_cast<double>(means.w_hat.rows());
  const Matrix centered =
      means.w_hat.rowwise() - static_cast<double>(means.order) * means.mean.transpose();
  return (centered.transpose() * centered) / n;
}

BootstrapResult bootstrap(const PolyadicMeans& means, const BootstrapOptions& options) {
  const auto n = means.w_hat.rows();
  BootstrapResult result;
  result.engine = "joint";
  result.estimate = means.mean;
  result.rate_n = static_cast<double>(n);
  result.mode = options.mode;
  result.scale = options.scale;
  result.sigma_hat = variance_estimate(means, ScaleEstimator::Plain);
  result.sigma_tilde = variance_estimate(means, ScaleEstimator::Bessel);
  const Matrix rows =
      (means.w_hat.rowwise() - static_cast<double>(means.order) * means.mean.transpose()) /
      static_cast<double>(n);
  std::vector<MultiplierKey> keys(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) keys[static_cast<std::size_t>(j)] = {0, static_cast<std::uint32_t>(j)};
  run_multiplier_bootstrap(result, rows, keys, options);
  return result;
}

BootstrapResult bootstrap(const DyadicArray& array, const BootstrapOptions& options) {
  return bootstrap(polyadic_means(array), options);
}

}  // namespace exboot::joint
