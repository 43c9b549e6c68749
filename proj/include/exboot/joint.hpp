#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "exboot/array_model.hpp"
#include "exboot/bootstrap_core.hpp"

namespace exboot::joint {

/// S_n and the Hajek-projection estimates W_hat_j (rows of w_hat).
struct PolyadicMeans {
  Vector mean;
  Matrix w_hat;
  std::size_t order = 2;
};

/// Generic K-adic array over ordered K-tuples of distinct units in [n].
/// Storage is dense n^K x p; slots with repeated units are ignored.
class PolyadicArray {
 public:
  PolyadicArray(std::size_t n, std::size_t order, std::size_t p);

  std::size_t n() const noexcept { return n_; }
  std::size_t order() const noexcept { return order_; }
  std::size_t p() const noexcept { return p_; }
  std::span<double> at(std::span<const std::size_t> tuple);
  std::span<const double> at(std::span<const std::size_t> tuple) const;

  /// Calls fn(tuple) for every ordered tuple of distinct units.
  template <class Fn>
  void for_each_tuple(Fn&& fn) const {
    std::vector<std::size_t> tuple(order_, 0);
    visit(tuple, 0, fn);
  }

 private:
  template <class Fn>
  void visit(std::vector<std::size_t>& tuple, std::size_t depth, Fn& fn) const {
    if (depth == order_) {
      fn(std::span<const std::size_t>(tuple));
      return;
    }
    for (std::size_t u = 0; u < n_; ++u) {
      bool used = false;
      for (std::size_t d = 0; d < depth; ++d) used = used || tuple[d] == u;
      if (used) continue;
      tuple[depth] = u;
      visit(tuple, depth + 1, fn);
    }
  }
  std::size_t offset(std::span<const std::size_t> tuple) const;

  std::size_t n_;
  std::size_t order_;
  std::size_t p_;
  std::vector<double> values_;
};

/// K = 2: one pass over ordered pairs, each added to both endpoints.
PolyadicMeans polyadic_means(const DyadicArray& array);

/// General K by tuple enumeration.
PolyadicMeans polyadic_means(const PolyadicArray& array);

/// Average of the two slots of each pair; the result is flagged symmetric.
DyadicArray symmetrize(const DyadicArray& array);

/// (1/d) sum_j (W_hat_j - K S_n)^2 with d = n (plain) or n - 1 (Bessel).
Vector variance_estimate(const PolyadicMeans& means, ScaleEstimator scale);

/// n^{-1} sum_j (W_hat_j - K S_n)(W_hat_j - K S_n)^T.
Matrix conditional_covariance(const PolyadicMeans& means);

/// Multiplier bootstrap S^MB = n^{-1} sum_j xi_j (W_hat_j - K S_n).
BootstrapResult bootstrap(const DyadicArray& array, const BootstrapOptions& options);
BootstrapResult bootstrap(const PolyadicMeans& means, const BootstrapOptions& options);

}  // namespace exboot::joint
