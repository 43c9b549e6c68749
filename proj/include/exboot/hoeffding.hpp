#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "exboot/bootstrap_core.hpp"

namespace exboot {

/// Finite-support law: values[s] has probability probs[s].
struct LatentLaw {
  std::vector<double> values;
  std::vector<double> probs;
};

using LatentGenerator = std::function<Vector(std::span<const double>)>;

inline constexpr std::size_t kDefaultEnumerationBudget = 1'000'000;

/// X = g((U_e)_{e in {0,1}^K \ 0}) for a single cell of a separately
/// exchangeable array. Latent e (a bitmask, bit k = axis k) has law
/// latents[e - 1], and g receives the latent values in increasing e.
struct HoeffdingInstance {
  std::size_t order = 1;
  std::size_t p = 1;
  std::vector<LatentLaw> latents;
  LatentGenerator generator;
};

/// Exact Hoeffding-type decomposition by enumerating every latent
/// realization. Component 0 is E[X]; component e > 0 is
/// E[X | U_e', e' <= e] minus all components e' < e (including 0), so that
/// the components of any realization sum to X.
class HoeffdingOracle {
 public:
  explicit HoeffdingOracle(HoeffdingInstance instance,
                           std::size_t budget = kDefaultEnumerationBudget);

  std::size_t order() const noexcept { return instance_.order; }
  std::size_t realizations() const noexcept { return probs_.size(); }
  std::size_t latent_count() const noexcept { return instance_.latents.size(); }
  double probability(std::size_t r) const { return probs_.at(r); }
  const Vector& value(std::size_t r) const { return values_.at(r); }
  const Vector& mean() const noexcept { return mean_; }
  /// components(r)[e] for e in [0, 2^K).
  const std::vector<Vector>& components(std::size_t r) const { return components_.at(r); }
  /// Support index of latent e in realization r.
  std::size_t support_index(std::size_t r, std::uint32_t e) const;

  /// E[table | U_e for e in `conditioned`] evaluated at realization r, with
  /// `conditioned` a set of latent bitmasks given as a predicate.
  std::vector<Vector> conditional_mean(std::span<const Vector> table,
                                       const std::function<bool(std::uint32_t)>& conditioned) const;

 private:
  HoeffdingInstance instance_;
  std::vector<std::size_t> radix_;
  std::vector<double> probs_;
  std::vector<Vector> values_;
  Vector mean_;
  std::vector<std::vector<Vector>> components_;
};

/// Jointly exchangeable K-adic generator: X_(i_1..i_K) = g((U_{ {i_k : e_k = 1} })_e)
/// with latents on unit subsets. Subsets of size r share law laws[r - 1].
struct JointLatentInstance {
  std::size_t order = 2;
  std::size_t p = 1;
  std::vector<LatentLaw> laws;
  LatentGenerator generator;
};

struct SilvermanCheck {
  Matrix sigma;     ///< E[W_1 W_1^T], W_1 = sum_k h_k(U_1)
  Matrix sigma_s;   ///< K^2 E[Xsym_(1..K) Xsym_(1,K+1..2K)^T]
  double max_abs_diff = 0.0;
};

/// Both long-run covariance expressions by exact enumeration; X is centered
/// at its enumerated mean first.
SilvermanCheck silverman_covariance_check(const JointLatentInstance& instance,
                                          std::size_t budget = kDefaultEnumerationBudget);

}  // namespace exboot
