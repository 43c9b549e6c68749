#include "exboot/hoeffding.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>

#include "exboot/error.hpp"

namespace exboot {

namespace {

void validate_law(const LatentLaw& law) {
  require(!law.values.empty() && law.values.size() == law.probs.size(),
          "latent law needs matching non-empty values and probs");
  double total = 0.0;
  for (double q : law.probs) {
    require(q >= 0.0, "latent probabilities must be non-negative");
    total += q;
  }
  require(std::abs(total - 1.0) < 1e-12, "latent probabilities must sum to one");
}

std::size_t checked_product(std::span<const std::size_t> sizes, std::size_t budget) {
  std::size_t total = 1;
  for (auto s : sizes) {
    if (total > budget / s)
      throw Error(ErrorCode::SupportTooLarge,
                  "latent enumeration exceeds budget of " + std::to_string(budget));
    total *= s;
  }
  return total;
}

// Realization r decoded into per-slot support indices; slot 0 varies slowest.
void decode(std::size_t r, std::span<const std::size_t> radix, std::vector<std::size_t>& out) {
  out.resize(radix.size());
  for (std::size_t s = radix.size(); s-- > 0;) {
    out[s] = r % radix[s];
    r /= radix[s];
  }
}

}  // namespace

HoeffdingOracle::HoeffdingOracle(HoeffdingInstance instance, std::size_t budget)
    : instance_(std::move(instance)) {
  const std::size_t K = instance_.order;
  require(K >= 1 && K <= 16, "order K must be in [1, 16]");
  require(instance_.latents.size() == (std::size_t{1} << K) - 1,
          "need one latent law per nonzero e in {0,1}^K");
  require(static_cast<bool>(instance_.generator), "generator is empty");
  for (const auto& law : instance_.latents) {
    validate_law(law);
    radix_.push_back(law.values.size());
  }
  const std::size_t R = checked_product(radix_, budget);
  const auto p = static_cast<Eigen::Index>(instance_.p);

  probs_.resize(R);
  values_.resize(R);
  mean_ = Vector::Zero(p);
  std::vector<std::size_t> idx;
  std::vector<double> args(radix_.size());
  for (std::size_t r = 0; r < R; ++r) {
    decode(r, radix_, idx);
    double prob = 1.0;
    for (std::size_t s = 0; s < idx.size(); ++s) {
      prob *= instance_.latents[s].probs[idx[s]];
      args[s] = instance_.latents[s].values[idx[s]];
    }
    probs_[r] = prob;
    values_[r] = instance_.generator(args);
    require(values_[r].size() == p, "generator returned a vector of the wrong size");
    mean_ += prob * values_[r];
  }

  const std::uint32_t E = std::uint32_t{1} << K;
  components_.assign(R, std::vector<Vector>(E));
  for (std::size_t r = 0; r < R; ++r) components_[r][0] = mean_;
  for (std::uint32_t e = 1; e < E; ++e) {
    // Conditioning set: latents e' with e' a nonzero submask of e.
    auto cond = conditional_mean(values_, [e](std::uint32_t ep) { return (ep & ~e) == 0; });
    for (std::size_t r = 0; r < R; ++r) {
      Vector w = cond[r];
      for (std::uint32_t sub = (e - 1) & e;; sub = (sub - 1) & e) {
        w -= components_[r][sub];
        if (sub == 0) break;
      }
      components_[r][e] = std::move(w);
    }
  }
}

std::size_t HoeffdingOracle::support_index(std::size_t r, std::uint32_t e) const {
  std::vector<std::size_t> idx;
  decode(r, radix_, idx);
  return idx.at(e - 1);
}

std::vector<Vector> HoeffdingOracle::conditional_mean(
    std::span<const Vector> table, const std::function<bool(std::uint32_t)>& conditioned) const {
  const std::size_t R = probs_.size();
  require(table.size() == R, "table must have one entry per realization");
  std::vector<std::size_t> slots;
  for (std::size_t s = 0; s < radix_.size(); ++s)
    if (conditioned(static_cast<std::uint32_t>(s + 1))) slots.push_back(s);

  std::size_t groups = 1;
  for (auto s : slots) groups *= radix_[s];
  std::vector<Vector> sums(groups, Vector::Zero(table.front().size()));
  std::vector<double> weight(groups, 0.0);
  std::vector<std::size_t> key(R);
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < R; ++r) {
    decode(r, radix_, idx);
    std::size_t g = 0;
    for (auto s : slots) g = g * radix_[s] + idx[s];
    key[r] = g;
    sums[g] += probs_[r] * table[r];
    weight[g] += probs_[r];
  }
  std::vector<Vector> out(R);
  for (std::size_t r = 0; r < R; ++r)
    out[r] = weight[key[r]] > 0.0 ? Vector(sums[key[r]] / weight[key[r]])
                                  : Vector::Zero(table.front().size());
  return out;
}

SilvermanCheck silverman_covariance_check(const JointLatentInstance& inst, std::size_t budget) {
  const std::size_t K = inst.order;
  require(K >= 1 && K <= 8, "order K must be in [1, 8]");
  require(inst.laws.size() == K, "need one latent law per subset size 1..K");
  require(static_cast<bool>(inst.generator), "generator is empty");
  for (const auto& law : inst.laws) validate_law(law);
  const auto p = static_cast<Eigen::Index>(inst.p);
  const std::uint32_t E = std::uint32_t{1} << K;

  // Latent slots are unit subsets; collect those used by the tuples
  // A = (0..K-1) and B = (0, K..2K-2) under every permutation.
  std::map<std::vector<std::size_t>, std::size_t> slot_of;
  std::vector<std::size_t> slot_size;
  auto slot_for = [&](std::vector<std::size_t> units) {
    std::sort(units.begin(), units.end());
    auto [it, inserted] = slot_of.try_emplace(units, slot_size.size());
    if (inserted) slot_size.push_back(units.size());
    return it->second;
  };
  // args_slots[perm][e-1] = slot feeding argument e for that permuted tuple.
  auto tuple_slots = [&](const std::vector<std::size_t>& tuple) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> perm = tuple;
    std::sort(perm.begin(), perm.end());
    do {
      std::vector<std::size_t> slots;
      for (std::uint32_t e = 1; e < E; ++e) {
        std::vector<std::size_t> units;
        for (std::size_t k = 0; k < K; ++k)
          if (e & (1u << k)) units.push_back(perm[k]);
        slots.push_back(slot_for(units));
      }
      out.push_back(std::move(slots));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
  };
  std::vector<std::size_t> tuple_a(K), tuple_b(K);
  std::iota(tuple_a.begin(), tuple_a.end(), 0);
  tuple_b[0] = 0;
  for (std::size_t k = 1; k < K; ++k) tuple_b[k] = K + k - 1;
  // Identity ordering of A first so slots 0..2^K-2 are A's own latents in e order.
  std::vector<std::size_t> own_slots;
  for (std::uint32_t e = 1; e < E; ++e) {
    std::vector<std::size_t> units;
    for (std::size_t k = 0; k < K; ++k)
      if (e & (1u << k)) units.push_back(k);
    own_slots.push_back(slot_for(units));
  }
  const auto perms_a = tuple_slots(tuple_a);
  const auto perms_b = tuple_slots(tuple_b);

  std::vector<std::size_t> radix;
  for (auto size : slot_size) radix.push_back(inst.laws[size - 1].values.size());
  const std::size_t total = checked_product(radix, budget);

  auto eval = [&](const std::vector<std::size_t>& slots, const std::vector<double>& slot_values,
                  std::vector<double>& args) {
    for (std::size_t a = 0; a < slots.size(); ++a) args[a] = slot_values[slots[a]];
    Vector x = inst.generator(args);
    require(x.size() == p, "generator returned a vector of the wrong size");
    return x;
  };

  // Route 1: enumerate the latents of one tuple, mean and Hajek projection.
  std::vector<std::size_t> own_radix(own_slots.size());
  for (std::size_t a = 0; a < own_slots.size(); ++a) own_radix[a] = radix[own_slots[a]];
  const std::size_t own_total = checked_product(own_radix, budget);
  const std::size_t unit_support = inst.laws[0].values.size();
  std::vector<double> args(E - 1);
  std::vector<double> slot_values(slot_size.size(), 0.0);
  std::vector<std::size_t> idx;
  Vector mean = Vector::Zero(p);
  // h_sum[k][u] = sum over realizations with U_{k} at support u of prob * X.
  std::vector<std::vector<Vector>> h_sum(K, std::vector<Vector>(unit_support, Vector::Zero(p)));
  for (std::size_t r = 0; r < own_total; ++r) {
    decode(r, own_radix, idx);
    double prob = 1.0;
    for (std::size_t a = 0; a < own_slots.size(); ++a) {
      const auto& law = inst.laws[slot_size[own_slots[a]] - 1];
      prob *= law.probs[idx[a]];
      slot_values[own_slots[a]] = law.values[idx[a]];
    }
    const Vector x = eval(own_slots, slot_values, args);
    mean += prob * x;
    // Argument e = 2^k is the singleton latent of position k.
    for (std::size_t k = 0; k < K; ++k) h_sum[k][idx[(std::size_t{1} << k) - 1]] += prob * x;
  }
  SilvermanCheck out;
  out.sigma = Matrix::Zero(p, p);
  for (std::size_t u = 0; u < unit_support; ++u) {
    const double pu = inst.laws[0].probs[u];
    if (pu == 0.0) continue;
    Vector w = Vector::Zero(p);
    for (std::size_t k = 0; k < K; ++k) w += h_sum[k][u] / pu - mean;
    out.sigma += pu * w * w.transpose();
  }

  // Route 2: full joint enumeration of both overlapping tuples.
  out.sigma_s = Matrix::Zero(p, p);
  const double inv_perms = 1.0 / static_cast<double>(perms_a.size());
  for (std::size_t r = 0; r < total; ++r) {
    decode(r, radix, idx);
    double prob = 1.0;
    for (std::size_t s = 0; s < radix.size(); ++s) {
      const auto& law = inst.laws[slot_size[s] - 1];
      prob *= law.probs[idx[s]];
      slot_values[s] = law.values[idx[s]];
    }
    if (prob == 0.0) continue;
    Vector xa = Vector::Zero(p), xb = Vector::Zero(p);
    for (const auto& slots : perms_a) xa += eval(slots, slot_values, args);
    for (const auto& slots : perms_b) xb += eval(slots, slot_values, args);
    xa = xa * inv_perms - mean;
    xb = xb * inv_perms - mean;
    out.sigma_s += prob * xa * xb.transpose();
  }
  out.sigma_s *= static_cast<double>(K * K);
  out.max_abs_diff = (out.sigma - out.sigma_s).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace exboot
