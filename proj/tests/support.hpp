#pragma once

// Test-side data generators. They use <random> rather than the library's
// Philox streams so oracles never share code with the engines under test.

#include <cstdint>
#include <random>
#include <vector>

#include "exboot/array_model.hpp"
#include "exboot/bootstrap_core.hpp"

namespace testing {

inline std::vector<double> normals(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::vector<double> out(count);
  for (auto& v : out) v = z(gen);
  return out;
}

inline exboot::MultiwayArray random_multiway(std::vector<std::size_t> dims, std::size_t p,
                                             std::uint64_t seed) {
  std::size_t cells = 1;
  for (auto d : dims) cells *= d;
  return exboot::MultiwayArray(std::move(dims), p, normals(cells * p, seed));
}

/// Random dyadic array; symmetric copies the upper triangle.
inline exboot::DyadicArray random_dyadic(std::size_t n, std::size_t p, std::uint64_t seed,
                                         bool symmetric) {
  auto v = normals(n * n * p, seed);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < p; ++l) v[(i * n + i) * p + l] = 0.0;
  if (symmetric)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j)
        for (std::size_t l = 0; l < p; ++l) v[(i * n + j) * p + l] = v[(j * n + i) * p + l];
  return exboot::DyadicArray(n, p, std::move(v), symmetric);
}

inline double max_abs_diff(const exboot::Vector& a, const exboot::Vector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testing
