#pragma once

#include <array>
#include <cstdint>

namespace exboot {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: the same
/// (counter, key) always yields the same four words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Uniform on the open interval (0, 1) built from 52 random bits.
double open_uniform(std::uint32_t hi, std::uint32_t lo) noexcept;

/// Standard normal addressed by a 64-bit seed and three coordinates.
/// Bootstrap multipliers use (draw, axis, index) so any partition of the
/// draws over workers reproduces the same values.
double normal_at(std::uint64_t seed, std::uint32_t a, std::uint32_t b,
                 std::uint32_t c) noexcept;

/// Mixes (seed, tag, index) into an independent child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t tag,
                          std::uint64_t index) noexcept;

/// Sequential generator over one Philox stream. Each stream is keyed by a
/// seed and a 64-bit stream id and walks its own 64-bit block counter.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  double uniform() noexcept;
  double normal() noexcept;
  bool bernoulli(double prob) noexcept { return uniform() < prob; }
  /// Standard logistic by inversion.
  double logistic() noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace exboot
