#include "exboot/rng.hpp"

#include <cmath>
#include <numbers>

namespace exboot {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline std::array<std::uint32_t, 2> split(std::uint64_t v) noexcept {
  return {static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32)};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

double open_uniform(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;  // 52 bits: (bits + 0.5) stays exact
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

double normal_at(std::uint64_t seed, std::uint32_t a, std::uint32_t b,
                 std::uint32_t c) noexcept {
  const auto w = philox4x32({a, b, c, 0x4E4F524Du}, split(seed));
  const double u1 = open_uniform(w[0], w[1]);
  const double u2 = open_uniform(w[2], w[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t tag,
                          std::uint64_t index) noexcept {
  const auto idx = split(index);
  const auto w = philox4x32({idx[0], idx[1], tag, 0x53454544u}, split(seed));
  return (static_cast<std::uint64_t>(w[1]) << 32) | w[0];
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(split(seed)), stream_(stream) {}

void CounterStream::refill() noexcept {
  const auto b = split(block_++);
  const auto s = split(stream_);
  buffer_ = philox4x32({b[0], b[1], s[0], s[1]}, key_);
  used_ = 0;
}

double CounterStream::uniform() noexcept {
  if (used_ > 2) refill();
  const double u = open_uniform(buffer_[used_], buffer_[used_ + 1]);
  used_ += 2;
  return u;
}

double CounterStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double CounterStream::logistic() noexcept {
  const double u = uniform();
  return std::log(u / (1.0 - u));
}

}  // namespace exboot
