#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace exboot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class BootstrapMode { Raw, Studentized };
enum class ScaleEstimator { Bessel, Plain };
enum class BandType { Constant, Studentized };

std::string_view to_string(BootstrapMode mode) noexcept;
BootstrapMode parse_mode(std::string_view text);

struct BootstrapOptions {
  std::size_t draws = 500;
  double alpha = 0.1;
  BootstrapMode mode = BootstrapMode::Raw;
  /// Scale used for studentization and for the studentized band.
  ScaleEstimator scale = ScaleEstimator::Bessel;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Keep the B x p matrix of S^MB draws in the result.
  bool keep_draws = false;
  /// Materialize the p x p conditional covariance.
  bool covariance = false;
};

/// Output of either bootstrap engine. `engine` is "separable" or "joint".
struct BootstrapResult {
  std::string engine;
  Vector estimate;          ///< S_N or S_n
  double rate_n = 0.0;      ///< n in sqrt(n) scaling
  Vector sigma_hat;         ///< plain variance estimates
  Vector sigma_tilde;       ///< Bessel-corrected variance estimates
  std::vector<double> sup_draws;
  Matrix draws;             ///< B x p S^MB draws when kept
  std::optional<Matrix> covariance;
  BootstrapMode mode = BootstrapMode::Raw;
  ScaleEstimator scale = ScaleEstimator::Bessel;
  double alpha = 0.1;
  double cv = 0.0;
  std::size_t B = 0;
  std::uint64_t seed = 0;

  /// Variances used to studentize (sigma_tilde or sigma_hat).
  const Vector& studentizing_variance() const {
    return scale == ScaleEstimator::Bessel ? sigma_tilde : sigma_hat;
  }
};

struct BandResult {
  Vector estimate;
  Vector half_width;
  Vector scale;  ///< standard deviations used per coordinate; empty for constant bands
  double level = 0.9;
  double cv = 0.0;
  BandType type = BandType::Constant;

  Vector lower() const { return estimate - half_width; }
  Vector upper() const { return estimate + half_width; }
  bool contains(const Vector& truth) const;
};

/// One multiplier per (axis, index) pair. Row r of `rows` is multiplied by
/// xi(draw, keys[r].axis, keys[r].index).
struct MultiplierKey {
  std::uint32_t axis;
  std::uint32_t index;
};

/// Draws d = sum_r xi_{d,r} rows.row(r) for d in [0, B). Computed in fixed
/// blocks of draws so the result is independent of `threads`.
Matrix multiplier_draws(const Matrix& rows, std::span<const MultiplierKey> keys,
                        std::size_t B, std::uint64_t seed, unsigned threads);

/// The ceil(level * B)-th smallest value (1-based), i.e. the floor(alpha*B)-th
/// largest when level = 1 - alpha.
double order_statistic_quantile(std::span<const double> values, double level);

/// max_j |scale * d_j / sd_j| per row. `sd` empty means unit scale.
std::vector<double> sup_norms(const Matrix& draws, double scale, const Vector& sd);

/// Fills sup_draws/cv/draws/covariance of `result` from the centered rows.
/// `estimate`, `rate_n`, variances, mode, and scale must already be set.
void run_multiplier_bootstrap(BootstrapResult& result, const Matrix& rows,
                              std::span<const MultiplierKey> keys,
                              const BootstrapOptions& options);

/// Uniform band from a bootstrap result at level 1 - alpha. Constant bands
/// need a raw-mode result, studentized bands a studentized one.
BandResult confidence_band(const BootstrapResult& result, double alpha, BandType type);

}  // namespace exboot
