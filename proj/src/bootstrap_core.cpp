#include "exboot/bootstrap_core.hpp"

#include <algorithm>
#include <cmath>

#include "exboot/error.hpp"
#include "exboot/parallel.hpp"
#include "exboot/rng.hpp"

namespace exboot {

namespace {
constexpr std::size_t kDrawBlock = 64;
}

std::string_view to_string(BootstrapMode mode) noexcept {
  return mode == BootstrapMode::Raw ? "raw" : "studentized";
}

BootstrapMode parse_mode(std::string_view text) {
  if (text == "raw") return BootstrapMode::Raw;
  if (text == "studentized" || text == "normalized") return BootstrapMode::Studentized;
  throw Error(ErrorCode::InvalidArgument, "unknown bootstrap mode: " + std::string(text));
}

bool BandResult::contains(const Vector& truth) const {
  for (Eigen::Index j = 0; j < estimate.size(); ++j)
    if (std::abs(truth[j] - estimate[j]) > half_width[j]) return false;
  return true;
}

Matrix multiplier_draws(const Matrix& rows, std::span<const MultiplierKey> keys,
                        std::size_t B, std::uint64_t seed, unsigned threads) {
  require(static_cast<std::size_t>(rows.rows()) == keys.size(),
          "one multiplier key per row required");
  const auto m = rows.rows();
  Matrix draws(static_cast<Eigen::Index>(B), rows.cols());
  const std::size_t blocks = (B + kDrawBlock - 1) / kDrawBlock;
  parallel_for(blocks, threads, [&](std::size_t block) {
    const std::size_t first = block * kDrawBlock;
    const std::size_t count = std::min(kDrawBlock, B - first);
    Matrix xi(static_cast<Eigen::Index>(count), m);
    for (std::size_t d = 0; d < count; ++d)
      for (Eigen::Index r = 0; r < m; ++r)
        xi(static_cast<Eigen::Index>(d), r) =
            normal_at(seed, static_cast<std::uint32_t>(first + d), keys[r].axis, keys[r].index);
    draws.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)).noalias() =
        xi * rows;
  });
  return draws;
}

double order_statistic_quantile(std::span<const double> values, double level) {
  require(!values.empty(), "quantile of an empty sample");
  require(level > 0.0 && level < 1.0, "quantile level must lie in (0, 1)");
  std::vector<double> sorted(values.begin(), values.end());
  const auto B = static_cast<double>(sorted.size());
  // Guard against level*B landing a hair above an integer.
  auto rank = static_cast<std::size_t>(std::ceil(level * B - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   sorted.end());
  return sorted[rank - 1];
}

std::vector<double> sup_norms(const Matrix& draws, double scale, const Vector& sd) {
  std::vector<double> out(static_cast<std::size_t>(draws.rows()));
  for (Eigen::Index d = 0; d < draws.rows(); ++d) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
      double v = std::abs(draws(d, j)) * scale;
      if (sd.size() > 0) v /= sd[j];
      best = std::max(best, v);
    }
    out[static_cast<std::size_t>(d)] = best;
  }
  return out;
}

void run_multiplier_bootstrap(BootstrapResult& result, const Matrix& rows,
                              std::span<const MultiplierKey> keys,
                              const BootstrapOptions& options) {
  require(options.draws >= 100, "bootstrap needs B >= 100 draws");
  require(options.alpha > 0.0 && options.alpha < 1.0, "alpha must lie in (0, 1)");
  result.B = options.draws;
  result.alpha = options.alpha;
  result.seed = options.seed;

  Vector sd;
  if (result.mode == BootstrapMode::Studentized) {
    const Vector& var = result.studentizing_variance();
    for (Eigen::Index j = 0; j < var.size(); ++j)
      if (!(var[j] > 0.0))
        throw Error(ErrorCode::DegenerateScale,
                    "zero variance estimate at coordinate " + std::to_string(j + 1));
    sd = var.array().sqrt();
  }

  Matrix draws = multiplier_draws(rows, keys, options.draws, options.seed, options.threads);
  result.sup_draws = sup_norms(draws, std::sqrt(result.rate_n), sd);
  result.cv = order_statistic_quantile(result.sup_draws, 1.0 - options.alpha);
  if (options.covariance) {
    // sqrt(n) S^MB has conditional covariance n * rows^T rows.
    result.covariance = Matrix(result.rate_n * (rows.transpose() * rows));
  }
  if (options.keep_draws) result.draws = std::move(draws);
}

BandResult confidence_band(const BootstrapResult& result, double alpha, BandType type) {
  const bool studentized = type == BandType::Studentized;
  if (studentized != (result.mode == BootstrapMode::Studentized))
    throw Error(ErrorCode::ModeMismatch,
                std::string(studentized ? "studentized" : "constant") +
                    " band requested from a " + std::string(to_string(result.mode)) +
                    " bootstrap result");
  BandResult band;
  band.estimate = result.estimate;
  band.level = 1.0 - alpha;
  band.type = type;
  band.cv = alpha == result.alpha ? result.cv
                                  : order_statistic_quantile(result.sup_draws, 1.0 - alpha);
  const double root_n = std::sqrt(result.rate_n);
  if (studentized) {
    band.scale = result.studentizing_variance().array().sqrt();
    band.half_width = band.scale * (band.cv / root_n);
  } else {
    band.half_width = Vector::Constant(result.estimate.size(), band.cv / root_n);
  }
  return band;
}

}  // namespace exboot
