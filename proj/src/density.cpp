#include "exboot/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <functional>
#include <numeric>

#include <boost/math/quadrature/gauss.hpp>

#include "exboot/error.hpp"

namespace exboot::density {

namespace {

constexpr double kEpanechnikovScale = 0.75;

double gauss_legendre(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 15>::integrate(f, a, b);
}

}  // namespace

Kernel Kernel::epanechnikov() { return Kernel(KernelFamily::Epanechnikov, 2, 1.0); }

Kernel Kernel::gaussian() {
  return Kernel(KernelFamily::Gaussian, 2, std::numeric_limits<double>::infinity());
}

Kernel Kernel::tabulated(std::vector<double> nodes, std::vector<double> weights, int order) {
  require(nodes.size() >= 2 && nodes.size() == weights.size(),
          "kernel table needs >= 2 nodes with one weight each");
  require(std::is_sorted(nodes.begin(), nodes.end()) &&
              std::adjacent_find(nodes.begin(), nodes.end()) == nodes.end(),
          "kernel table nodes must be strictly increasing");
  require(order >= 2, "kernel order must be >= 2");
  Kernel k(KernelFamily::Table, order,
           std::max(std::abs(nodes.front()), std::abs(nodes.back())));
  k.nodes_ = std::move(nodes);
  k.weights_ = std::move(weights);
  const double mass = k.moment(0);
  require(std::abs(mass - 1.0) <= 1e-8,
          "kernel table integrates to " + format_double(mass) + ", not 1");
  for (int t = 1; t < order; ++t) {
    const double m = k.moment(t);
    require(std::abs(m) <= 1e-6,
            "kernel moment " + std::to_string(t) + " is " + format_double(m) + ", not 0");
  }
  return k;
}

Kernel Kernel::fourth_order_table(std::size_t points) {
  require(points >= 3, "need at least 3 table points");
  std::vector<double> nodes(points), weights(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double u = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    nodes[i] = u;
    weights[i] = 15.0 / 32.0 * (3.0 - 10.0 * u * u + 7.0 * u * u * u * u);
  }
  // Piecewise-linear interpolation loses O(step^2) mass; restore unit mass.
  double mass = 0.0;
  for (std::size_t i = 1; i < points; ++i)
    mass += 0.5 * (weights[i] + weights[i - 1]) * (nodes[i] - nodes[i - 1]);
  for (auto& w : weights) w /= mass;
  return tabulated(std::move(nodes), std::move(weights), 4);
}

double Kernel::operator()(double u) const {
  switch (family_) {
    case KernelFamily::Epanechnikov:
      return std::abs(u) <= 1.0 ? kEpanechnikovScale * (1.0 - u * u) : 0.0;
    case KernelFamily::Gaussian:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    case KernelFamily::Table: {
      if (u < nodes_.front() || u > nodes_.back()) return 0.0;
      auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u);
      if (it == nodes_.end()) return weights_.back();
      const auto hi = static_cast<std::size_t>(it - nodes_.begin());
      const auto lo = hi - 1;
      const double t = (u - nodes_[lo]) / (nodes_[hi] - nodes_[lo]);
      return (1.0 - t) * weights_[lo] + t * weights_[hi];
    }
  }
  return 0.0;
}

double Kernel::moment(int t) const {
  require(t >= 0, "moment order must be non-negative");
  switch (family_) {
    case KernelFamily::Epanechnikov:
      if (t % 2 == 1) return 0.0;
      return kEpanechnikovScale * (2.0 / (t + 1) - 2.0 / (t + 3));
    case KernelFamily::Gaussian: {
      if (t % 2 == 1) return 0.0;
      double m = 1.0;
      for (int k = t - 1; k > 0; k -= 2) m *= k;
      return m;
    }
    case KernelFamily::Table: {
      // Exact for the piecewise-linear interpolant.
      double total = 0.0;
      for (std::size_t i = 1; i < nodes_.size(); ++i) {
        const double a = nodes_[i - 1], b = nodes_[i];
        const double wa = weights_[i - 1], wb = weights_[i];
        total += gauss_legendre(
            [&](double u) {
              const double s = (u - a) / (b - a);
              return std::pow(u, t) * ((1.0 - s) * wa + s * wb);
            },
            a, b);
      }
      return total;
    }
  }
  return 0.0;
}

double Kernel::fourier(double s) const {
  switch (family_) {
    case KernelFamily::Epanechnikov: {
      if (std::abs(s) < 1e-3) {
        const double s2 = s * s;
        return 1.0 - s2 / 10.0 + s2 * s2 / 280.0;
      }
      return 3.0 * (std::sin(s) - s * std::cos(s)) / (s * s * s);
    }
    case KernelFamily::Gaussian:
      return std::exp(-0.5 * s * s);
    case KernelFamily::Table:
      break;
  }
  throw Error(ErrorCode::InvalidArgument, "no closed-form transform for tabulated kernels");
}

std::string Kernel::name() const {
  switch (family_) {
    case KernelFamily::Epanechnikov: return "epanechnikov";
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Table: return "table";
  }
  return "?";
}

BandwidthRule parse_bandwidth_rule(std::string_view text) {
  if (text == "a" || text == "silverman_a") return BandwidthRule::SilvermanA;
  if (text == "b" || text == "silverman_b") return BandwidthRule::SilvermanB;
  throw Error(ErrorCode::InvalidArgument, "unknown bandwidth rule: " + std::string(text));
}

std::string_view to_string(BandwidthRule rule) noexcept {
  return rule == BandwidthRule::SilvermanA ? "silverman_a" : "silverman_b";
}

double bandwidth_from_stats(double sd, double iqr, std::size_t n, BandwidthRule rule,
                            double exponent) {
  require(n >= 2, "bandwidth needs n >= 2 units");
  if (!(sd > 0.0)) throw Error(ErrorCode::DegenerateData, "sample standard deviation is zero");
  const double rate = std::pow(static_cast<double>(n), exponent);
  const double h = rule == BandwidthRule::SilvermanA
                       ? 1.06 * sd * rate
                       : 0.9 * std::min(sd, iqr / 1.34) * rate;
  if (!(h > 0.0)) throw Error(ErrorCode::DegenerateData, "bandwidth rule gives h = 0");
  return h;
}

namespace {

std::vector<double> nonzero_pairs(const DyadicArray& data) {
  require(data.p() == 1, "density estimation needs scalar dyadic data");
  std::vector<double> y;
  for (std::size_t i = 0; i < data.n(); ++i)
    for (std::size_t j = i + 1; j < data.n(); ++j)
      if (const double v = data.at(i, j)[0]; v != 0.0) y.push_back(v);
  return y;
}

// Type-7 sample quantile of sorted data.
double sorted_quantile(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

double bandwidth(const DyadicArray& data, BandwidthRule rule, double exponent) {
  auto y = nonzero_pairs(data);
  std::sort(y.begin(), y.end());
  if (y.size() < 2 || y.front() == y.back())
    throw Error(ErrorCode::DegenerateData, "bandwidth needs two distinct nonzero values");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(y.size() - 1));
  const double iqr = sorted_quantile(y, 0.75) - sorted_quantile(y, 0.25);
  return bandwidth_from_stats(sd, iqr, data.n(), rule, exponent);
}

std::vector<double> make_grid(double from, double to, std::size_t points) {
  require(points >= 1, "grid needs at least one point");
  if (points == 1) return {from};
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

namespace {

struct PairKernelSums {
  double a_hat = 0.0;
  std::size_t nonzero = 0;
  Vector kernel_sum;               ///< sum over i<j of K_h(y - Y_ij) 1(Y != 0)
  Matrix unit_kernel_sum;          ///< n x grid: sum over j != i
  std::vector<std::size_t> unit_nonzero;
};

void validate(const DyadicArray& data, std::span<const double> grid, double h) {
  require(data.p() == 1, "density estimation needs scalar dyadic data");
  require(data.symmetric(), "density estimation needs symmetric dyadic data");
  require(data.n() >= 3, "density estimation needs n >= 3 units", ErrorCode::TooFewUnits);
  require(!grid.empty(), "grid must be non-empty");
  require(h > 0.0 && std::isfinite(h), "bandwidth must be positive");
}

// Accumulates kernel sums over pairs i < j. Compact kernels only touch grid
// points within radius * h of each observation.
PairKernelSums pair_kernel_sums(const DyadicArray& data, std::span<const double> grid,
                                const Kernel& kernel, double h, bool per_unit) {
  const std::size_t n = data.n();
  const auto m = static_cast<Eigen::Index>(grid.size());
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return grid[a] < grid[b]; });
  std::vector<double> sorted(grid.size());
  for (std::size_t l = 0; l < order.size(); ++l) sorted[l] = grid[order[l]];

  PairKernelSums out;
  out.kernel_sum = Vector::Zero(m);
  if (per_unit) {
    out.unit_kernel_sum = Matrix::Zero(static_cast<Eigen::Index>(n), m);
    out.unit_nonzero.assign(n, 0);
  }
  const double reach = kernel.radius() * h;
  Vector k_vals(m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double y = data.at(i, j)[0];
      if (y == 0.0) continue;
      ++out.nonzero;
      std::size_t lo = 0, hi = sorted.size();
      if (std::isfinite(reach)) {
        lo = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), y - reach) -
                                      sorted.begin());
        hi = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), y + reach) -
                                      sorted.begin());
      }
      for (std::size_t s = lo; s < hi; ++s) {
        const auto l = static_cast<Eigen::Index>(order[s]);
        const double k = kernel.scaled(grid[order[s]] - y, h);
        out.kernel_sum[l] += k;
        if (per_unit) {
          out.unit_kernel_sum(static_cast<Eigen::Index>(i), l) += k;
          out.unit_kernel_sum(static_cast<Eigen::Index>(j), l) += k;
        }
      }
      if (per_unit) {
        ++out.unit_nonzero[i];
        ++out.unit_nonzero[j];
      }
    }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  out.a_hat = static_cast<double>(out.nonzero) / pairs;
  return out;
}

void check_design_points(std::span<const double> grid, double a_hat) {
  if (a_hat >= 1.0) return;
  for (double y : grid)
    require(y != 0.0, "design point 0 is not allowed when the data have mass at zero");
}

}  // namespace

DensityEstimate density_estimate(const DyadicArray& data, std::span<const double> grid,
                                 const Kernel& kernel, double h, bool a_known_one) {
  validate(data, grid, h);
  const auto sums = pair_kernel_sums(data, grid, kernel, h, false);
  check_design_points(grid, sums.a_hat);
  if (sums.a_hat == 0.0 && !a_known_one)
    throw Error(ErrorCode::ZeroMassOnly, "every pair is zero; f = b / a is undefined");
  const double n = static_cast<double>(data.n());
  DensityEstimate out;
  out.a_hat = sums.a_hat;
  out.b_hat = sums.kernel_sum / (0.5 * n * (n - 1.0));
  out.f_hat = a_known_one ? out.b_hat : Vector(out.b_hat / out.a_hat);
  return out;
}

bool DensityBandResult::covers(const Vector& truth, BandType type) const {
  const Vector& hw = type == BandType::Constant ? half_width_constant : half_width_studentized;
  for (Eigen::Index l = 0; l < f_hat.size(); ++l)
    if (!(std::abs(truth[l] - f_hat[l]) <= hw[l])) return false;
  return true;
}

DensityBandResult density_band(const DyadicArray& data, std::span<const double> grid,
                               const Kernel& kernel, double h,
                               const DensityBandOptions& options) {
  validate(data, grid, h);
  require(options.alpha > 0.0 && options.alpha < 1.0, "alpha must lie in (0, 1)");
  const auto sums = pair_kernel_sums(data, grid, kernel, h, true);
  if (sums.nonzero == 0)
    throw Error(ErrorCode::ZeroMassOnly, "no nonzero pairs; nothing to estimate");
  check_design_points(grid, sums.a_hat);

  const std::size_t n = data.n();
  const double nd = static_cast<double>(n);
  const double pairs = 0.5 * nd * (nd - 1.0);
  const auto m = static_cast<Eigen::Index>(grid.size());

  DensityBandResult out;
  out.grid.assign(grid.begin(), grid.end());
  out.h = h;
  out.alpha = options.alpha;
  out.band = options.band;
  out.a_known_one = options.a_known_one;
  out.a_hat = sums.a_hat;
  out.b_hat = sums.kernel_sum / pairs;
  const double a = options.a_known_one ? 1.0 : sums.a_hat;
  out.f_hat = out.b_hat / a;
  out.n = n;
  out.B = options.draws;
  out.seed = options.seed;

  // Influence terms X_ij = K_h/a - (b_hat/a^2) on nonzero pairs.
  const Vector centering = out.b_hat / (a * a);
  out.s_tilde = (sums.kernel_sum / a - static_cast<double>(sums.nonzero) * centering) / pairs;
  Matrix rows(static_cast<Eigen::Index>(n), m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    // W_i = (n-1)^{-1} sum_{j != i} 2 X_ij
    const Vector w = (2.0 / (nd - 1.0)) *
                     (sums.unit_kernel_sum.row(r).transpose() / a -
                      static_cast<double>(sums.unit_nonzero[i]) * centering);
    rows.row(r) = (w - 2.0 * out.s_tilde).transpose();
  }
  out.sigma_tilde = (rows.array().square().colwise().sum() / nd).sqrt().transpose();
  rows /= nd;

  const bool degenerate = (out.sigma_tilde.array() <= 0.0).any();
  if (degenerate && options.band == BandType::Studentized)
    throw Error(ErrorCode::DegenerateScale, "zero scale estimate at some grid point");

  require(options.draws >= 100, "bootstrap needs B >= 100 draws");
  std::vector<MultiplierKey> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = {0, static_cast<std::uint32_t>(i)};
  const Matrix draws = multiplier_draws(rows, keys, options.draws, options.seed, options.threads);
  const double root_n = std::sqrt(nd);
  out.sup_raw = sup_norms(draws, root_n, Vector());
  out.cv_raw = order_statistic_quantile(out.sup_raw, 1.0 - options.alpha);
  out.half_width_constant = Vector::Constant(m, out.cv_raw / root_n);
  if (!degenerate) {
    out.sup_stud = sup_norms(draws, root_n, out.sigma_tilde);
    out.cv_stud = order_statistic_quantile(out.sup_stud, 1.0 - options.alpha);
    out.half_width_studentized = out.sigma_tilde * (out.cv_stud / root_n);
  } else {
    out.half_width_studentized = Vector::Constant(m, std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace exboot::density
