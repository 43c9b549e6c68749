#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "exboot/array_model.hpp"
#include "exboot/bootstrap_core.hpp"

namespace exboot::density {

enum class KernelFamily { Epanechnikov, Gaussian, Table };

/// Smoothing kernel K with K_h(u) = K(u/h)/h. Tabulated kernels are
/// piecewise linear between nodes and zero outside them.
class Kernel {
 public:
  static Kernel epanechnikov();
  static Kernel gaussian();
  /// Validates that the table integrates to one within 1e-8 and that
  /// moments 1..order-1 vanish within 1e-6.
  static Kernel tabulated(std::vector<double> nodes, std::vector<double> weights, int order);
  /// Fourth-order polynomial kernel (15/32)(3 - 10u^2 + 7u^4) on [-1, 1],
  /// tabulated on `points` nodes.
  static Kernel fourth_order_table(std::size_t points = 4001);

  double operator()(double u) const;
  double scaled(double u, double h) const { return (*this)(u / h) / h; }
  KernelFamily family() const noexcept { return family_; }
  int order() const noexcept { return order_; }
  /// K(u) = 0 for |u| > radius (infinite for the Gaussian).
  double radius() const noexcept { return radius_; }
  /// int u^t K(u) du.
  double moment(int t) const;
  /// Fourier transform int cos(s u) K(u) du (Epanechnikov and Gaussian).
  double fourier(double s) const;
  std::string name() const;

 private:
  Kernel(KernelFamily family, int order, double radius)
      : family_(family), order_(order), radius_(radius) {}

  KernelFamily family_;
  int order_;
  double radius_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

enum class BandwidthRule { SilvermanA, SilvermanB };

BandwidthRule parse_bandwidth_rule(std::string_view text);
std::string_view to_string(BandwidthRule rule) noexcept;

/// Silverman rules of thumb with undersmoothing:
/// (a) 1.06 sd n^exponent, (b) 0.9 min(sd, IQR/1.34) n^exponent, where n is
/// the unit count and sd, IQR are taken over the nonzero Y_ij, i < j.
double bandwidth(const DyadicArray& data, BandwidthRule rule, double exponent = -0.4);

/// Same rules from summary statistics.
double bandwidth_from_stats(double sd, double iqr, std::size_t n, BandwidthRule rule,
                            double exponent = -0.4);

struct DensityEstimate {
  double a_hat = 0.0;
  Vector b_hat;
  Vector f_hat;
};

/// Evenly spaced grid from..to with `points` nodes.
std::vector<double> make_grid(double from, double to, std::size_t points);

/// a_hat = share of nonzero pairs, b_hat(y) = mean over pairs of
/// K_h(y - Y_ij) 1(Y_ij != 0), f_hat = b_hat / a_hat (or b_hat when
/// a_known_one). Pairs i < j only; the data must be symmetric.
DensityEstimate density_estimate(const DyadicArray& data, std::span<const double> grid,
                                 const Kernel& kernel, double h, bool a_known_one);

struct DensityBandOptions {
  double alpha = 0.05;
  std::size_t draws = 500;
  BandType band = BandType::Constant;
  bool a_known_one = false;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct DensityBandResult {
  std::vector<double> grid;
  double h = 0.0;
  double alpha = 0.05;
  BandType band = BandType::Constant;
  bool a_known_one = false;
  double a_hat = 0.0;
  Vector b_hat;
  Vector f_hat;
  Vector sigma_tilde;       ///< standard deviations, n denominator
  Vector s_tilde;           ///< mean of the influence terms over ordered pairs
  double cv_raw = 0.0;
  double cv_stud = std::numeric_limits<double>::quiet_NaN();
  Vector half_width_constant;
  Vector half_width_studentized;  ///< NaN where sigma_tilde == 0
  /// sqrt(n) sup-norm draws behind cv_raw and cv_stud (latter empty if degenerate).
  std::vector<double> sup_raw;
  std::vector<double> sup_stud;
  std::size_t n = 0;
  std::size_t B = 0;
  std::uint64_t seed = 0;

  /// Half-widths of the requested band type.
  const Vector& half_width() const {
    return band == BandType::Constant ? half_width_constant : half_width_studentized;
  }
  bool covers(const Vector& truth, BandType type) const;
};

/// Uniform confidence bands on the grid from the dyadic multiplier
/// bootstrap of the influence terms
/// X_ij = (K_h(y - Y_ij)/a_hat - b_hat(y)/a_hat^2) 1(Y_ij != 0).
DensityBandResult density_band(const DyadicArray& data, std::span<const double> grid,
                               const Kernel& kernel, double h,
                               const DensityBandOptions& options);

}  // namespace exboot::density
