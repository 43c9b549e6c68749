#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "exboot/density.hpp"
#include "exboot/error.hpp"
#include "support.hpp"

using namespace exboot;
using namespace exboot::density;

namespace {

// Symmetric scalar dyadic array from the upper triangle y(i, j).
template <class F>
DyadicArray scalar_dyadic(std::size_t n, F&& y) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) v[i * n + j] = v[j * n + i] = y(i, j);
  return DyadicArray(n, 1, std::move(v), true);
}

DyadicArray gaussianish(std::size_t n, std::uint64_t seed, double zero_share = 0.0) {
  const auto z = testing::normals(n * n, seed);
  const auto e = testing::normals(n * n, seed + 2000);
  const auto u = testing::normals(n * n, seed + 1000);
  return scalar_dyadic(n, [&](std::size_t i, std::size_t j) {
    if (zero_share > 0 && std::erfc(-u[i * n + j] / std::sqrt(2.0)) / 2 < zero_share) return 0.0;
    return 0.25 * (z[i] + z[j]) + 0.5 * e[i * n + j];
  });
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("density") {

TEST_CASE("kernels integrate to one with the stated order") {
  for (const auto& k : {Kernel::epanechnikov(), Kernel::gaussian(), Kernel::fourth_order_table()}) {
    CHECK(std::abs(k.moment(0) - 1.0) <= 1e-8);
    for (int t = 1; t < k.order(); ++t) CHECK(std::abs(k.moment(t)) <= 1e-6);
  }
  CHECK(Kernel::fourth_order_table().order() == 4);
  CHECK(Kernel::epanechnikov()(0.0) == 0.75);
  CHECK(Kernel::epanechnikov()(-1.0) == 0.0);
  CHECK(Kernel::epanechnikov()(1.5) == 0.0);
}

TEST_CASE("tabulated kernel validation") {
  CHECK_THROWS_AS(Kernel::tabulated({-1, 0, 1}, {1, 1, 1}, 2), Error);  // mass 2
  CHECK_NOTHROW(Kernel::tabulated({-1, 0, 1}, {0, 1, 0}, 2));
  CHECK_THROWS_AS(Kernel::tabulated({-1, 0, 1}, {0, 1, 0}, 4), Error);  // second moment != 0
  CHECK_THROWS_AS(Kernel::tabulated({0, 1, 2}, {0, 1, 0}, 2), Error);   // mean 1
}

TEST_CASE("kernel Fourier transforms match quadrature") {
  using boost::math::quadrature::gauss_kronrod;
  for (const auto& k : {Kernel::epanechnikov(), Kernel::gaussian()}) {
    const double lim = std::min(k.radius(), 12.0);
    for (double s : {0.0, 1e-4, 0.3, 2.0, 7.5}) {
      const double q =
          gauss_kronrod<double, 61>::integrate([&](double u) { return std::cos(s * u) * k(u); },
                                               -lim, lim, 15, 1e-14);
      CHECK(std::abs(q - k.fourier(s)) <= 1e-12);
    }
  }
}

TEST_CASE("bandwidth rules") {
  CHECK(bandwidth_from_stats(1.0, 2.0, 1024, BandwidthRule::SilvermanA) ==
        doctest::Approx(1.06 * std::pow(1024.0, -0.4)).epsilon(1e-14));
  CHECK(bandwidth_from_stats(1.0, 2.0, 1024, BandwidthRule::SilvermanA) ==
        doctest::Approx(0.066250).epsilon(1e-4));
  // IQR/1.34 > sd: the min picks sd.
  CHECK(bandwidth_from_stats(1.0, 2.0, 100, BandwidthRule::SilvermanB) ==
        doctest::Approx(0.9 * std::pow(100.0, -0.4)));
  CHECK(bandwidth_from_stats(1.0, 0.67, 100, BandwidthRule::SilvermanB) ==
        doctest::Approx(0.9 * 0.5 * std::pow(100.0, -0.4)));
  CHECK(code_of([] { bandwidth_from_stats(0.0, 0.0, 10, BandwidthRule::SilvermanA); }) ==
        ErrorCode::DegenerateData);
  CHECK(parse_bandwidth_rule("b") == BandwidthRule::SilvermanB);
  CHECK(parse_bandwidth_rule("silverman_a") == BandwidthRule::SilvermanA);
}

TEST_CASE("bandwidth is scale equivariant and ignores zeros") {
  const auto d = gaussianish(40, 3, 0.3);
  const auto scaled = scalar_dyadic(40, [&](std::size_t i, std::size_t j) { return 3.0 * d.at(i, j)[0]; });
  for (auto rule : {BandwidthRule::SilvermanA, BandwidthRule::SilvermanB})
    CHECK(bandwidth(scaled, rule) == doctest::Approx(3.0 * bandwidth(d, rule)).epsilon(1e-12));

  // n is the unit count: rule a on a hand-checkable sample.
  const auto small = scalar_dyadic(4, [](std::size_t i, std::size_t j) { return i + j == 1 ? 0.0 : double(i + 2 * j); });
  std::vector<double> nz;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      if (small.at(i, j)[0] != 0) nz.push_back(small.at(i, j)[0]);
  double m = 0, s = 0;
  for (double v : nz) m += v;
  m /= nz.size();
  for (double v : nz) s += (v - m) * (v - m);
  const double sd = std::sqrt(s / (nz.size() - 1));
  CHECK(bandwidth(small, BandwidthRule::SilvermanA) ==
        doctest::Approx(1.06 * sd * std::pow(4.0, -0.4)));
  // nonzero values 4..8: type-7 quartiles 5 and 7, IQR/1.34 < sd
  CHECK(bandwidth(small, BandwidthRule::SilvermanB) ==
        doctest::Approx(0.9 * (2.0 / 1.34) * std::pow(4.0, -0.4)));
}

TEST_CASE("n = 3 hand example") {
  // Y12 = 1, Y13 = 0, Y23 = 2
  const auto d = scalar_dyadic(3, [](std::size_t i, std::size_t j) {
    return i == 0 && j == 1 ? 1.0 : i == 1 && j == 2 ? 2.0 : 0.0;
  });
  const std::vector<double> grid{1.0};
  const auto e = density_estimate(d, grid, Kernel::epanechnikov(), 1.0, false);
  CHECK(e.a_hat == doctest::Approx(2.0 / 3.0));
  CHECK(e.b_hat[0] == doctest::Approx(0.25));
  CHECK(e.f_hat[0] == doctest::Approx(0.375));
  const auto known = density_estimate(d, grid, Kernel::epanechnikov(), 1.0, true);
  CHECK(known.f_hat[0] == doctest::Approx(0.25));
}

TEST_CASE("all mass at zero") {
  const auto d = scalar_dyadic(5, [](std::size_t, std::size_t) { return 0.0; });
  const std::vector<double> grid{0.5, 1.0};
  const auto e = density_estimate(d, grid, Kernel::epanechnikov(), 0.5, true);
  CHECK(e.a_hat == 0.0);
  CHECK(e.b_hat.cwiseAbs().maxCoeff() == 0.0);
  CHECK(code_of([&] { density_estimate(d, grid, Kernel::epanechnikov(), 0.5, false); }) ==
        ErrorCode::ZeroMassOnly);
  DensityBandOptions o;
  CHECK(code_of([&] { density_band(d, grid, Kernel::epanechnikov(), 0.5, o); }) ==
        ErrorCode::ZeroMassOnly);
}

TEST_CASE("no zeros: a_hat = 1 and f_hat = b_hat") {
  const auto d = gaussianish(30, 4);
  const auto grid = make_grid(-1, 1, 21);
  const auto e = density_estimate(d, grid, Kernel::epanechnikov(), 0.3, false);
  CHECK(e.a_hat == 1.0);
  CHECK(e.f_hat == e.b_hat);
}

TEST_CASE("design point zero needs continuous data") {
  const auto grid = make_grid(-1, 1, 3);
  CHECK(grid[1] == 0.0);
  CHECK_NOTHROW(density_estimate(gaussianish(20, 5), grid, Kernel::epanechnikov(), 0.3, false));
  CHECK_THROWS_AS(density_estimate(gaussianish(20, 5, 0.3), grid, Kernel::epanechnikov(), 0.3, false),
                  Error);
}

TEST_CASE("b_hat integrates to a_hat and vanishes far from the data") {
  const auto d = gaussianish(40, 6, 0.25);
  const double h = 0.2;
  const auto grid = make_grid(-4.001, 4.001, 8000);
  const auto e = density_estimate(d, grid, Kernel::epanechnikov(), h, false);
  const double step = grid[1] - grid[0];
  CHECK(e.b_hat.sum() * step == doctest::Approx(e.a_hat).epsilon(1e-4));
  CHECK((e.b_hat.array() >= 0).all());

  double lo = 1e9, hi = -1e9;
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = i + 1; j < 40; ++j)
      if (d.at(i, j)[0] != 0) {
        lo = std::min(lo, d.at(i, j)[0]);
        hi = std::max(hi, d.at(i, j)[0]);
      }
  for (std::size_t l = 0; l < grid.size(); ++l)
    if (grid[l] < lo - h || grid[l] > hi + h) CHECK(e.b_hat[static_cast<Eigen::Index>(l)] == 0.0);
}

TEST_CASE("influence terms are centered under the fitted a_hat") {
  const auto d = gaussianish(35, 7, 0.3);
  const auto grid = make_grid(-1.99, 2.01, 41);
  DensityBandOptions o;
  o.draws = 200;
  const auto r = density_band(d, grid, Kernel::epanechnikov(), 0.35, o);
  CHECK(r.s_tilde.cwiseAbs().maxCoeff() <= 1e-10);
  o.a_known_one = true;
  const auto k = density_band(d, grid, Kernel::epanechnikov(), 0.35, o);
  CHECK(k.s_tilde.cwiseAbs().maxCoeff() > 1e-3);  // a = 1 plugged in: no longer centered
}

TEST_CASE("constant band has one half-width; studentized uses sigma_tilde") {
  const auto d = gaussianish(40, 8);
  const auto grid = make_grid(-1, 1, 11);
  DensityBandOptions o;
  o.seed = 2;
  o.band = BandType::Studentized;
  const auto r = density_band(d, grid, Kernel::epanechnikov(), 0.4, o);
  CHECK((r.half_width_constant.array() == r.half_width_constant[0]).all());
  CHECK(r.half_width_constant[0] == doctest::Approx(r.cv_raw / std::sqrt(40.0)));
  CHECK(testing::max_abs_diff(r.half_width(), r.sigma_tilde * r.cv_stud / std::sqrt(40.0)) <= 1e-15);
  CHECK(r.covers(r.f_hat, BandType::Constant));
}

TEST_CASE("sigma_tilde uses the n denominator") {
  const auto d = gaussianish(12, 9);
  const std::vector<double> grid{0.1};
  const double h = 0.6;
  DensityBandOptions o;
  const auto r = density_band(d, grid, Kernel::epanechnikov(), h, o);
  // Direct transcription of the displayed formulas.
  const auto K = Kernel::epanechnikov();
  const double n = 12;
  double b = 0;
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = i + 1; j < 12; ++j) b += K.scaled(0.1 - d.at(i, j)[0], h);
  b /= n * (n - 1) / 2;
  std::vector<double> w(12, 0.0);
  double s = 0;
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) {
      if (i == j) continue;
      const double x = K.scaled(0.1 - d.at(i, j)[0], h) - b;
      w[i] += 2 * x / (n - 1);
      s += x / (n * (n - 1));
    }
  double v = 0;
  for (double wi : w) v += (wi - 2 * s) * (wi - 2 * s);
  CHECK(r.sigma_tilde[0] == doctest::Approx(std::sqrt(v / n)).epsilon(1e-12));
  CHECK(r.b_hat[0] == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("location equivariance") {
  const auto d = gaussianish(30, 10, 0.2);
  const double c = 0.7;
  const auto shifted = scalar_dyadic(30, [&](std::size_t i, std::size_t j) {
    const double y = d.at(i, j)[0];
    return y == 0.0 ? 0.0 : y + c;
  });
  const auto grid = make_grid(-1.05, 1.05, 14);
  std::vector<double> moved(grid);
  for (auto& y : moved) y += c;
  DensityBandOptions o;
  o.seed = 5;
  o.band = BandType::Studentized;
  const auto a = density_band(d, grid, Kernel::epanechnikov(), 0.4, o);
  const auto b = density_band(shifted, moved, Kernel::epanechnikov(), 0.4, o);
  CHECK(testing::max_abs_diff(a.f_hat, b.f_hat) <= 1e-12);
  CHECK(testing::max_abs_diff(a.half_width_constant, b.half_width_constant) <= 1e-12);
  CHECK(testing::max_abs_diff(a.half_width_studentized, b.half_width_studentized) <= 1e-12);
}

TEST_CASE("degenerate studentization") {
  const auto d = gaussianish(20, 11);
  const std::vector<double> grid{0.0, 50.0};  // nothing near 50
  DensityBandOptions o;
  const auto r = density_band(d, grid, Kernel::epanechnikov(), 0.3, o);
  CHECK(std::isnan(r.cv_stud));
  o.band = BandType::Studentized;
  CHECK(code_of([&] { density_band(d, grid, Kernel::epanechnikov(), 0.3, o); }) ==
        ErrorCode::DegenerateScale);
}

TEST_CASE("bands do not depend on thread count") {
  const auto d = gaussianish(60, 12);
  const auto grid = make_grid(-2, 2, 201);
  DensityBandOptions o;
  o.seed = 9;
  o.threads = 1;
  const auto a = density_band(d, grid, Kernel::gaussian(), 0.3, o);
  o.threads = 4;
  const auto b = density_band(d, grid, Kernel::gaussian(), 0.3, o);
  CHECK(a.sup_raw == b.sup_raw);
  CHECK(a.sup_stud == b.sup_stud);
}

}
