#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "exboot/error.hpp"
#include "exboot/report.hpp"
#include "exboot/simgen.hpp"
#include "support.hpp"

using namespace exboot;
using namespace exboot::simgen;

namespace {

DesignSpec spec(Family f, Base b, std::size_t p, std::vector<std::size_t> dims, std::uint64_t seed) {
  DesignSpec s;
  s.family = f;
  s.base = b;
  s.p = p;
  s.dims = std::move(dims);
  s.seed = seed;
  return s;
}

// Per-coordinate mean and variance over a flat list of p-vectors.
std::pair<Vector, Vector> moments(std::span<const double> v, std::size_t p) {
  const auto rows = static_cast<Eigen::Index>(v.size() / p);
  const Eigen::Map<const Matrix> m(v.data(), rows, static_cast<Eigen::Index>(p));
  const Vector mean = m.colwise().mean().transpose();
  const Vector var = (m.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
  return {mean, var};
}

double logistic_pdf(double x, double s) {
  const double e = std::exp(-std::abs(x) / s);
  return e / (s * (1 + e) * (1 + e));
}

}  // namespace

TEST_SUITE("simgen") {

TEST_CASE("sigma_z") {
  CHECK(sigma_z(1)(0, 0) == 1.0);
  const Matrix s2 = sigma_z(2);
  CHECK(s2(0, 1) == 0.25);
  CHECK(s2(1, 0) == 0.25);
  CHECK(sigma_z(3)(0, 2) == 0.0625);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_z(25));
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("design validation") {
  CHECK_THROWS_AS(spec(Family::SeparableK2, Base::Logistic, 2, {5, 5}, 0).validate(), Error);
  CHECK_THROWS_AS(spec(Family::SeparableK3, Base::Gaussian, 2, {5, 5}, 0).validate(), Error);
  CHECK_THROWS_AS(spec(Family::DyadicDensity, Base::Mixture, 1, {5}, 0).validate(), Error);
  CHECK_THROWS_AS(spec(Family::Dyadic, Base::Gaussian, 2, {1}, 0).validate(), Error);
  CHECK(parse_family("separable_k3") == Family::SeparableK3);
  CHECK(parse_base("logistic") == Base::Logistic);
}

TEST_CASE("K = 2 Gaussian: mean zero, variance 0.375, Sigma_Z correlation") {
  const auto a = gen_separable(spec(Family::SeparableK2, Base::Gaussian, 3, {150, 150}, 1));
  const auto [mean, var] = moments(a.values(), 3);
  // Cluster dependence inflates the error of the mean; 0.1 is > 5 sd here.
  CHECK(mean.cwiseAbs().maxCoeff() < 0.1);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(var[j] == doctest::Approx(0.375).epsilon(0.06));
  // Neighbouring coordinates correlate at 1/4.
  double c = 0;
  for (std::size_t k = 0; k < a.cells(); ++k) c += a.cell(k)[0] * a.cell(k)[1];
  CHECK(c / a.cells() == doctest::Approx(0.375 * 0.25).epsilon(0.15));
}

TEST_CASE("K = 3 and mixture variances") {
  const auto k3 = gen_separable(spec(Family::SeparableK3, Base::Gaussian, 1, {40, 40, 40}, 2));
  CHECK(moments(k3.values(), 1).second[0] == doctest::Approx(6.0 / 144 + 0.25).epsilon(0.06));
  // E[scale^2] = (1 + 2) / 2 for the mixture.
  const auto mix = gen_separable(spec(Family::SeparableK2, Base::Mixture, 1, {200, 200}, 3));
  CHECK(moments(mix.values(), 1).second[0] == doctest::Approx(1.5 * 0.375).epsilon(0.06));
}

TEST_CASE("same seed, same array; other seed, other array") {
  const auto s = spec(Family::SeparableK2, Base::Mixture, 4, {6, 7}, 9);
  const auto a = gen_separable(s);
  const auto b = gen_separable(s);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  auto t = s;
  t.seed = 10;
  CHECK(gen_separable(t).values()[0] != a.values()[0]);
}

TEST_CASE("exchangeability: relabeled rows look alike") {
  // Row means along axis 0 should share a law across labels: compare the
  // spread of the first and second halves of rows.
  const auto a = gen_separable(spec(Family::SeparableK2, Base::Gaussian, 1, {200, 100}, 4));
  double first = 0, second = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    double m = 0;
    for (std::size_t j = 0; j < 100; ++j) m += a.cell(i * 100 + j)[0];
    m /= 100;
    (i < 100 ? first : second) += m * m;
  }
  // Both estimate Var(row mean) ~ 1/16 + small; F-ratio within 100-dof bounds.
  CHECK(first / second == doctest::Approx(1.0).epsilon(0.5));
}

TEST_CASE("dyadic designs are exactly symmetric") {
  const auto d = gen_dyadic(spec(Family::Dyadic, Base::Mixture, 3, {30}, 5));
  CHECK(d.symmetric());
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j)
      for (std::size_t l = 0; l < 3; ++l) CHECK(d.at(i, j)[l] == d.at(j, i)[l]);
  const auto g = gen_dyadic(spec(Family::Dyadic, Base::Gaussian, 1, {400}, 6));
  std::vector<double> upper;
  for (std::size_t i = 0; i < 400; ++i)
    for (std::size_t j = i + 1; j < 400; ++j) upper.push_back(g.at(i, j)[0]);
  const auto [mean, var] = moments(upper, 1);
  CHECK(std::abs(mean[0]) < 0.05);
  CHECK(var[0] == doctest::Approx(0.375).epsilon(0.06));
}

TEST_CASE("density design: Gaussian variance and logistic tails") {
  auto pairs = [](const DyadicArray& d) {
    std::vector<double> v;
    for (std::size_t i = 0; i < d.n(); ++i)
      for (std::size_t j = i + 1; j < d.n(); ++j) v.push_back(d.at(i, j)[0]);
    return v;
  };
  const auto g = pairs(gen_dyadic_density(spec(Family::DyadicDensity, Base::Gaussian, 1, {500}, 7)));
  const auto l = pairs(gen_dyadic_density(spec(Family::DyadicDensity, Base::Logistic, 1, {500}, 8)));
  auto kurt = [](const std::vector<double>& v) {
    double m = 0, m2 = 0, m4 = 0;
    for (double x : v) m += x;
    m /= v.size();
    for (double x : v) {
      m2 += (x - m) * (x - m);
      m4 += std::pow(x - m, 4);
    }
    m2 /= v.size();
    return m4 / v.size() / (m2 * m2);
  };
  CHECK(moments(g, 1).second[0] == doctest::Approx(0.375).epsilon(0.06));
  CHECK(moments(l, 1).second[0] ==
        doctest::Approx(0.375 * std::numbers::pi * std::numbers::pi / 3).epsilon(0.08));
  // Excess kurtosis: 0 for Gaussian, 1.2 (2/256 + 1/16) / 0.375^2 = 0.6 here.
  CHECK(kurt(l) > kurt(g) + 0.3);
}

TEST_CASE("surrogate density, Gaussian latents: Fourier vs direct convolution") {
  using boost::math::quadrature::gauss_kronrod;
  const auto K = density::Kernel::epanechnikov();
  const std::vector<double> grid{-2.0, -0.7, 0.0, 0.31, 1.5};
  for (double h : {0.05, 0.2, 0.6}) {
    const Vector f = surrogate_density(Base::Gaussian, K, h, grid);
    for (std::size_t l = 0; l < grid.size(); ++l) {
      const double y = grid[l];
      const double direct = gauss_kronrod<double, 61>::integrate(
          [&](double u) {
            const double z = y - h * u;
            return K(u) * std::exp(-z * z / 0.75) / std::sqrt(0.75 * std::numbers::pi);
          },
          -1.0, 1.0, 15, 1e-14);
      CHECK(std::abs(f[static_cast<Eigen::Index>(l)] - direct) <= 1e-10);
    }
  }
}

TEST_CASE("surrogate density, logistic latents: Fourier vs spatial convolution") {
  using boost::math::quadrature::gauss_kronrod;
  using GK = gauss_kronrod<double, 31>;
  const auto K = density::Kernel::epanechnikov();
  const double h = 0.15;
  const std::vector<double> grid{0.0, 1.2};
  const Vector f = surrogate_density(Base::Logistic, K, h, grid);
  // (U_i + U_j)/4 has the density of a sum of two Logistic(0, 1/4).
  auto pair_sum = [&](double a) {
    return GK::integrate([&](double t) { return logistic_pdf(t, 0.25) * logistic_pdf(a - t, 0.25); },
                         -12.0, 12.0, 12, 1e-13);
  };
  auto density = [&](double y) {
    return GK::integrate([&](double a) { return pair_sum(a) * logistic_pdf(y - a, 0.5); }, -14.0,
                         14.0, 12, 1e-12);
  };
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const double direct = GK::integrate([&](double u) { return K(u) * density(grid[l] - h * u); },
                                        -1.0, 1.0, 8, 1e-11);
    CHECK(std::abs(f[static_cast<Eigen::Index>(l)] - direct) <= 1e-9);
  }
}

TEST_CASE("single replication gives a 0/1 frequency") {
  CoverageOptions o;
  o.reps = 1;
  o.draws = 100;
  const auto r = coverage_experiment(spec(Family::Dyadic, Base::Mixture, 5, {12}, 0), o);
  REQUIRE(r.cells.size() == 4);
  for (const auto& c : r.cells) CHECK((c.coverage == 0.0 || c.coverage == 1.0));
}

TEST_CASE("coverage reports do not depend on thread count") {
  CoverageOptions o;
  o.reps = 12;
  o.draws = 100;
  o.seed = 4;
  for (const auto& s : {spec(Family::SeparableK2, Base::Mixture, 5, {8, 9}, 0),
                        spec(Family::SeparableK3, Base::Gaussian, 3, {5, 5, 5}, 0),
                        spec(Family::DyadicDensity, Base::Logistic, 1, {40}, 0)}) {
    o.threads = 1;
    const auto a = report::coverage_json(coverage_experiment(s, o)).dump();
    o.threads = 3;
    const auto b = report::coverage_json(coverage_experiment(s, o)).dump();
    CHECK(a == b);
  }
}

}
