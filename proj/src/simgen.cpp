#include "exboot/simgen.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "exboot/error.hpp"
#include "exboot/joint.hpp"
#include "exboot/parallel.hpp"
#include "exboot/separable.hpp"

namespace exboot::simgen {

namespace {
constexpr std::uint32_t kDataTag = 0x53494D44;  // "SIMD"
constexpr std::uint32_t kBootTag = 0x53494D42;  // "SIMB"
}  // namespace

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::SeparableK2: return "separable_k2";
    case Family::SeparableK3: return "separable_k3";
    case Family::Dyadic: return "dyadic";
    case Family::DyadicDensity: return "dyadic_density";
  }
  return "?";
}

std::string_view to_string(Base base) noexcept {
  switch (base) {
    case Base::Gaussian: return "gaussian";
    case Base::Mixture: return "mixture";
    case Base::Logistic: return "logistic";
  }
  return "?";
}

Family parse_family(std::string_view text) {
  for (auto f : {Family::SeparableK2, Family::SeparableK3, Family::Dyadic, Family::DyadicDensity})
    if (text == to_string(f)) return f;
  throw Error(ErrorCode::InvalidArgument, "unknown design family: " + std::string(text));
}

Base parse_base(std::string_view text) {
  for (auto b : {Base::Gaussian, Base::Mixture, Base::Logistic})
    if (text == to_string(b)) return b;
  throw Error(ErrorCode::InvalidArgument, "unknown latent distribution: " + std::string(text));
}

void DesignSpec::validate() const {
  std::size_t axes = 1;
  switch (family) {
    case Family::SeparableK2: axes = 2; break;
    case Family::SeparableK3: axes = 3; break;
    default: break;
  }
  require(dims.size() == axes, std::string(to_string(family)) + " needs " +
                                   std::to_string(axes) + " size(s)");
  for (auto d : dims) require(d >= 2, "all sizes must be >= 2");
  if (family == Family::DyadicDensity) {
    require(base == Base::Gaussian || base == Base::Logistic,
            "density design takes gaussian or logistic latents");
  } else {
    require(base == Base::Gaussian || base == Base::Mixture,
            "array designs take gaussian or mixture latents");
    require(p >= 1, "p must be >= 1");
  }
}

Matrix sigma_z(std::size_t p) {
  Matrix s(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (Eigen::Index r = 0; r < s.rows(); ++r)
    for (Eigen::Index c = 0; c < s.cols(); ++c)
      s(r, c) = std::pow(4.0, -static_cast<double>(std::abs(r - c)));
  return s;
}

LatentSampler::LatentSampler(std::size_t p, Base base) : base_(base) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_z(p));
  chol_ = llt.matrixL();
}

void LatentSampler::draw(CounterStream& stream, double* out) const {
  const auto p = chol_.rows();
  thread_local std::vector<double> z;
  z.resize(static_cast<std::size_t>(p));
  for (auto& v : z) v = stream.normal();
  double scale = 1.0;
  if (base_ == Base::Mixture && !stream.bernoulli(0.5)) scale = std::numbers::sqrt2;
  for (Eigen::Index r = 0; r < p; ++r) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c <= r; ++c) acc += chol_(r, c) * z[static_cast<std::size_t>(c)];
    out[r] = scale * acc;
  }
}

MultiwayArray gen_separable(const DesignSpec& spec) {
  spec.validate();
  require(spec.family == Family::SeparableK2 || spec.family == Family::SeparableK3,
          "gen_separable needs a separable design");
  const std::size_t K = spec.dims.size();
  const std::size_t p = spec.p;
  const unsigned full = (1u << K) - 1u;
  const double w_low = K == 2 ? 0.25 : 1.0 / 12.0;
  const LatentSampler sampler(p, spec.base);
  CounterStream stream(spec.seed, 0);

  // Latent tables for every proper nonempty subset of axes, in mask order.
  std::vector<std::vector<double>> tables(full);
  for (unsigned e = 1; e < full; ++e) {
    std::size_t count = 1;
    for (std::size_t k = 0; k < K; ++k)
      if (e >> k & 1u) count *= spec.dims[k];
    tables[e].resize(count * p);
    for (std::size_t t = 0; t < count; ++t) sampler.draw(stream, tables[e].data() + t * p);
  }

  std::size_t cells = 1;
  for (auto d : spec.dims) cells *= d;
  std::vector<double> values(cells * p);
  std::vector<double> own(p);
  std::vector<std::size_t> idx(K, 0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double* x = values.data() + cell * p;
    sampler.draw(stream, own.data());
    for (std::size_t j = 0; j < p; ++j) x[j] = 0.5 * own[j];
    for (unsigned e = 1; e < full; ++e) {
      std::size_t sub = 0;
      for (std::size_t k = 0; k < K; ++k)
        if (e >> k & 1u) sub = sub * spec.dims[k] + idx[k];
      const double* z = tables[e].data() + sub * p;
      for (std::size_t j = 0; j < p; ++j) x[j] += w_low * z[j];
    }
    for (std::size_t k = K; k-- > 0;) {
      if (++idx[k] < spec.dims[k]) break;
      idx[k] = 0;
    }
  }
  return MultiwayArray(spec.dims, p, std::move(values));
}

namespace {

// X_ij = (A_i + A_j)/4 + C_ij/2 with `draw(out)` producing one latent.
template <class Draw>
DyadicArray dyadic_from_latents(std::size_t n, std::size_t p, Draw&& draw) {
  std::vector<double> unit(n * p);
  for (std::size_t i = 0; i < n; ++i) draw(unit.data() + i * p);
  std::vector<double> values(n * n * p, 0.0);
  std::vector<double> edge(p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      draw(edge.data());
      double* a = values.data() + (i * n + j) * p;
      double* b = values.data() + (j * n + i) * p;
      for (std::size_t l = 0; l < p; ++l) {
        a[l] = b[l] = 0.25 * (unit[i * p + l] + unit[j * p + l]) + 0.5 * edge[l];
      }
    }
  return DyadicArray(n, p, std::move(values), true);
}

}  // namespace

DyadicArray gen_dyadic(const DesignSpec& spec) {
  spec.validate();
  require(spec.family == Family::Dyadic, "gen_dyadic needs the dyadic design");
  const LatentSampler sampler(spec.p, spec.base);
  CounterStream stream(spec.seed, 0);
  return dyadic_from_latents(spec.dims[0], spec.p,
                             [&](double* out) { sampler.draw(stream, out); });
}

DyadicArray gen_dyadic_density(const DesignSpec& spec) {
  spec.validate();
  require(spec.family == Family::DyadicDensity, "gen_dyadic_density needs the density design");
  CounterStream stream(spec.seed, 0);
  const bool logistic = spec.base == Base::Logistic;
  return dyadic_from_latents(spec.dims[0], 1, [&](double* out) {
    *out = logistic ? stream.logistic() : stream.normal();
  });
}

double density_design_cf(Base base, double t) {
  if (base == Base::Gaussian) return std::exp(-0.375 * t * t / 2.0);
  // Logistic(0,1): pi t / sinh(pi t).
  const auto logistic_cf = [](double s) {
    const double x = std::numbers::pi * s;
    return std::abs(x) < 1e-8 ? 1.0 : x / std::sinh(x);
  };
  const double q = logistic_cf(t / 4.0);
  return q * q * logistic_cf(t / 2.0);
}

Vector surrogate_density(Base base, const density::Kernel& kernel, double h,
                         std::span<const double> grid, double tol) {
  require(h > 0.0, "bandwidth must be positive");
  require(kernel.family() != density::KernelFamily::Table,
          "surrogate density needs a closed-form kernel transform");
  // phi_Y(t) < 1e-16 well before t = 40 for both latent laws.
  constexpr double upper = 40.0;
  Vector out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const double y = grid[l];
    const auto integrand = [&](double t) {
      return std::cos(t * y) * density_design_cf(base, t) * kernel.fourier(h * t);
    };
    out[static_cast<Eigen::Index>(l)] =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, upper, 20,
                                                                       tol) /
        std::numbers::pi;
  }
  return out;
}

const CoverageCell& CoverageReport::cell(double level, BootstrapMode mode) const {
  for (const auto& c : cells)
    if (std::abs(c.level - level) < 1e-12 && c.mode == mode) return c;
  throw Error(ErrorCode::InvalidArgument, "no coverage cell for the requested level/mode");
}

namespace {

// Covered flags for one replication, level-major over (levels x modes).
std::vector<char> replicate(const DesignSpec& spec, const CoverageOptions& options,
                            std::size_t rep) {
  DesignSpec local = spec;
  local.seed = derive_seed(options.seed, kDataTag, rep);
  const std::uint64_t boot_seed = derive_seed(options.seed, kBootTag, rep);
  std::vector<char> hits;
  hits.reserve(options.levels.size() * options.modes.size());

  if (spec.family == Family::DyadicDensity) {
    const DyadicArray data = gen_dyadic_density(local);
    const auto kernel = density::Kernel::epanechnikov();
    const double h = density::bandwidth(data, options.rule);
    const auto grid = density::make_grid(options.grid_from, options.grid_to, options.grid_points);
    density::DensityBandOptions band_options;
    band_options.alpha = 1.0 - options.levels.front();
    band_options.draws = options.draws;
    band_options.a_known_one = options.a_known_one;
    band_options.seed = boot_seed;
    const auto band = density::density_band(data, grid, kernel, h, band_options);
    const Vector truth = surrogate_density(spec.base, kernel, h, grid);
    const double root_n = std::sqrt(static_cast<double>(band.n));
    const Vector gap = (band.f_hat - truth).cwiseAbs() * root_n;
    for (double level : options.levels)
      for (auto mode : options.modes) {
        if (mode == BootstrapMode::Raw) {
          hits.push_back(gap.maxCoeff() <= order_statistic_quantile(band.sup_raw, level));
        } else {
          const bool ok = !band.sup_stud.empty() &&
                          (gap.array() / band.sigma_tilde.array()).maxCoeff() <=
                              order_statistic_quantile(band.sup_stud, level);
          hits.push_back(ok);
        }
      }
    return hits;
  }

  std::vector<BootstrapResult> results;
  if (spec.family == Family::Dyadic) {
    const auto means = joint::polyadic_means(gen_dyadic(local));
    for (auto mode : options.modes) {
      BootstrapOptions bo;
      bo.draws = options.draws;
      bo.mode = mode;
      bo.seed = boot_seed;
      results.push_back(joint::bootstrap(means, bo));
    }
  } else {
    const auto array = gen_separable(local);
    const auto means = separable::leave_one_index_means(array);
    const Vector mean = separable::sample_mean(array);
    for (auto mode : options.modes) {
      BootstrapOptions bo;
      bo.draws = options.draws;
      bo.mode = mode;
      bo.seed = boot_seed;
      results.push_back(separable::bootstrap(means, mean, static_cast<double>(array.min_dim()), bo));
    }
  }
  for (double level : options.levels)
    for (std::size_t m = 0; m < options.modes.size(); ++m) {
      const auto type =
          options.modes[m] == BootstrapMode::Raw ? BandType::Constant : BandType::Studentized;
      const auto band = confidence_band(results[m], 1.0 - level, type);
      hits.push_back(band.contains(Vector::Zero(band.estimate.size())));
    }
  return hits;
}

}  // namespace

CoverageReport coverage_experiment(const DesignSpec& spec, const CoverageOptions& options) {
  spec.validate();
  require(options.reps >= 1, "reps must be >= 1");
  require(!options.levels.empty() && !options.modes.empty(), "need at least one level and mode");
  for (double level : options.levels) require(level > 0.0 && level < 1.0, "levels lie in (0, 1)");
  const auto start = std::chrono::steady_clock::now();

  std::vector<std::vector<char>> hits(options.reps);
  parallel_for(options.reps, options.threads,
               [&](std::size_t rep) { hits[rep] = replicate(spec, options, rep); });

  CoverageReport report;
  report.design = spec;
  report.options = options;
  std::size_t slot = 0;
  for (double level : options.levels)
    for (auto mode : options.modes) {
      CoverageCell c;
      c.level = level;
      c.mode = mode;
      for (const auto& h : hits) c.covered += h[slot] ? 1 : 0;
      c.coverage = static_cast<double>(c.covered) / static_cast<double>(options.reps);
      report.cells.push_back(c);
      ++slot;
    }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace exboot::simgen
