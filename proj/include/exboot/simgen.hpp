#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exboot/array_model.hpp"
#include "exboot/bootstrap_core.hpp"
#include "exboot/density.hpp"
#include "exboot/rng.hpp"

namespace exboot::simgen {

enum class Family { SeparableK2, SeparableK3, Dyadic, DyadicDensity };
/// Gaussian and Mixture for array designs; Gaussian and Logistic for density.
enum class Base { Gaussian, Mixture, Logistic };

std::string_view to_string(Family family) noexcept;
std::string_view to_string(Base base) noexcept;
Family parse_family(std::string_view text);
Base parse_base(std::string_view text);

struct DesignSpec {
  Family family = Family::SeparableK2;
  Base base = Base::Mixture;
  std::size_t p = 25;          ///< ignored for the density design (p = 1)
  std::vector<std::size_t> dims{25, 25};  ///< N per axis, or {n} for dyadic designs
  std::uint64_t seed = 0;

  /// Throws InvalidArgument for combinations outside the enumerated designs.
  void validate() const;
};

/// p x p matrix with entries 4^{-|r-c|}.
Matrix sigma_z(std::size_t p);

/// Latent p-vector: N(0, S) or, for the mixture, N(0, S) w.p. 1/2 and
/// N(0, 2S) otherwise (one Bernoulli per vector).
class LatentSampler {
 public:
  LatentSampler(std::size_t p, Base base);
  void draw(CounterStream& stream, double* out) const;
  std::size_t p() const noexcept { return static_cast<std::size_t>(chol_.rows()); }

 private:
  Matrix chol_;
  Base base_;
};

/// K = 2: X = (Z_{i1,0} + Z_{0,i2})/4 + Z_{i1,i2}/2.
/// K = 3: weight 1/12 on the six lower-order latents, 1/2 on Z_{i1,i2,i3}.
MultiwayArray gen_separable(const DesignSpec& spec);

/// X_ij = (Z_i + Z_j)/4 + Z_ij/2, symmetric, zero diagonal.
DyadicArray gen_dyadic(const DesignSpec& spec);

/// Y_ij = (U_i + U_j)/4 + U_ij/2 with Gaussian or logistic latents.
DyadicArray gen_dyadic_density(const DesignSpec& spec);

/// Characteristic function of Y_ij in the density design.
double density_design_cf(Base base, double t);

/// Surrogate density f_h(y) = int K_h(y - z) f(z) dz by Fourier inversion,
/// (1/pi) int_0^inf cos(ty) phi_Y(t) phi_K(ht) dt, adaptive Gauss-Kronrod.
/// Needs a kernel with a closed-form Fourier transform.
Vector surrogate_density(Base base, const density::Kernel& kernel, double h,
                         std::span<const double> grid, double tol = 1e-12);

struct CoverageOptions {
  std::size_t reps = 500;
  std::size_t draws = 500;
  std::vector<double> levels{0.9, 0.95};
  std::vector<BootstrapMode> modes{BootstrapMode::Raw, BootstrapMode::Studentized};
  std::uint64_t seed = 0;
  unsigned threads = 1;
  // density design only
  density::BandwidthRule rule = density::BandwidthRule::SilvermanA;
  double grid_from = -2.0;
  double grid_to = 2.0;
  std::size_t grid_points = 201;
  bool a_known_one = false;
};

struct CoverageCell {
  double level = 0.9;
  BootstrapMode mode = BootstrapMode::Raw;
  std::size_t covered = 0;
  double coverage = 0.0;
};

struct CoverageReport {
  DesignSpec design;
  CoverageOptions options;
  std::vector<CoverageCell> cells;  ///< levels x modes, level-major
  double wall_seconds = 0.0;

  const CoverageCell& cell(double level, BootstrapMode mode) const;
};

/// Replications run in parallel over `threads`; each uses seeds derived from
/// (options.seed, replication) so the report does not depend on `threads`.
/// Truth is the zero vector for array designs and the surrogate density for
/// the density design.
CoverageReport coverage_experiment(const DesignSpec& spec, const CoverageOptions& options);

}  // namespace exboot::simgen
