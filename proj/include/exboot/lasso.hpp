#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "exboot/array_model.hpp"
#include "exboot/bootstrap_core.hpp"

namespace exboot::lasso {

/// Outcomes and regressors on a common multiway grid, flattened in cell
/// order. No intercept: center Y and X beforehand if needed.
struct ClusteredRegression {
  std::vector<std::size_t> dims;
  Matrix x;  ///< N x p
  Vector y;  ///< N

  std::size_t rate_n() const;
};

ClusteredRegression make_regression(const MultiwayArray& y, const MultiwayArray& x);

struct SolverOptions {
  double tol = 1e-8;  ///< KKT tolerance
  std::size_t max_iter = 100000;  ///< coordinate sweeps
};

struct LassoFit {
  Vector beta;
  double lambda = 0.0;
  std::vector<std::size_t> active_set;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double kkt_violation = 0.0;
  /// Objective after every sweep.
  std::vector<double> objective_trace;
};

double soft_threshold(double z, double t) noexcept;

/// (1/N)||y - X b||^2 + lambda ||b||_1
double objective(const Matrix& x, const Vector& y, const Vector& beta, double lambda);

/// Largest violation of |(2/N) x_j^T r| <= lambda (b_j = 0) and
/// (2/N) x_j^T r = lambda sign(b_j) (b_j != 0), r = y - X b.
double kkt_violation(const Matrix& x, const Vector& y, const Vector& beta, double lambda);

/// Cyclic coordinate descent with soft-thresholding and active-set sweeps.
/// Returns converged = false when max_iter sweeps pass without meeting the
/// KKT tolerance.
LassoFit solve(const Matrix& x, const Vector& y, double lambda, const SolverOptions& options = {},
               const Vector* warm_start = nullptr);

/// lambda0 = log(n) sqrt(log(p) / n). Rejects p <= 1 and n <= 1.
double preliminary_penalty(double n, double p);

struct PenaltyOptions {
  double eta = 0.1;
  double c = 1.1;
  std::size_t draws = 500;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  SolverOptions solver;
};

struct PenaltyChoice {
  double lambda0 = 0.0;
  double lambda = 0.0;
  double eta = 0.1;
  double c = 1.1;
  std::vector<double> lambda_draws;  ///< sup-norm bootstrap draws
  LassoFit preliminary;
};

/// Preliminary fit at lambda0, residual scores e_i X_i bootstrapped with
/// the separable multiplier engine, lambda = 2c * (1-eta) quantile.
PenaltyChoice tuned_penalty(const ClusteredRegression& problem, const PenaltyOptions& options);

struct FitReport {
  LassoFit fit;
  PenaltyChoice penalty;
  std::optional<double> prediction_norm;
};

/// ||X (b - b_ref)||_{N,2}
double prediction_norm(const Matrix& x, const Vector& beta, const Vector& beta_ref);

FitReport fit(const ClusteredRegression& problem, const PenaltyOptions& options,
              const Vector* beta_ref = nullptr);

}  // namespace exboot::lasso
