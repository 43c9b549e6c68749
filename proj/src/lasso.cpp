#include "exboot/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "exboot/error.hpp"
#include "exboot/separable.hpp"

namespace exboot::lasso {

std::size_t ClusteredRegression::rate_n() const {
  return dims.empty() ? 0 : *std::min_element(dims.begin(), dims.end());
}

ClusteredRegression make_regression(const MultiwayArray& y, const MultiwayArray& x) {
  require(y.p() == 1, "outcome array must have p = 1");
  require(std::equal(y.dims().begin(), y.dims().end(), x.dims().begin(), x.dims().end()),
          "outcome and regressor arrays must share dims");
  ClusteredRegression problem;
  problem.dims.assign(y.dims().begin(), y.dims().end());
  const auto N = static_cast<Eigen::Index>(y.cells());
  const auto p = static_cast<Eigen::Index>(x.p());
  problem.y = Eigen::Map<const Vector>(y.values().data(), N);
  problem.x = Eigen::Map<const Matrix>(x.values().data(), N, p);
  return problem;
}

double soft_threshold(double z, double t) noexcept {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double objective(const Matrix& x, const Vector& y, const Vector& beta, double lambda) {
  const Vector r = y - x * beta;
  return r.squaredNorm() / static_cast<double>(y.size()) + lambda * beta.lpNorm<1>();
}

double kkt_violation(const Matrix& x, const Vector& y, const Vector& beta, double lambda) {
  const Vector grad = (2.0 / static_cast<double>(y.size())) * (x.transpose() * (y - x * beta));
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double v = beta[j] == 0.0 ? std::max(0.0, std::abs(grad[j]) - lambda)
                                    : std::abs(grad[j] - lambda * (beta[j] > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

class CoordinateDescent {
 public:
  CoordinateDescent(const Matrix& x, const Vector& y, double lambda, Vector beta)
      : x_(x), y_(y), lambda_(lambda), beta_(std::move(beta)) {
    const double scale = 2.0 / static_cast<double>(y.size());
    curvature_ = scale * x_.colwise().squaredNorm().transpose();
    residual_ = y_ - x_ * beta_;
    scale_ = scale;
  }

  // One pass over `coords`; returns the largest scaled coefficient change.
  template <class Range>
  double sweep(const Range& coords) {
    double biggest = 0.0;
    for (const auto j : coords) {
      const double d = curvature_[j];
      if (d == 0.0) {
        beta_[j] = 0.0;
        continue;
      }
      const double old = beta_[j];
      const double z = scale_ * x_.col(j).dot(residual_) + d * old;
      const double updated = soft_threshold(z, lambda_) / d;
      if (updated != old) {
        residual_ -= (updated - old) * x_.col(j);
        beta_[j] = updated;
        biggest = std::max(biggest, std::abs(updated - old) * std::sqrt(d));
      }
    }
    return biggest;
  }

  void refresh_residual() { residual_ = y_ - x_ * beta_; }
  const Vector& beta() const { return beta_; }
  double objective() const {
    return residual_.squaredNorm() / static_cast<double>(y_.size()) + lambda_ * beta_.lpNorm<1>();
  }

 private:
  const Matrix& x_;
  const Vector& y_;
  double lambda_;
  double scale_ = 0.0;
  Vector beta_;
  Vector curvature_;
  Vector residual_;
};

}  // namespace

LassoFit solve(const Matrix& x, const Vector& y, double lambda, const SolverOptions& options,
               const Vector* warm_start) {
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and >= 0");
  require(x.rows() == y.size() && x.rows() > 0, "X and y must have matching, non-zero rows");
  require(x.allFinite() && y.allFinite(), "X and y must be finite");
  const auto p = x.cols();
  Vector start = Vector::Zero(p);
  if (warm_start) {
    require(warm_start->size() == p, "warm start has the wrong length");
    start = *warm_start;
  }
  CoordinateDescent cd(x, y, lambda, std::move(start));
  std::vector<Eigen::Index> all(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) all[static_cast<std::size_t>(j)] = j;

  LassoFit fit;
  fit.lambda = lambda;
  const double inner_tol = 0.1 * options.tol;
  while (fit.iterations < options.max_iter) {
    cd.sweep(all);
    ++fit.iterations;
    fit.objective_trace.push_back(cd.objective());

    std::vector<Eigen::Index> active;
    for (auto j : all)
      if (cd.beta()[j] != 0.0) active.push_back(j);
    while (!active.empty() && fit.iterations < options.max_iter) {
      const double change = cd.sweep(active);
      ++fit.iterations;
      fit.objective_trace.push_back(cd.objective());
      if (change <= inner_tol) break;
    }
    cd.refresh_residual();
    fit.kkt_violation = kkt_violation(x, y, cd.beta(), lambda);
    if (fit.kkt_violation <= options.tol) {
      fit.converged = true;
      break;
    }
  }
  fit.beta = cd.beta();
  if (!fit.converged) fit.kkt_violation = kkt_violation(x, y, fit.beta, lambda);
  fit.objective = objective(x, y, fit.beta, lambda);
  for (Eigen::Index j = 0; j < p; ++j)
    if (fit.beta[j] != 0.0) fit.active_set.push_back(static_cast<std::size_t>(j));
  return fit;
}

double preliminary_penalty(double n, double p) {
  require(n > 1.0, "preliminary penalty needs n > 1");
  require(p > 1.0, "preliminary penalty needs p > 1 (log p = 0 gives lambda0 = 0)");
  return std::log(n) * std::sqrt(std::log(p) / n);
}

PenaltyChoice tuned_penalty(const ClusteredRegression& problem, const PenaltyOptions& options) {
  require(options.eta > 0.0 && options.eta < 1.0, "eta must lie in (0, 1)");
  require(options.c > 1.0, "slack constant c must exceed 1");
  require(options.draws >= 100, "bootstrap needs B >= 100 draws");
  const auto N = problem.x.rows();
  const auto p = problem.x.cols();
  PenaltyChoice choice;
  choice.eta = options.eta;
  choice.c = options.c;
  choice.lambda0 = preliminary_penalty(static_cast<double>(problem.rate_n()), static_cast<double>(p));
  choice.preliminary = solve(problem.x, problem.y, choice.lambda0, options.solver);

  const Vector residual = problem.y - problem.x * choice.preliminary.beta;
  std::vector<double> scores(static_cast<std::size_t>(N * p));
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      scores[static_cast<std::size_t>(i * p + j)] = residual[i] * problem.x(i, j);
  const MultiwayArray score_array(problem.dims, static_cast<std::size_t>(p), std::move(scores));

  const auto means = separable::leave_one_index_means(score_array);
  const Vector mean = separable::sample_mean(score_array);
  std::vector<MultiplierKey> keys;
  const Matrix rows = separable::centered_rows(means, mean, keys);
  const Matrix draws = multiplier_draws(rows, keys, options.draws, options.seed, options.threads);
  choice.lambda_draws = sup_norms(draws, 1.0, Vector());
  choice.lambda =
      2.0 * options.c * order_statistic_quantile(choice.lambda_draws, 1.0 - options.eta);
  return choice;
}

double prediction_norm(const Matrix& x, const Vector& beta, const Vector& beta_ref) {
  const Vector diff = x * (beta - beta_ref);
  return std::sqrt(diff.squaredNorm() / static_cast<double>(x.rows()));
}

FitReport fit(const ClusteredRegression& problem, const PenaltyOptions& options,
              const Vector* beta_ref) {
  FitReport report;
  report.penalty = tuned_penalty(problem, options);
  report.fit = solve(problem.x, problem.y, report.penalty.lambda, options.solver,
                     &report.penalty.preliminary.beta);
  if (beta_ref) report.prediction_norm = prediction_norm(problem.x, report.fit.beta, *beta_ref);
  return report;
}

}  // namespace exboot::lasso
