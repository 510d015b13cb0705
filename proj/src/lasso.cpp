#include "matns/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "matns/error.hpp"

namespace matns {

RegressionProblem RegressionProblem::make(DenseMatrix design, Vector response) {
  const double n = static_cast<double>(design.rows());
  return make(std::move(design), std::move(response), n);
}

RegressionProblem RegressionProblem::make(DenseMatrix design, Vector response,
                                          double objective_scale) {
  if (design.empty()) throw InvalidDimension("design must be non-empty");
  if (response.size() != design.rows()) {
    throw DimensionMismatch("response length " + std::to_string(response.size()) +
                            " does not match design rows " + std::to_string(design.rows()));
  }
  if (!(objective_scale > 0.0)) throw InvalidArgument("objective_scale must be positive");
  for (double v : design.data())
    if (!std::isfinite(v)) throw NonFiniteEncountered("design has a non-finite entry");
  for (double v : response)
    if (!std::isfinite(v)) throw NonFiniteEncountered("response has a non-finite entry");
  return {std::move(design), std::move(response), objective_scale};
}

CovarianceForm covariance_form(const RegressionProblem& prob) {
  const DenseMatrix& x = prob.design;
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const double inv_s = 1.0 / prob.objective_scale;
  CovarianceForm form{DenseMatrix(d, d), Vector(d, 0.0), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = x.row(i);
    const double yi = prob.response[i];
    for (std::size_t j = 0; j < d; ++j) {
      const double xij = xi[j];
      form.cross[j] += xij * yi;
      for (std::size_t k = j; k < d; ++k) form.gram(j, k) += xij * xi[k];
    }
    form.response_energy += yi * yi;
  }
  for (std::size_t j = 0; j < d; ++j) {
    form.cross[j] *= inv_s;
    for (std::size_t k = j; k < d; ++k) {
      form.gram(j, k) *= inv_s;
      form.gram(k, j) = form.gram(j, k);
    }
  }
  form.response_energy *= inv_s;
  return form;
}

double soft_threshold(double z, double t) noexcept {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double lambda_max(const CovarianceForm& form) {
  double m = 0.0;
  for (double c : form.cross) m = std::max(m, std::abs(c));
  return m;
}

double lambda_max(const RegressionProblem& prob) { return lambda_max(covariance_form(prob)); }

namespace {

double l1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double subgradient_violation(double grad, double theta, double lambda) {
  if (theta > 0.0) return std::abs(grad - lambda);
  if (theta < 0.0) return std::abs(grad + lambda);
  return std::max(0.0, std::abs(grad) - lambda);
}

void check_length(std::size_t want, std::size_t got) {
  if (want != got) {
    throw DimensionMismatch("coefficient vector has length " + std::to_string(got) + ", expected " +
                            std::to_string(want));
  }
}

// Objective from the maintained product g = G theta.
double objective_from_product(const CovarianceForm& form, double lambda,
                              std::span<const double> theta, std::span<const double> g) {
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    quad += theta[j] * g[j];
    lin += theta[j] * form.cross[j];
  }
  return 0.5 * form.response_energy - lin + 0.5 * quad + lambda * l1(theta);
}

double kkt_from_product(const CovarianceForm& form, double lambda, std::span<const double> theta,
                        std::span<const double> g) {
  double worst = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    worst = std::max(worst, subgradient_violation(form.cross[j] - g[j], theta[j], lambda));
  }
  return worst;
}

}  // namespace

double objective(const CovarianceForm& form, double lambda, std::span<const double> theta) {
  check_length(form.dim(), theta.size());
  const Vector g = form.gram * theta;
  return objective_from_product(form, lambda, theta, g);
}

double objective(const RegressionProblem& prob, double lambda, std::span<const double> theta) {
  check_length(prob.design.cols(), theta.size());
  const Vector fit = prob.design * theta;
  double rss = 0.0;
  for (std::size_t i = 0; i < fit.size(); ++i) {
    const double r = prob.response[i] - fit[i];
    rss += r * r;
  }
  return rss / (2.0 * prob.objective_scale) + lambda * l1(theta);
}

double kkt_check(const CovarianceForm& form, double lambda, std::span<const double> theta) {
  check_length(form.dim(), theta.size());
  const Vector g = form.gram * theta;
  return kkt_from_product(form, lambda, theta, g);
}

double kkt_check(const RegressionProblem& prob, double lambda, std::span<const double> theta) {
  const DenseMatrix& x = prob.design;
  check_length(x.cols(), theta.size());
  const Vector fit = x * theta;
  Vector r(fit.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = prob.response[i] - fit[i];
  double worst = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double grad = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) grad += x(i, j) * r[i];
    grad /= prob.objective_scale;
    worst = std::max(worst, subgradient_violation(grad, theta[j], lambda));
  }
  return worst;
}

LassoSolution solve(const CovarianceForm& form, double lambda,
                    std::optional<std::span<const double>> init, const LassoOptions& options) {
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
  if (!(options.tol > 0.0)) throw InvalidArgument("tol must be positive");
  const std::size_t d = form.dim();

  LassoSolution sol;
  sol.lambda = lambda;
  sol.coefficients.assign(d, 0.0);
  if (init) {
    check_length(d, init->size());
    std::copy(init->begin(), init->end(), sol.coefficients.begin());
  }
  Vector& theta = sol.coefficients;
  // Columns with no energy cannot enter the model.
  for (std::size_t j = 0; j < d; ++j)
    if (!(form.gram(j, j) > 0.0)) theta[j] = 0.0;
  Vector g = form.gram * theta;

  while (sol.iterations < options.max_iter) {
    double max_step = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double gjj = form.gram(j, j);
      if (!(gjj > 0.0)) continue;
      const double z = form.cross[j] - g[j] + gjj * theta[j];
      const double updated = soft_threshold(z, lambda) / gjj;
      const double step = updated - theta[j];
      if (step == 0.0) continue;
      if (!std::isfinite(updated)) throw NonFiniteEncountered("coordinate update diverged");
      auto gram_col = form.gram.row(j);  // symmetric, so row j is column j
      for (std::size_t k = 0; k < d; ++k) g[k] += step * gram_col[k];
      theta[j] = updated;
      max_step = std::max(max_step, std::abs(step));
    }
    ++sol.iterations;
    if (options.on_sweep) options.on_sweep(sol.iterations, objective_from_product(form, lambda, theta, g));

    double theta_inf = 0.0;
    for (double t : theta) theta_inf = std::max(theta_inf, std::abs(t));
    if (max_step < options.tol * (1.0 + theta_inf)) {
      // Refresh the product so rounding drift cannot mask a violation.
      g = form.gram * theta;
      sol.max_kkt_violation = kkt_from_product(form, lambda, theta, g);
      if (sol.max_kkt_violation <= 10.0 * options.tol) {
        sol.converged = true;
        return sol;
      }
    }
  }
  sol.max_kkt_violation = kkt_check(form, lambda, theta);
  return sol;
}

LassoSolution solve(const RegressionProblem& prob, double lambda,
                    std::optional<std::span<const double>> init, const LassoOptions& options) {
  return solve(covariance_form(prob), lambda, init, options);
}

LassoPath solve_path(const CovarianceForm& form, std::span<const double> lambdas,
                     const LassoOptions& options) {
  LassoPath path;
  path.lambdas.assign(lambdas.begin(), lambdas.end());
  std::sort(path.lambdas.begin(), path.lambdas.end(), std::greater<>());
  for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
    if (!(path.lambdas[k] >= 0.0)) throw InvalidArgument("lambda grid has a negative entry");
    if (k > 0 && path.lambdas[k] == path.lambdas[k - 1]) {
      throw InvalidArgument("lambda grid has a repeated value");
    }
  }
  path.solutions.reserve(path.lambdas.size());
  for (double lambda : path.lambdas) {
    std::optional<std::span<const double>> warm;
    if (!path.solutions.empty()) warm = std::span<const double>(path.solutions.back().coefficients);
    path.solutions.push_back(solve(form, lambda, warm, options));
  }
  return path;
}

LassoPath solve_path(const RegressionProblem& prob, std::span<const double> lambdas,
                     const LassoOptions& options) {
  return solve_path(covariance_form(prob), lambdas, options);
}

Vector log2_grid(double log2_lo, double log2_hi, double log2_step) {
  if (!(log2_step > 0.0) || !(log2_hi >= log2_lo)) {
    throw InvalidArgument("grid needs step > 0 and hi >= lo");
  }
  const auto count = static_cast<std::size_t>(std::floor((log2_hi - log2_lo) / log2_step + 1e-9)) + 1;
  Vector grid(count);
  for (std::size_t k = 0; k < count; ++k) {
    grid[k] = std::exp2(log2_hi - static_cast<double>(k) * log2_step);
  }
  return grid;
}

}  // namespace matns
