#pragma once

// l1-penalized least squares by cyclic coordinate descent:
//
//   minimize  ||y - X theta||^2 / (2 s) + lambda ||theta||_1
//
// where s is the problem's objective_scale (default: the row count N).

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "matns/linalg.hpp"

namespace matns {

struct RegressionProblem {
  DenseMatrix design;    // N x d
  Vector response;       // N
  double objective_scale = 1.0;

  /// Problem with objective_scale = N. Throws on shape mismatch or non-finite input.
  static RegressionProblem make(DenseMatrix design, Vector response);
  static RegressionProblem make(DenseMatrix design, Vector response, double objective_scale);
};

/// Sufficient statistics of a RegressionProblem: X^T X / s, X^T y / s and
/// y^T y / s. The solver works on this form, so callers that already hold a
/// Gram matrix (nodewise regression, graphical lasso) skip the design.
struct CovarianceForm {
  DenseMatrix gram;
  Vector cross;
  double response_energy = 0.0;

  std::size_t dim() const noexcept { return cross.size(); }
};

CovarianceForm covariance_form(const RegressionProblem& prob);

struct LassoOptions {
  double tol = 1e-7;
  std::size_t max_iter = 10000;
  /// Called after every full sweep with (sweep index, objective value).
  std::function<void(std::size_t, double)> on_sweep;
};

struct LassoSolution {
  Vector coefficients;
  double lambda = 0.0;
  std::size_t iterations = 0;
  double max_kkt_violation = 0.0;
  bool converged = false;
};

struct LassoPath {
  Vector lambdas;  // strictly descending
  std::vector<LassoSolution> solutions;
};

/// sign(z) max(|z| - t, 0); exact ties map to zero.
double soft_threshold(double z, double t) noexcept;

/// Smallest lambda with an all-zero solution: max_j |x_j^T y / s|.
double lambda_max(const CovarianceForm& form);
double lambda_max(const RegressionProblem& prob);

double objective(const RegressionProblem& prob, double lambda, std::span<const double> theta);
double objective(const CovarianceForm& form, double lambda, std::span<const double> theta);

/// Largest subgradient violation. Evaluated from residuals r = y - X theta.
double kkt_check(const RegressionProblem& prob, double lambda, std::span<const double> theta);
double kkt_check(const CovarianceForm& form, double lambda, std::span<const double> theta);

/// Converged when the largest coordinate step is below tol (1 + ||theta||_inf)
/// and the KKT violation is at most 10 tol. Hitting max_iter returns the last
/// iterate with converged = false. Throws NonFiniteEncountered.
LassoSolution solve(const CovarianceForm& form, double lambda,
                    std::optional<std::span<const double>> init = std::nullopt,
                    const LassoOptions& options = {});
LassoSolution solve(const RegressionProblem& prob, double lambda,
                    std::optional<std::span<const double>> init = std::nullopt,
                    const LassoOptions& options = {});

/// Solves at each lambda in descending order, warm-starting from the previous
/// solution. Throws InvalidArgument on repeated or negative lambdas.
LassoPath solve_path(const CovarianceForm& form, std::span<const double> lambdas,
                     const LassoOptions& options = {});
LassoPath solve_path(const RegressionProblem& prob, std::span<const double> lambdas,
                     const LassoOptions& options = {});

/// 2^lo, 2^(lo+step), ..., 2^hi in descending order.
Vector log2_grid(double log2_lo, double log2_hi, double log2_step);

}  // namespace matns
