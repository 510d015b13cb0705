#include "matns/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "matns/error.hpp"

namespace matns {

std::string to_string(CombineRule rule) { return rule == CombineRule::And ? "and" : "or"; }

CombineRule parse_rule(const std::string& name) {
  if (name == "and" || name == "AND") return CombineRule::And;
  if (name == "or" || name == "OR") return CombineRule::Or;
  throw InvalidArgument("unknown combine rule '" + name + "' (expected and or or)");
}

std::string to_string(CvMode mode) { return mode == CvMode::Global ? "global" : "individual"; }

CvMode parse_cv_mode(const std::string& name) {
  if (name == "global") return CvMode::Global;
  if (name == "individual") return CvMode::Individual;
  throw InvalidArgument("unknown cv mode '" + name + "' (expected global or individual)");
}

namespace {

constexpr double kMinNodeEnergy = 1e-14;

std::vector<std::size_t> others(std::size_t dim, std::size_t a) {
  std::vector<std::size_t> idx;
  idx.reserve(dim - 1);
  for (std::size_t b = 0; b < dim; ++b)
    if (b != a) idx.push_back(b);
  return idx;
}

// Gram and effective dimension for one axis, plus the factor mapping the
// Gram-scale loss onto the requested objective scale.
struct AxisGram {
  DenseMatrix gram;
  double rescale = 1.0;
};

AxisGram axis_gram(const MatrixDataset& d, Axis axis, LossScaling scaling) {
  const GramMatrix g = gram_for_axis(d, axis);
  const double other = static_cast<double>(axis == Axis::Row ? d.q : d.p);
  return {g.matrix, scaling == LossScaling::Stacked ? 1.0 : other};
}

NodeRegressionResult embed(std::size_t dim, std::size_t a, const LassoSolution& sol) {
  NodeRegressionResult r;
  r.node = a;
  r.lambda_used = sol.lambda;
  r.converged = sol.converged;
  r.coefficients.assign(dim, 0.0);
  std::size_t k = 0;
  for (std::size_t b = 0; b < dim; ++b) {
    if (b == a) continue;
    r.coefficients[b] = sol.coefficients[k++];
    if (r.coefficients[b] != 0.0) r.support.push_back(b);
  }
  return r;
}

NodeRegressionResult empty_node(std::size_t dim, std::size_t a, double lambda, bool converged) {
  NodeRegressionResult r;
  r.node = a;
  r.lambda_used = lambda;
  r.converged = converged;
  r.coefficients.assign(dim, 0.0);
  return r;
}

void warn_if_raw(const MatrixDataset& d, std::vector<std::string>& warnings) {
  if (!d.standardized) warnings.emplace_back("dataset is not standardized");
}

}  // namespace

CovarianceForm node_problem(const DenseMatrix& gram, std::size_t a, double rescale) {
  const std::size_t dim = gram.rows();
  const auto idx = others(dim, a);
  CovarianceForm form{submatrix(gram, idx, idx), Vector(idx.size()), gram(a, a) * rescale};
  for (std::size_t k = 0; k < idx.size(); ++k) form.cross[k] = gram(idx[k], a) * rescale;
  if (rescale != 1.0) form.gram *= rescale;
  return form;
}

EdgeSet combine_supports(std::size_t dimension, const std::vector<NodeRegressionResult>& nodes,
                         CombineRule rule) {
  std::vector<std::vector<char>> in(dimension, std::vector<char>(dimension, 0));
  for (const auto& node : nodes)
    for (std::size_t b : node.support) in[node.node][b] = 1;
  EdgeSet edges(dimension);
  for (std::size_t a = 0; a < dimension; ++a) {
    for (std::size_t b = a + 1; b < dimension; ++b) {
      const bool keep = rule == CombineRule::And ? (in[a][b] && in[b][a]) : (in[a][b] || in[b][a]);
      if (keep) edges.insert(a, b);
    }
  }
  return edges;
}

MatrixNsFit matrixns_fit(const MatrixDataset& d, Axis axis, std::span<const double> node_lambdas,
                         CombineRule rule, const MatrixNsOptions& options) {
  const AxisGram ag = axis_gram(d, axis, options.scaling);
  const std::size_t dim = ag.gram.rows();
  if (node_lambdas.size() != dim) {
    throw DimensionMismatch("expected " + std::to_string(dim) + " node lambdas, got " +
                            std::to_string(node_lambdas.size()));
  }
  MatrixNsFit fit;
  warn_if_raw(d, fit.warnings);
  fit.nodes.reserve(dim);
  for (std::size_t a = 0; a < dim; ++a) {
    const double lambda = node_lambdas[a];
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    if (dim == 1 || ag.gram(a, a) <= kMinNodeEnergy) {
      if (dim > 1) fit.warnings.push_back("node " + std::to_string(a + 1) + " has zero variance; left isolated");
      fit.nodes.push_back(empty_node(dim, a, lambda, true));
      continue;
    }
    const LassoSolution sol = solve(node_problem(ag.gram, a, ag.rescale), lambda, std::nullopt, options.lasso);
    if (!sol.converged) {
      fit.warnings.push_back("node " + std::to_string(a + 1) + ": lasso did not converge at lambda " +
                             std::to_string(lambda) + "; neighborhood left empty");
      fit.nodes.push_back(empty_node(dim, a, lambda, false));
      continue;
    }
    fit.nodes.push_back(embed(dim, a, sol));
  }
  fit.edges = combine_supports(dim, fit.nodes, rule);
  return fit;
}

MatrixNsFit matrixns_fit(const MatrixDataset& d, Axis axis, double lambda, CombineRule rule,
                         const MatrixNsOptions& options) {
  const std::size_t dim = axis == Axis::Row ? d.p : d.q;
  const Vector lambdas(dim, lambda);
  return matrixns_fit(d, axis, lambdas, rule, options);
}

EstimatePath matrixns_path(const MatrixDataset& d, Axis axis, std::span<const double> lambdas,
                           CombineRule rule, const MatrixNsOptions& options) {
  const AxisGram ag = axis_gram(d, axis, options.scaling);
  const std::size_t dim = ag.gram.rows();
  Vector grid(lambdas.begin(), lambdas.end());
  std::sort(grid.begin(), grid.end(), std::greater<>());
  for (double l : grid)
    if (!(l > 0.0)) throw InvalidArgument("lambda must be positive");

  EstimatePath path;
  warn_if_raw(d, path.warnings);
  // node_results[k][a]: node a at grid[k]
  std::vector<std::vector<NodeRegressionResult>> node_results(grid.size());
  for (auto& v : node_results) v.reserve(dim);

  for (std::size_t a = 0; a < dim; ++a) {
    if (dim == 1 || ag.gram(a, a) <= kMinNodeEnergy) {
      if (dim > 1) path.warnings.push_back("node " + std::to_string(a + 1) + " has zero variance; left isolated");
      for (std::size_t k = 0; k < grid.size(); ++k) node_results[k].push_back(empty_node(dim, a, grid[k], true));
      continue;
    }
    const LassoPath lp = solve_path(node_problem(ag.gram, a, ag.rescale), grid, options.lasso);
    std::size_t failures = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (lp.solutions[k].converged) {
        node_results[k].push_back(embed(dim, a, lp.solutions[k]));
      } else {
        ++failures;
        node_results[k].push_back(empty_node(dim, a, grid[k], false));
      }
    }
    if (failures > 0) {
      path.warnings.push_back("node " + std::to_string(a + 1) + ": " + std::to_string(failures) + " of " +
                              std::to_string(grid.size()) + " path solves did not converge");
    }
  }
  path.points.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    path.points.push_back({grid[k], combine_supports(dim, node_results[k], rule)});
  }
  return path;
}

Vector population_coefficients(const SpdMatrix& u, std::size_t a) {
  const std::size_t p = u.dim();
  if (a >= p) throw InvalidArgument("node index out of range");
  const DenseMatrix omega = u.inverse();
  Vector theta;
  theta.reserve(p - 1);
  for (std::size_t b = 0; b < p; ++b)
    if (b != a) theta.push_back(-omega(b, a) / omega(a, a));
  return theta;
}

CvResult cv_tune(const MatrixDataset& data, Axis axis, std::size_t folds,
                 std::span<const double> lambdas, CvMode mode, Rng& rng,
                 const MatrixNsOptions& options) {
  if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
  if (data.n < folds) {
    throw InsufficientSamples("n = " + std::to_string(data.n) + " observations cannot fill " +
                              std::to_string(folds) + " folds");
  }
  const MatrixDataset d = axis == Axis::Row ? data : transpose_dataset(data);
  const std::size_t dim = d.p;

  CvResult res;
  res.mode = mode;
  res.lambdas.assign(lambdas.begin(), lambdas.end());
  std::sort(res.lambdas.begin(), res.lambdas.end(), std::greater<>());
  const std::size_t nl = res.lambdas.size();
  if (nl == 0) throw InvalidArgument("empty lambda grid");

  std::vector<std::size_t> perm(d.n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = d.n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  res.fold_of.assign(d.n, 0);
  for (std::size_t i = 0; i < d.n; ++i) res.fold_of[perm[i]] = i % folds;

  res.node_error = DenseMatrix(dim, nl);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < d.n; ++i) (res.fold_of[i] == f ? test : train).push_back(i);
    const GramMatrix train_gram = gram_row(d, train);
    const GramMatrix test_gram = gram_row(d, test);
    const DenseMatrix test_scatter = test_gram.matrix * test_gram.normalizer;
    const double rescale = options.scaling == LossScaling::Stacked ? 1.0 : static_cast<double>(d.q);

    for (std::size_t a = 0; a < dim; ++a) {
      std::vector<Vector> weights(nl, Vector(dim, 0.0));
      for (auto& w : weights) w[a] = 1.0;
      if (dim > 1 && train_gram.matrix(a, a) > kMinNodeEnergy) {
        const LassoPath lp = solve_path(node_problem(train_gram.matrix, a, rescale), res.lambdas, options.lasso);
        for (std::size_t k = 0; k < nl; ++k) {
          std::size_t j = 0;
          for (std::size_t b = 0; b < dim; ++b)
            if (b != a) weights[k][b] = -lp.solutions[k].coefficients[j++];
        }
      }
      // Held-out residual energy: w^T (sum_test X X^T) w with w = e_a - theta.
      for (std::size_t k = 0; k < nl; ++k) {
        const Vector sw = test_scatter * weights[k];
        res.node_error(a, k) += std::inner_product(sw.begin(), sw.end(), weights[k].begin(), 0.0);
      }
    }
  }

  res.global_error.assign(nl, 0.0);
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t k = 0; k < nl; ++k) res.global_error[k] += res.node_error(a, k);

  const auto best = std::min_element(res.global_error.begin(), res.global_error.end());
  res.global_lambda = res.lambdas[static_cast<std::size_t>(best - res.global_error.begin())];
  res.node_lambdas.resize(dim);
  for (std::size_t a = 0; a < dim; ++a) {
    std::size_t arg = 0;
    for (std::size_t k = 1; k < nl; ++k)
      if (res.node_error(a, k) < res.node_error(a, arg)) arg = k;
    res.node_lambdas[a] = res.lambdas[arg];
  }
  return res;
}

double glasso_kkt(const DenseMatrix& s, const SpdMatrix& theta, double lambda) {
  const DenseMatrix w = theta.inverse();
  const std::size_t p = s.rows();
  double worst = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    worst = std::max(worst, std::abs(w(i, i) - s(i, i)));
    for (std::size_t j = 0; j < p; ++j) {
      if (i == j) continue;
      const double g = w(i, j) - s(i, j);
      const double t = theta.matrix()(i, j);
      double v;
      if (t > 0.0) v = std::abs(g - lambda);
      else if (t < 0.0) v = std::abs(g + lambda);
      else v = std::max(0.0, std::abs(g) - lambda);
      worst = std::max(worst, v);
    }
  }
  return worst;
}

namespace {

// Precision estimate implied by the current covariance and column regressions.
DenseMatrix precision_from_columns(const DenseMatrix& w, const DenseMatrix& beta) {
  const std::size_t p = w.rows();
  DenseMatrix theta(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    double quad = 0.0;
    for (std::size_t b = 0; b < p; ++b)
      if (b != j) quad += w(b, j) * beta(b, j);
    const double tjj = 1.0 / (w(j, j) - quad);
    theta(j, j) = tjj;
    for (std::size_t b = 0; b < p; ++b)
      if (b != j) theta(b, j) = -beta(b, j) * tjj;
  }
  // Average the two column estimates of each pair; a zero in either keeps the pair at zero.
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      const double v = (theta(i, j) == 0.0 || theta(j, i) == 0.0) ? 0.0 : 0.5 * (theta(i, j) + theta(j, i));
      theta(i, j) = v;
      theta(j, i) = v;
    }
  }
  return theta;
}

}  // namespace

GlassoSolution graphical_lasso(const DenseMatrix& s, double lambda, const GlassoSolution* warm,
                               const GlassoOptions& options) {
  if (!s.is_square()) throw DimensionMismatch("graphical_lasso needs a square input");
  if (asymmetry(s) > 1e-10) throw NotSymmetric("graphical_lasso input is not symmetric");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
  const std::size_t p = s.rows();
  for (std::size_t i = 0; i < p; ++i)
    if (!(s(i, i) > 0.0)) throw ZeroDiagonal("graphical_lasso input has a non-positive diagonal");
  if (lambda == 0.0) {
    try {
      (void)cholesky(s);
    } catch (const NotPositiveDefinite&) {
      throw SingularInput("lambda = 0 requires a nonsingular input");
    }
  }

  GlassoSolution out;
  out.lambda = lambda;
  if (p == 1) {
    out.theta = SpdMatrix(DenseMatrix{{1.0 / s(0, 0)}});
    out.covariance = s;
    out.converged = true;
    out.iterations = 1;
    return out;
  }

  // beta(b, j): coefficient of b in the column-j regression.
  DenseMatrix w(p, p);
  DenseMatrix beta(p, p);
  if (warm != nullptr && warm->covariance.rows() == p) {
    w = warm->covariance;
    const DenseMatrix& t = warm->theta.matrix();
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t b = 0; b < p; ++b)
        if (b != j) beta(b, j) = -t(b, j) / t(j, j);
  }
  for (std::size_t i = 0; i < p; ++i) w(i, i) = s(i, i);

  LassoOptions inner;
  inner.tol = options.inner_tol;
  inner.max_iter = options.inner_max_iter;

  bool have_pd = false;
  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    for (std::size_t j = 0; j < p; ++j) {
      const auto idx = others(p, j);
      CovarianceForm form{submatrix(w, idx, idx), Vector(p - 1), s(j, j)};
      Vector init(p - 1);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        form.cross[k] = s(idx[k], j);
        init[k] = beta(idx[k], j);
      }
      const LassoSolution sol = solve(form, lambda, std::span<const double>(init), inner);
      const Vector w12 = form.gram * sol.coefficients;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        beta(idx[k], j) = sol.coefficients[k];
        w(idx[k], j) = w12[k];
        w(j, idx[k]) = w12[k];
      }
    }
    out.iterations = sweep;
    try {
      SpdMatrix theta(precision_from_columns(w, beta));
      out.dual_gap_or_kkt = glasso_kkt(s, theta, lambda);
      out.theta = std::move(theta);
      out.covariance = w;
      have_pd = true;
      if (out.dual_gap_or_kkt <= options.tol) {
        out.converged = true;
        return out;
      }
    } catch (const NotPositiveDefinite&) {
      // keep sweeping; early iterates can be indefinite
    }
  }
  if (!have_pd) throw NonConvergence("graphical lasso produced no positive-definite iterate");
  return out;
}

namespace {

DenseMatrix gemini_input(const MatrixDataset& d, Axis axis, std::vector<std::string>& warnings) {
  if (!d.centered) warnings.emplace_back("dataset is not centered");
  return to_correlation(gram_for_axis(d, axis)).matrix;
}

}  // namespace

GeminiFit gemini_fit(const MatrixDataset& d, Axis axis, double lambda, const GlassoOptions& options) {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  GeminiFit fit;
  const DenseMatrix s = gemini_input(d, axis, fit.warnings);
  fit.solution = graphical_lasso(s, lambda, nullptr, options);
  if (!fit.solution.converged) {
    fit.warnings.push_back("graphical lasso stopped with KKT residual " +
                           std::to_string(fit.solution.dual_gap_or_kkt));
  }
  fit.edges = edge_set(fit.solution.theta.matrix(), kGeminiZeroTol);
  return fit;
}

EstimatePath gemini_path(const MatrixDataset& d, Axis axis, std::span<const double> lambdas,
                         const GlassoOptions& options) {
  Vector grid(lambdas.begin(), lambdas.end());
  std::sort(grid.begin(), grid.end(), std::greater<>());
  EstimatePath path;
  const DenseMatrix s = gemini_input(d, axis, path.warnings);
  std::optional<GlassoSolution> prev;
  std::size_t failures = 0;
  for (double lambda : grid) {
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    GlassoSolution sol = graphical_lasso(s, lambda, prev ? &*prev : nullptr, options);
    if (!sol.converged) ++failures;
    path.points.push_back({lambda, edge_set(sol.theta.matrix(), kGeminiZeroTol)});
    prev = std::move(sol);
  }
  if (failures > 0) {
    path.warnings.push_back(std::to_string(failures) + " of " + std::to_string(grid.size()) +
                            " graphical lasso solves stopped before the KKT target");
  }
  return path;
}

}  // namespace matns
