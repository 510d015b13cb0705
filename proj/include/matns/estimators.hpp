#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matns/graph.hpp"
#include "matns/lasso.hpp"
#include "matns/linalg.hpp"
#include "matns/matnorm.hpp"
#include "matns/rng.hpp"

namespace matns {

enum class CombineRule { And, Or };

std::string to_string(CombineRule rule);
CombineRule parse_rule(const std::string& name);

/// Divisor of the residual sum of squares in each nodewise regression.
enum class LossScaling {
  Stacked,         // n q (n p for columns): gradients live on the Gram scale
  PerObservation,  // n, literal form of the per-observation loss
};

struct MatrixNsOptions {
  LassoOptions lasso;
  LossScaling scaling = LossScaling::Stacked;
};

struct NodeRegressionResult {
  std::size_t node = 0;
  Vector coefficients;               // length p, structural zero at `node`
  std::vector<std::size_t> support;  // nonzero pattern of coefficients
  double lambda_used = 0.0;
  bool converged = true;
};

struct MatrixNsFit {
  EdgeSet edges;
  std::vector<NodeRegressionResult> nodes;
  std::vector<std::string> warnings;
};

struct PathPoint {
  double lambda = 0.0;
  EdgeSet edges;
};

struct EstimatePath {
  std::vector<PathPoint> points;  // descending lambda
  std::vector<std::string> warnings;
};

/// Lasso problem for node `a` regressed on the other rows of the stacked
/// data, built from the row Gram sum_i X_i X_i^T / (n q). `rescale` multiplies
/// every statistic (n q / s for objective scale s).
CovarianceForm node_problem(const DenseMatrix& gram, std::size_t a, double rescale = 1.0);

/// Neighborhood selection over one axis. axis = Col runs on the transpose.
/// A node whose solve fails to converge gets an empty neighborhood and a warning.
MatrixNsFit matrixns_fit(const MatrixDataset& d, Axis axis, double lambda, CombineRule rule,
                         const MatrixNsOptions& options = {});
/// One lambda per node (individually tuned fits).
MatrixNsFit matrixns_fit(const MatrixDataset& d, Axis axis, std::span<const double> node_lambdas,
                         CombineRule rule, const MatrixNsOptions& options = {});

/// Warm-started per-node paths, edge set assembled at every lambda.
EstimatePath matrixns_path(const MatrixDataset& d, Axis axis, std::span<const double> lambdas,
                           CombineRule rule, const MatrixNsOptions& options = {});

/// -(U^{-1})_{(a),a} / (U^{-1})_{aa}, length p - 1.
Vector population_coefficients(const SpdMatrix& u, std::size_t a);

/// Symmetrizes nodewise supports.
EdgeSet combine_supports(std::size_t dimension, const std::vector<NodeRegressionResult>& nodes,
                         CombineRule rule);

enum class CvMode { Global, Individual };

std::string to_string(CvMode mode);
CvMode parse_cv_mode(const std::string& name);

struct CvResult {
  CvMode mode = CvMode::Global;
  Vector lambdas;                   // descending
  Vector global_error;              // summed over nodes, one per lambda
  DenseMatrix node_error;           // dimension x lambdas
  double global_lambda = 0.0;
  Vector node_lambdas;
  std::vector<std::size_t> fold_of; // fold index of each observation
};

/// K-fold cross-validation splitting whole observations. Held-out error for a
/// node sums squared residuals over all columns of the held-out observations.
/// Both the global and the per-node minimizers are filled; `mode` records the
/// caller's choice. Ties resolve to the larger lambda. Throws InsufficientSamples.
CvResult cv_tune(const MatrixDataset& d, Axis axis, std::size_t folds,
                 std::span<const double> lambdas, CvMode mode, Rng& rng,
                 const MatrixNsOptions& options = {});

struct GlassoOptions {
  double tol = 1e-6;            // KKT target
  std::size_t max_sweeps = 500;
  double inner_tol = 1e-10;
  std::size_t inner_max_iter = 10000;
};

struct GlassoSolution {
  SpdMatrix theta;
  DenseMatrix covariance;  // working estimate of theta^{-1}
  double lambda = 0.0;
  double dual_gap_or_kkt = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Minimizes -log det T + tr(S T) + lambda sum_{i != j} |T_ij| by block
/// coordinate descent over columns. Throws SingularInput when lambda = 0 and S
/// is singular, NonConvergence when no sweep yields a positive-definite iterate.
GlassoSolution graphical_lasso(const DenseMatrix& s, double lambda,
                               const GlassoSolution* warm = nullptr,
                               const GlassoOptions& options = {});

/// Largest violation of the stationarity conditions at theta.
double glasso_kkt(const DenseMatrix& s, const SpdMatrix& theta, double lambda);

inline constexpr double kGeminiZeroTol = 1e-8;

struct GeminiFit {
  EdgeSet edges;
  GlassoSolution solution;
  std::vector<std::string> warnings;
};

/// Graphical lasso on the correlation version of the axis Gram matrix.
GeminiFit gemini_fit(const MatrixDataset& d, Axis axis, double lambda,
                     const GlassoOptions& options = {});
EstimatePath gemini_path(const MatrixDataset& d, Axis axis, std::span<const double> lambdas,
                         const GlassoOptions& options = {});

}  // namespace matns
