#pragma once

// Computable forms of the support-recovery hypotheses for a known (U, V):
// incoherence, degree, eigenvalue bounds, the lambda rule, the beta-min
// threshold, the sample-size conditions, and a Monte-Carlo probe of the
// spectral concentration of the row Gram block.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "matns/linalg.hpp"
#include "matns/rng.hpp"

namespace matns {

inline constexpr double kNeighborhoodZeroTol = 1e-10;

struct ModelDiagnostics {
  double alpha = 1.0;
  std::size_t d_max = 0;
  double lambda_min_u = 0.0;
  double lambda_max_u = 0.0;
  double lambda_min_v = 0.0;
  double lambda_max_v = 0.0;
  double u_max = 0.0;   // max_j u_jj
  double v_avg = 0.0;   // tr(V) / q
};

/// N(a) = {b != a : |(U^{-1})_ab| > kNeighborhoodZeroTol}.
std::vector<std::vector<std::size_t>> neighborhoods(const SpdMatrix& u);

/// 1 - max_a max_{b outside N(a)} || G_bS (G_SS)^{-1} ||_1 with G = U_{(a),(a)}
/// and S = N(a). An empty S contributes 0. May be <= 0 when the condition fails.
double incoherence(const SpdMatrix& u);

ModelDiagnostics degree_and_bounds(const SpdMatrix& u, const SpdMatrix& v);

/// c sqrt(beta v_avg lambda_max_v log p / (n q)) max(u_max / alpha, sqrt(lambda_min_u / d_max)).
/// Throws EmptyGraph when d_max = 0.
double lambda_rule(const ModelDiagnostics& diag, double n, double p, double q, double beta, double c);
/// The u_max / alpha branch alone; the fallback for an empty graph.
double lambda_rule_incoherence_branch(const ModelDiagnostics& diag, double n, double p, double q,
                                      double beta, double c);

/// 3 lambda sqrt(d_max) / (lambda_min_u v_avg); 0 when d_max = 0.
double betamin_threshold(double lambda, const ModelDiagnostics& diag);

struct Inequality {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string relation;  // ">=", "<=" or ">"
  bool holds = false;
};

struct ConditionReport {
  Inequality incoherence;  // alpha > 0
  Inequality a;
  Inequality b;
  std::vector<Inequality> c1;  // both parts
  std::vector<Inequality> c2;
  bool a_holds = false;
  bool b_holds = false;
  bool c1_holds = false;
  bool c2_holds = false;
  bool verdict = false;  // alpha > 0 && a && b && (c1 || c2)
  // n >= log p and n q >= (log p)^{3/2}, constants taken as 1.
  Inequality simplified_n;
  Inequality simplified_nq;
  bool simplified_holds = false;
  // 1 - max(3 d_max + 6, 5 d_max) / p^{beta - 1}
  double probability_floor = 0.0;
};

ConditionReport check_conditions(const ModelDiagnostics& diag, double n, double p, double q,
                                 double beta, double c1, double c2);

struct ProbeRow {
  double t = 0.0;
  double empirical_tail = 0.0;
  double bound = 0.0;
};

struct ConcentrationBound {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double c_scale = 1.0;
};

struct ProbeResult {
  ConcentrationBound constants;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t replicates = 0;
  double u_norm = 0.0;
  std::vector<double> deviations;  // ||Ghat_SS - G_SS||_2 per replicate
  double median_deviation = 0.0;
  std::vector<ProbeRow> table;
  /// Infimum of C for which the bound dominates the empirical tail on the grid.
  double smallest_dominating_c = 0.0;
  /// Fraction of replicates with deviation <= lambda_min_u v_avg / 2.
  double small_deviation_frequency = 0.0;
  /// Replicates on that event where ||Ghat_SS^{-1}||_2 > 2 / (lambda_min_u v_avg); expected 0.
  std::size_t inverse_bound_violations = 0;
};

/// Lemma-style bound 3 m exp(-min{(t/a1)^2, t/a2, (t/a3)^{2/3}}), capped at 1.
double concentration_bound(const ConcentrationBound& k, std::size_t m, double t);
ConcentrationBound concentration_constants(const SpdMatrix& v, std::size_t m, std::size_t n);

/// S = the first m indices. Tail at t counts replicates whose deviation is at
/// least t * c_scale * ||U||_2. Throws InvalidArgument when R < 100.
ProbeResult concentration_probe(const SpdMatrix& u, const SpdMatrix& v, std::size_t m, std::size_t n,
                                std::size_t replicates, Rng& rng, const std::vector<double>& t_grid,
                                double c_scale = 1.0);

/// 0, step, ..., t_max.
std::vector<double> default_t_grid(double t_max, std::size_t points);

}  // namespace matns
