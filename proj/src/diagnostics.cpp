#include "matns/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "matns/error.hpp"
#include "matns/graph.hpp"
#include "matns/matnorm.hpp"

namespace matns {

std::vector<std::vector<std::size_t>> neighborhoods(const SpdMatrix& u) {
  const DenseMatrix omega = u.inverse();
  const std::size_t p = u.dim();
  std::vector<std::vector<std::size_t>> nbr(p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b)
      if (b != a && std::abs(omega(a, b)) > kNeighborhoodZeroTol) nbr[a].push_back(b);
  return nbr;
}

double incoherence(const SpdMatrix& u) {
  const std::size_t p = u.dim();
  const DenseMatrix& um = u.matrix();
  const auto nbr = neighborhoods(u);
  double worst = 0.0;
  for (std::size_t a = 0; a < p; ++a) {
    const auto& s = nbr[a];
    if (s.empty()) continue;
    const SpdMatrix gamma_ss(submatrix(um, s, s));
    for (std::size_t b = 0; b < p; ++b) {
      if (b == a || std::find(s.begin(), s.end(), b) != s.end()) continue;
      Vector gamma_sb(s.size());
      for (std::size_t k = 0; k < s.size(); ++k) gamma_sb[k] = um(s[k], b);
      const Vector x = gamma_ss.solve(gamma_sb);
      double l1 = 0.0;
      for (double v : x) l1 += std::abs(v);
      worst = std::max(worst, l1);
    }
  }
  return 1.0 - worst;
}

ModelDiagnostics degree_and_bounds(const SpdMatrix& u, const SpdMatrix& v) {
  ModelDiagnostics d;
  d.alpha = incoherence(u);
  std::size_t dmax = 0;
  for (const auto& n : neighborhoods(u)) dmax = std::max(dmax, n.size());
  d.d_max = dmax;
  std::tie(d.lambda_min_u, d.lambda_max_u) = u.eigen_bounds();
  std::tie(d.lambda_min_v, d.lambda_max_v) = v.eigen_bounds();
  const Vector ud = u.matrix().diag();
  d.u_max = *std::max_element(ud.begin(), ud.end());
  d.v_avg = v.matrix().trace() / static_cast<double>(v.dim());
  return d;
}

namespace {

double rule_scale(const ModelDiagnostics& diag, double n, double p, double q, double beta, double c) {
  return c * std::sqrt(beta * diag.v_avg * diag.lambda_max_v * std::log(p) / (n * q));
}

Inequality make(std::string name, double lhs, const char* rel, double rhs) {
  Inequality in{std::move(name), lhs, rhs, rel, false};
  const std::string r(rel);
  if (r == ">=") in.holds = lhs >= rhs;
  else if (r == "<=") in.holds = lhs <= rhs;
  else in.holds = lhs > rhs;
  return in;
}

}  // namespace

double lambda_rule(const ModelDiagnostics& diag, double n, double p, double q, double beta, double c) {
  if (diag.d_max == 0) {
    throw EmptyGraph("lambda rule needs d_max >= 1; use the incoherence branch alone");
  }
  const double branch = std::max(diag.u_max / diag.alpha,
                                 std::sqrt(diag.lambda_min_u / static_cast<double>(diag.d_max)));
  return rule_scale(diag, n, p, q, beta, c) * branch;
}

double lambda_rule_incoherence_branch(const ModelDiagnostics& diag, double n, double p, double q,
                                      double beta, double c) {
  return rule_scale(diag, n, p, q, beta, c) * diag.u_max / diag.alpha;
}

double betamin_threshold(double lambda, const ModelDiagnostics& diag) {
  if (diag.d_max == 0) return 0.0;
  return 3.0 * lambda * std::sqrt(static_cast<double>(diag.d_max)) / (diag.lambda_min_u * diag.v_avg);
}

ConditionReport check_conditions(const ModelDiagnostics& diag, double n, double p, double q,
                                 double beta, double c1, double c2) {
  const double logp = std::log(p);
  const double d = static_cast<double>(diag.d_max);
  const double alpha = diag.alpha;
  const double v_ratio = diag.lambda_max_v / diag.v_avg;
  const double kappa_u = diag.lambda_max_u / diag.lambda_min_u;
  const double degree_factor = 2.0 * d / q + 1.0;

  ConditionReport r;
  r.incoherence = make("alpha > 0", alpha, ">", 0.0);
  r.a = make("(a)", n * q / logp, ">=",
             c1 * beta * std::max(d / (alpha * alpha) * diag.u_max / diag.lambda_min_u * v_ratio, v_ratio * v_ratio));
  r.b = make("(b)", n * degree_factor, ">=", diag.lambda_max_v * diag.lambda_max_v);

  const double split = std::pow(c2, 4) * std::pow(degree_factor, 3) * std::pow(kappa_u, 4) *
                       diag.lambda_max_v * diag.lambda_max_v / std::pow(diag.v_avg, 4);
  r.c1 = {make("(c1) first", n / logp, ">=", c2 * c2 * beta * degree_factor * kappa_u * v_ratio * v_ratio),
          make("(c1) second", n / (q * q), "<=", split)};
  r.c2 = {make("(c2) first", n * q / std::pow(logp, 1.5), ">=",
               c2 * std::pow(beta, 1.5) * kappa_u * diag.lambda_max_v * diag.lambda_max_v),
          make("(c2) second", n / (q * q), ">", split)};

  r.a_holds = r.a.holds;
  r.b_holds = r.b.holds;
  r.c1_holds = r.c1[0].holds && r.c1[1].holds;
  r.c2_holds = r.c2[0].holds && r.c2[1].holds;
  r.verdict = r.incoherence.holds && r.a_holds && r.b_holds && (r.c1_holds || r.c2_holds);

  r.simplified_n = make("n >~ log p", n, ">=", logp);
  r.simplified_nq = make("nq >~ (log p)^{3/2}", n * q, ">=", std::pow(logp, 1.5));
  r.simplified_holds = r.simplified_n.holds && r.simplified_nq.holds;

  r.probability_floor = 1.0 - std::max(3.0 * d + 6.0, 5.0 * d) / std::pow(p, beta - 1.0);
  return r;
}

ConcentrationBound concentration_constants(const SpdMatrix& v, std::size_t m, std::size_t n) {
  const double q = static_cast<double>(v.dim());
  const double vn = v.eigen_bounds().second;
  const double v2 = vn * vn;
  const double nn = static_cast<double>(n);
  return {std::sqrt((2.0 * static_cast<double>(m) / q + 1.0) * v2 / nn), v2 / (nn * std::sqrt(q)),
          v2 / (nn * q), 1.0};
}

double concentration_bound(const ConcentrationBound& k, std::size_t m, double t) {
  const double e = std::min({std::pow(t / k.a1, 2.0), t / k.a2, std::pow(t / k.a3, 2.0 / 3.0)});
  return std::min(1.0, 3.0 * static_cast<double>(m) * std::exp(-e));
}

std::vector<double> default_t_grid(double t_max, std::size_t points) {
  if (points < 2) throw InvalidArgument("t grid needs at least 2 points");
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) grid[k] = t_max * static_cast<double>(k) / static_cast<double>(points - 1);
  return grid;
}

ProbeResult concentration_probe(const SpdMatrix& u, const SpdMatrix& v, std::size_t m, std::size_t n,
                                std::size_t replicates, Rng& rng, const std::vector<double>& t_grid,
                                double c_scale) {
  if (replicates < 100) throw InvalidArgument("concentration probe needs at least 100 replicates");
  if (m == 0 || m > u.dim()) throw InvalidArgument("subset size must lie in [1, p]");
  if (n == 0) throw InvalidArgument("probe sample size must be positive");

  ProbeResult res;
  res.m = m;
  res.n = n;
  res.replicates = replicates;
  res.constants = concentration_constants(v, m, n);
  res.constants.c_scale = c_scale;
  res.u_norm = u.eigen_bounds().second;

  std::vector<std::size_t> subset(m);
  std::iota(subset.begin(), subset.end(), 0);
  const SpdMatrix u_ss(submatrix(u.matrix(), subset, subset));
  const double v_avg = v.matrix().trace() / static_cast<double>(v.dim());
  const DenseMatrix gamma = u_ss.matrix() * v_avg;
  const double lambda_min_u = u.eigen_bounds().first;
  const double event_radius = lambda_min_u * v_avg / 2.0;

  const Rng base(rng.next_u64());
  res.deviations.reserve(replicates);
  std::size_t on_event = 0;
  for (std::size_t r = 0; r < replicates; ++r) {
    Rng stream = base.child(r);
    const MatrixDataset xs = sample(n, u_ss, v, stream);
    const DenseMatrix gamma_hat = gram_row(xs).matrix;
    const double dev = sym_spectral_norm(gamma_hat - gamma);
    res.deviations.push_back(dev);
    if (dev <= event_radius) {
      ++on_event;
      const double lmin = sym_eigen(gamma_hat).values.back();
      if (!(lmin > 0.0) || 1.0 / lmin > 2.0 / (lambda_min_u * v_avg)) ++res.inverse_bound_violations;
    }
  }
  res.small_deviation_frequency = static_cast<double>(on_event) / static_cast<double>(replicates);

  std::vector<double> sorted = res.deviations;
  std::sort(sorted.begin(), sorted.end());
  res.median_deviation = replicates % 2 == 1
                             ? sorted[replicates / 2]
                             : 0.5 * (sorted[replicates / 2 - 1] + sorted[replicates / 2]);
  std::vector<double> desc(sorted.rbegin(), sorted.rend());

  for (double t : t_grid) {
    const double threshold = t * c_scale * res.u_norm;
    const auto exceed = static_cast<double>(std::count_if(
        res.deviations.begin(), res.deviations.end(), [&](double dv) { return dv >= threshold; }));
    res.table.push_back({t, exceed / static_cast<double>(replicates), concentration_bound(res.constants, m, t)});

    if (t <= 0.0) continue;
    const double b = concentration_bound(res.constants, m, t);
    const auto allowed = static_cast<std::size_t>(std::floor(b * static_cast<double>(replicates)));
    if (allowed >= replicates) continue;
    res.smallest_dominating_c = std::max(res.smallest_dominating_c, desc[allowed] / (t * res.u_norm));
  }
  return res;
}

}  // namespace matns
