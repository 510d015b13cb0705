#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "matns/diagnostics.hpp"
#include "matns/error.hpp"
#include "matns/graph.hpp"
#include "oracles.hpp"

using namespace matns;

namespace {

SpdMatrix cov_of(const DenseMatrix& omega) { return SpdMatrix(oracle::inverse(omega)); }

DenseMatrix tridiag(std::size_t p, double rho) {
  DenseMatrix m = DenseMatrix::identity(p);
  for (std::size_t i = 0; i + 1 < p; ++i) m(i, i + 1) = m(i + 1, i) = -rho;
  return m;
}

// Enumerates every (a, b) pair with dense arithmetic on U.
double brute_incoherence(const DenseMatrix& omega) {
  const DenseMatrix u = oracle::inverse(omega);
  const std::size_t p = u.rows();
  double worst = 0.0;
  for (std::size_t a = 0; a < p; ++a) {
    std::vector<std::size_t> s;
    for (std::size_t b = 0; b < p; ++b)
      if (b != a && std::fabs(omega(a, b)) > 1e-10) s.push_back(b);
    if (s.empty()) continue;
    DenseMatrix g(s.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j) g(i, j) = u(s[i], s[j]);
    const DenseMatrix gi = oracle::inverse(g);
    for (std::size_t b = 0; b < p; ++b) {
      if (b == a || std::find(s.begin(), s.end(), b) != s.end()) continue;
      double l1 = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) v += u(b, s[i]) * gi(i, j);
        l1 += std::fabs(v);
      }
      worst = std::max(worst, l1);
    }
  }
  return 1.0 - worst;
}

ModelDiagnostics unit_diag(std::size_t d_max) {
  ModelDiagnostics d;
  d.alpha = 1.0;
  d.d_max = d_max;
  d.lambda_min_u = d.lambda_max_u = 1.0;
  d.lambda_min_v = d.lambda_max_v = 1.0;
  d.u_max = d.v_avg = 1.0;
  return d;
}

}  // namespace

TEST(Diagnostics, IdentityModel) {
  const SpdMatrix eye(DenseMatrix::identity(5));
  const ModelDiagnostics d = degree_and_bounds(eye, eye);
  EXPECT_EQ(d.alpha, 1.0);
  EXPECT_EQ(d.d_max, 0u);
  EXPECT_NEAR(d.lambda_min_u, 1.0, 1e-12);
  EXPECT_NEAR(d.lambda_max_v, 1.0, 1e-12);
  EXPECT_EQ(d.u_max, 1.0);
  EXPECT_EQ(d.v_avg, 1.0);
}

TEST(Diagnostics, DiagonalCovariance) {
  const SpdMatrix u(DenseMatrix::diagonal(Vector{1.0, 4.0, 2.0}));
  const SpdMatrix v(DenseMatrix::diagonal(Vector{1.0, 2.0, 3.0}));
  const ModelDiagnostics d = degree_and_bounds(u, v);
  EXPECT_EQ(d.alpha, 1.0);
  EXPECT_EQ(d.u_max, 4.0);
  EXPECT_DOUBLE_EQ(d.v_avg, 2.0);
  EXPECT_LE(d.lambda_min_v, d.v_avg);
  EXPECT_GE(d.lambda_max_v, d.v_avg);
}

TEST(Diagnostics, BandDegree) {
  const SpdMatrix u = cov_of(gen_band(20, 0.6).omega);
  const ModelDiagnostics d = degree_and_bounds(u, SpdMatrix(DenseMatrix::identity(3)));
  EXPECT_EQ(d.d_max, 4u);
  const auto nbr = neighborhoods(u);
  EXPECT_EQ(nbr[0], (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(nbr[10].size(), 4u);
}

TEST(Incoherence, MatchesBruteForce) {
  for (std::size_t p : {3u, 5u, 8u}) {
    for (double rho : {0.2, 0.45}) {
      const DenseMatrix omega = tridiag(p, rho);
      EXPECT_NEAR(incoherence(cov_of(omega)), brute_incoherence(omega), 1e-10) << p << " " << rho;
    }
  }
  const DenseMatrix band = gen_band(8, 0.6).omega;
  EXPECT_NEAR(incoherence(cov_of(band)), brute_incoherence(band), 1e-10);
  const DenseMatrix hub = repair_pd(gen_hub(10, 0.4)).omega;
  EXPECT_NEAR(incoherence(cov_of(hub)), brute_incoherence(hub), 1e-10);
  Rng rng(3);
  const DenseMatrix rnd = build_precision({Structure::Random, 0.5}, 8, rng).omega;
  EXPECT_NEAR(incoherence(cov_of(rnd)), brute_incoherence(rnd), 1e-10);
}

TEST(Incoherence, ScaleInvariant) {
  const SpdMatrix u = cov_of(gen_band(12, 0.6).omega);
  const double base = incoherence(u);
  for (double c : {0.25, 3.0, 100.0}) EXPECT_NEAR(incoherence(SpdMatrix(u.matrix() * c)), base, 1e-12);
}

TEST(LambdaRule, CollapsesToOne) {
  EXPECT_NEAR(lambda_rule(unit_diag(1), 1.0, std::exp(1.0), 1.0, 1.0, 1.0), 1.0, 1e-15);
}

TEST(LambdaRule, ScalingLaw) {
  const ModelDiagnostics d = unit_diag(2);
  const double base = lambda_rule(d, 10, 50, 10, 2, 1);
  EXPECT_NEAR(lambda_rule(d, 20, 50, 10, 2, 1), base / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(lambda_rule(d, 10, 50, 20, 2, 1), base / std::sqrt(2.0), 1e-15);
}

TEST(LambdaRule, WorkedBandInstance) {
  const SpdMatrix u = cov_of(gen_band(20, 0.6).omega);
  const SpdMatrix v(DenseMatrix::identity(20));
  const ModelDiagnostics d = degree_and_bounds(u, v);
  const double n = 20, p = 20, q = 20, beta = 2, c = 1;
  const double expected = c * std::sqrt(beta * d.v_avg * d.lambda_max_v * std::log(p) / (n * q)) *
                          std::max(d.u_max / d.alpha, std::sqrt(d.lambda_min_u / 4.0));
  EXPECT_NEAR(lambda_rule(d, n, p, q, beta, c), expected, 1e-14);
  // The 0.6 band violates incoherence, so the verdict fails.
  EXPECT_LT(d.alpha, 0.0);
  EXPECT_FALSE(check_conditions(d, 1e9, p, q, beta, 1, 1).verdict);
  const ModelDiagnostics weak = degree_and_bounds(cov_of(gen_band(20, 0.2).omega), v);
  EXPECT_GT(weak.alpha, 0.0);
}

TEST(LambdaRule, EmptyGraph) {
  EXPECT_THROW(lambda_rule(unit_diag(0), 10, 10, 10, 2, 1), EmptyGraph);
  const double branch = lambda_rule_incoherence_branch(unit_diag(0), 10, 10, 10, 2, 1);
  EXPECT_NEAR(branch, std::sqrt(2.0 * std::log(10.0) / 100.0), 1e-15);
}

TEST(Betamin, Examples) {
  ModelDiagnostics d = unit_diag(4);
  d.v_avg = 2.0;
  EXPECT_DOUBLE_EQ(betamin_threshold(1.0, d), 3.0);
  EXPECT_DOUBLE_EQ(betamin_threshold(2.5, d), 2.5 * betamin_threshold(1.0, d));
  ModelDiagnostics half = d;
  half.v_avg = 1.0;
  EXPECT_DOUBLE_EQ(betamin_threshold(1.0, half), 6.0);
  EXPECT_EQ(betamin_threshold(1.0, unit_diag(0)), 0.0);
}

TEST(Conditions, AllPassForLargeSample) {
  const ConditionReport r = check_conditions(unit_diag(0), 1e8, 10, 5, 2, 1, 1);
  EXPECT_TRUE(r.a_holds);
  EXPECT_TRUE(r.b_holds);
  EXPECT_TRUE(r.c1_holds || r.c2_holds);
  EXPECT_TRUE(r.verdict);
  EXPECT_TRUE(r.simplified_holds);
}

TEST(Conditions, TinySampleHugeDimensionFailsA) {
  const ConditionReport r = check_conditions(unit_diag(1), 1, 1e6, 1, 2, 1, 1);
  EXPECT_FALSE(r.a_holds);
  EXPECT_FALSE(r.verdict);
}

TEST(Conditions, WorkedInstance) {
  // d_max = 2, alpha = 0.5, u_max = 2, lambda^U in [0.5, 4], lambda^V in [1, 3],
  // v_avg = 1.5, n = 100, p = 50, q = 10, beta = 2, c1 = c2 = 1.
  ModelDiagnostics d;
  d.alpha = 0.5;
  d.d_max = 2;
  d.u_max = 2;
  d.lambda_min_u = 0.5;
  d.lambda_max_u = 4;
  d.lambda_min_v = 1;
  d.lambda_max_v = 3;
  d.v_avg = 1.5;
  const ConditionReport r = check_conditions(d, 100, 50, 10, 2, 1, 1);
  const double lp = std::log(50.0);
  // (a): 1000 / log 50 vs 2 max(2 / 0.25 * 2 / 0.5 * 2, 4) = 128.
  EXPECT_NEAR(r.a.lhs, 1000 / lp, 1e-12);
  EXPECT_NEAR(r.a.rhs, 128.0, 1e-12);
  EXPECT_TRUE(r.a_holds);
  // (b): 100 * 1.4 vs 9.
  EXPECT_NEAR(r.b.lhs, 140.0, 1e-12);
  EXPECT_NEAR(r.b.rhs, 9.0, 1e-12);
  // (c1): 100 / log 50 vs 1.4 * 2 * 8 * 4 = 89.6; 1 vs 1.4^3 * 8^4 * 9 / 1.5^4.
  EXPECT_NEAR(r.c1[0].lhs, 100 / lp, 1e-12);
  EXPECT_NEAR(r.c1[0].rhs, 89.6, 1e-12);
  EXPECT_FALSE(r.c1[0].holds);
  EXPECT_NEAR(r.c1[1].lhs, 1.0, 1e-12);
  EXPECT_NEAR(r.c1[1].rhs, std::pow(1.4, 3) * 4096 * 9 / std::pow(1.5, 4), 1e-8);
  // (c2): 1000 / (log 50)^1.5 vs 2^1.5 * 8 * 9.
  EXPECT_NEAR(r.c2[0].lhs, 1000 / std::pow(lp, 1.5), 1e-12);
  EXPECT_NEAR(r.c2[0].rhs, std::pow(2.0, 1.5) * 72, 1e-12);
  EXPECT_FALSE(r.c2_holds);
  EXPECT_FALSE(r.verdict);
  EXPECT_NEAR(r.probability_floor, 1.0 - 12.0 / 50.0, 1e-12);
}

TEST(Conditions, VerdictMonotoneInN) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    ModelDiagnostics d;
    d.alpha = 0.1 + 0.9 * rng.uniform();
    d.d_max = static_cast<std::size_t>(rng.below(6));
    d.lambda_min_u = 0.2 + rng.uniform();
    d.lambda_max_u = d.lambda_min_u * (1 + 4 * rng.uniform());
    d.u_max = d.lambda_max_u;
    d.lambda_min_v = 0.2 + rng.uniform();
    d.lambda_max_v = d.lambda_min_v * (1 + 4 * rng.uniform());
    d.v_avg = 0.5 * (d.lambda_min_v + d.lambda_max_v);
    const double p = 10 + static_cast<double>(rng.below(1000));
    const double q = 1 + static_cast<double>(rng.below(50));
    bool seen = false;
    for (double n = 1; n < 1e9; n *= 1.5) {
      const bool v = check_conditions(d, n, p, q, 2, 1, 1).verdict;
      if (seen) {
        ASSERT_TRUE(v) << "trial " << trial << " n " << n;
      }
      seen = seen || v;
    }
    EXPECT_TRUE(seen);
  }
}

TEST(Probe, TailShapeAndBound) {
  const SpdMatrix u = cov_of(gen_band(5, 0.6).omega);
  const SpdMatrix v(DenseMatrix::identity(5));
  Rng rng(7);
  const auto grid = default_t_grid(1.0, 21);
  const ProbeResult r = concentration_probe(u, v, 3, 50, 200, rng, grid);
  ASSERT_EQ(r.table.size(), 21u);
  EXPECT_EQ(r.table.front().empirical_tail, 1.0);
  for (std::size_t k = 1; k < r.table.size(); ++k) EXPECT_LE(r.table[k].empirical_tail, r.table[k - 1].empirical_tail);
  EXPECT_GT(r.constants.a1, 0.0);
  EXPECT_GT(r.constants.a2, 0.0);
  EXPECT_GT(r.constants.a3, 0.0);
  EXPECT_EQ(r.inverse_bound_violations, 0u);

  Rng again(7);
  const ProbeResult scaled =
      concentration_probe(u, v, 3, 50, 200, again, grid, r.smallest_dominating_c * (1 + 1e-9));
  for (const auto& row : scaled.table) EXPECT_GE(row.bound, row.empirical_tail) << row.t;
}

TEST(Probe, TailVanishesForLargeSamples) {
  const SpdMatrix u = cov_of(gen_band(5, 0.6).omega);
  Rng rng(8);
  const ProbeResult r = concentration_probe(u, SpdMatrix(DenseMatrix::identity(5)), 5, 2000, 100, rng,
                                            default_t_grid(1.0, 11));
  EXPECT_EQ(r.table.back().empirical_tail, 0.0);
}

TEST(Probe, MedianShrinksWithSampleSize) {
  const SpdMatrix u = cov_of(gen_band(5, 0.6).omega);
  const SpdMatrix v(DenseMatrix::identity(5));
  const auto grid = default_t_grid(1.0, 5);
  Rng a(9), b(10);
  const ProbeResult small = concentration_probe(u, v, 5, 10, 200, a, grid);
  const ProbeResult large = concentration_probe(u, v, 5, 1000, 200, b, grid);
  EXPECT_LT(large.median_deviation, small.median_deviation);
}

TEST(Probe, RejectsFewReplicates) {
  const SpdMatrix eye(DenseMatrix::identity(3));
  Rng rng(1);
  EXPECT_THROW(concentration_probe(eye, eye, 2, 10, 99, rng, default_t_grid(1.0, 3)), InvalidArgument);
}
