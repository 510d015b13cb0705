#include "matns/matnorm.hpp"

#include <cmath>
#include <numeric>

#include "matns/error.hpp"

namespace matns {

std::string to_string(Axis axis) { return axis == Axis::Row ? "row" : "col"; }

Axis parse_axis(const std::string& name) {
  if (name == "row") return Axis::Row;
  if (name == "col") return Axis::Col;
  throw InvalidArgument("unknown axis '" + name + "' (expected row or col)");
}

MatrixDataset MatrixDataset::from_observations(std::vector<DenseMatrix> obs, std::string note) {
  if (obs.empty()) throw InvalidArgument("dataset needs at least one observation");
  MatrixDataset d;
  d.n = obs.size();
  d.p = obs.front().rows();
  d.q = obs.front().cols();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs[i].rows() != d.p || obs[i].cols() != d.q) {
      throw ShapeMismatch("observation " + std::to_string(i) + " is " +
                          std::to_string(obs[i].rows()) + "x" + std::to_string(obs[i].cols()) +
                          ", expected " + std::to_string(d.p) + "x" + std::to_string(d.q));
    }
  }
  d.observations = std::move(obs);
  d.axis_note = std::move(note);
  return d;
}

MatrixDataset sample(std::size_t n, const SpdMatrix& u, const SpdMatrix& v, Rng& rng) {
  if (n == 0) throw InvalidArgument("sample size must be positive");
  const std::size_t p = u.dim();
  const std::size_t q = v.dim();
  const DenseMatrix& lu = u.cholesky_factor();
  const DenseMatrix lvt = v.cholesky_factor().transpose();
  const std::uint64_t base = rng.next_u64();

  std::vector<DenseMatrix> obs;
  obs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng stream(derive_seed(base, i));
    DenseMatrix z(p, q);
    for (double& e : z.data()) e = stream.normal();
    obs.push_back(lu * z * lvt);
  }
  MatrixDataset d = MatrixDataset::from_observations(std::move(obs), "sampled matrix normal");
  d.seed = rng.seed();
  return d;
}

namespace {

struct Moments {
  DenseMatrix mean;
  DenseMatrix var;
};

Moments position_moments(const MatrixDataset& d) {
  Moments m{DenseMatrix(d.p, d.q), DenseMatrix(d.p, d.q)};
  const double inv_n = 1.0 / static_cast<double>(d.n);
  for (const auto& x : d.observations) m.mean += x;
  m.mean *= inv_n;
  for (const auto& x : d.observations) {
    for (std::size_t k = 0; k < x.data().size(); ++k) {
      const double c = x.data()[k] - m.mean.data()[k];
      m.var.data()[k] += c * c;
    }
  }
  m.var *= inv_n;
  return m;
}

constexpr double kMinVariance = 1e-14;

MatrixDataset standardize_impl(const MatrixDataset& d,
                               std::vector<std::pair<std::size_t, std::size_t>>* degenerate) {
  if (d.n < 2) throw InsufficientSamples("standardization needs n >= 2");
  const Moments m = position_moments(d);
  DenseMatrix inv_sd(d.p, d.q);
  for (std::size_t i = 0; i < d.p; ++i) {
    for (std::size_t j = 0; j < d.q; ++j) {
      if (m.var(i, j) < kMinVariance) {
        if (degenerate == nullptr) {
          throw ZeroVariance("position (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                             ") has variance " + std::to_string(m.var(i, j)));
        }
        degenerate->emplace_back(i, j);
        inv_sd(i, j) = 1.0;
      } else {
        inv_sd(i, j) = 1.0 / std::sqrt(m.var(i, j));
      }
    }
  }
  MatrixDataset out = d;
  for (auto& x : out.observations) {
    for (std::size_t k = 0; k < x.data().size(); ++k) {
      x.data()[k] = (x.data()[k] - m.mean.data()[k]) * inv_sd.data()[k];
    }
  }
  out.standardized = true;
  out.centered = true;
  return out;
}

}  // namespace

MatrixDataset standardize(const MatrixDataset& d) { return standardize_impl(d, nullptr); }

MatrixDataset standardize_lenient(const MatrixDataset& d,
                                  std::vector<std::pair<std::size_t, std::size_t>>& degenerate) {
  return standardize_impl(d, &degenerate);
}

MatrixDataset center(const MatrixDataset& d) {
  if (d.n < 2) throw InsufficientSamples("centering needs n >= 2");
  DenseMatrix mean(d.p, d.q);
  for (const auto& x : d.observations) mean += x;
  mean *= 1.0 / static_cast<double>(d.n);
  MatrixDataset out = d;
  for (auto& x : out.observations) x -= mean;
  out.centered = true;
  return out;
}

MatrixDataset transpose_dataset(const MatrixDataset& d) {
  MatrixDataset out = d;
  std::swap(out.p, out.q);
  for (auto& x : out.observations) x = x.transpose();
  return out;
}

namespace {

// Accumulates sum_i X_i X_i^T over the selected observations, upper triangle
// first, in observation order.
DenseMatrix row_scatter(const MatrixDataset& d, std::span<const std::size_t> obs) {
  DenseMatrix g(d.p, d.p);
  for (std::size_t idx : obs) {
    const DenseMatrix& x = d.observations[idx];
    for (std::size_t a = 0; a < d.p; ++a) {
      auto xa = x.row(a);
      for (std::size_t b = a; b < d.p; ++b) {
        auto xb = x.row(b);
        g(a, b) += std::inner_product(xa.begin(), xa.end(), xb.begin(), 0.0);
      }
    }
  }
  for (std::size_t a = 0; a < d.p; ++a)
    for (std::size_t b = 0; b < a; ++b) g(a, b) = g(b, a);
  return g;
}

}  // namespace

GramMatrix gram_row(const MatrixDataset& d, std::span<const std::size_t> obs) {
  if (obs.empty()) throw InvalidArgument("gram_row needs at least one observation");
  GramMatrix g{row_scatter(d, obs), static_cast<double>(obs.size() * d.q)};
  g.matrix *= 1.0 / g.normalizer;
  return g;
}

GramMatrix gram_row(const MatrixDataset& d) {
  std::vector<std::size_t> all(d.n);
  std::iota(all.begin(), all.end(), 0);
  return gram_row(d, all);
}

GramMatrix gram_col(const MatrixDataset& d) { return gram_row(transpose_dataset(d)); }

GramMatrix gram_for_axis(const MatrixDataset& d, Axis axis) {
  return axis == Axis::Row ? gram_row(d) : gram_col(d);
}

GramMatrix to_correlation(const GramMatrix& g) {
  const std::size_t n = g.matrix.rows();
  Vector inv_sd(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double gii = g.matrix(i, i);
    if (gii <= 1e-14) throw ZeroDiagonal("diagonal entry " + std::to_string(i + 1) + " is " + std::to_string(gii));
    inv_sd[i] = 1.0 / std::sqrt(gii);
  }
  GramMatrix c = g;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) c.matrix(i, j) = g.matrix(i, j) * inv_sd[i] * inv_sd[j];
    c.matrix(i, i) = 1.0;
  }
  return c;
}

}  // namespace matns
