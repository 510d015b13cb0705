#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matns/linalg.hpp"
#include "matns/rng.hpp"

namespace matns {

enum class Axis { Row, Col };

std::string to_string(Axis axis);
Axis parse_axis(const std::string& name);

/// n observations of shape p x q.
struct MatrixDataset {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t q = 0;
  std::vector<DenseMatrix> observations;
  bool standardized = false;
  bool centered = false;
  std::string axis_note;
  std::optional<std::uint64_t> seed;

  /// Builds a dataset from observations, checking that shapes agree.
  static MatrixDataset from_observations(std::vector<DenseMatrix> obs, std::string note = {});
};

/// Unnormalized or normalized second-moment matrix with its divisor.
struct GramMatrix {
  DenseMatrix matrix;
  double normalizer = 1.0;
};

/// Each observation is L_U Z L_V^T with Z standard normal; observation i
/// draws from its own stream derived from one base seed taken from rng.
MatrixDataset sample(std::size_t n, const SpdMatrix& u, const SpdMatrix& v, Rng& rng);

/// Per-position centering and scaling to unit population (1/n) standard
/// deviation. Throws ZeroVariance when a position's variance is below 1e-14.
MatrixDataset standardize(const MatrixDataset& d);

/// As standardize, but degenerate positions are only centered and their
/// (row, col) indices appended to `degenerate`.
MatrixDataset standardize_lenient(const MatrixDataset& d,
                                  std::vector<std::pair<std::size_t, std::size_t>>& degenerate);

MatrixDataset center(const MatrixDataset& d);
MatrixDataset transpose_dataset(const MatrixDataset& d);

/// sum_i X_i X_i^T / (n q)
GramMatrix gram_row(const MatrixDataset& d);
/// sum_i X_i^T X_i / (n p)
GramMatrix gram_col(const MatrixDataset& d);
/// gram_row restricted to the listed observations.
GramMatrix gram_row(const MatrixDataset& d, std::span<const std::size_t> obs);
GramMatrix gram_for_axis(const MatrixDataset& d, Axis axis);

/// D^{-1/2} G D^{-1/2}. Throws ZeroDiagonal if a diagonal entry is <= 1e-14.
GramMatrix to_correlation(const GramMatrix& g);

}  // namespace matns
