#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "matns/linalg.hpp"
#include "matns/rng.hpp"

namespace matns {

/// Undirected simple graph on vertices 0..dimension-1, pairs stored with a < b.
class EdgeSet {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  EdgeSet() = default;
  explicit EdgeSet(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return edges_.empty(); }
  /// Number of unordered off-diagonal pairs, p(p-1)/2.
  std::size_t max_edges() const noexcept { return dimension_ * (dimension_ - (dimension_ > 0)) / 2; }

  /// Inserts {a, b} canonically. Throws on a self-loop or out-of-range index.
  void insert(std::size_t a, std::size_t b);
  bool contains(std::size_t a, std::size_t b) const;

  std::vector<std::size_t> degrees() const;
  std::size_t max_degree() const;
  /// Edge count divided by p(p-1)/2.
  double density() const;

  auto begin() const { return edges_.begin(); }
  auto end() const { return edges_.end(); }

  bool is_subset_of(const EdgeSet& other) const;
  bool operator==(const EdgeSet&) const = default;

 private:
  std::size_t dimension_ = 0;
  std::set<Edge> edges_;
};

enum class Structure { Hub, Band, Random, Custom };

std::string to_string(Structure s);
Structure parse_structure(const std::string& name);

/// Structure kind plus signal size, e.g. "band:0.6".
struct GeneratorSpec {
  Structure kind = Structure::Band;
  double rho = 0.6;
};

GeneratorSpec parse_generator_spec(const std::string& text);
std::string to_string(const GeneratorSpec& spec);

/// A precision matrix with provenance. Generators may return an indefinite
/// omega; repair_pd makes hub and random structures positive definite.
struct PrecisionModel {
  DenseMatrix omega;
  Structure structure = Structure::Custom;
  double rho = 0.0;

  SpdMatrix spd() const { return SpdMatrix(omega); }
};

/// Hub rows 0, 10, 20, ... each joined to the nine indices that follow.
PrecisionModel gen_hub(std::size_t p, double rho);
/// rho on the first off-diagonal, rho/2 on the second.
PrecisionModel gen_band(std::size_t p, double rho);
/// Each pair set to rho with probability min(0.05, 5/p).
PrecisionModel gen_random(std::size_t p, double rho, Rng& rng);

double random_edge_probability(std::size_t p);

/// omega + (0.05 + |lambda_min(omega)|) I, applied unconditionally.
PrecisionModel repair_pd(PrecisionModel model);

/// Multiplies each diagonal entry by a U[1,5] draw, taken in index order.
PrecisionModel scale_diag_hetero(PrecisionModel model, Rng& rng);
/// Multiplies diagonal entry i by multipliers[i].
PrecisionModel scale_diag(PrecisionModel model, std::span<const double> multipliers);

/// Generator, then repair for hub and random structures.
PrecisionModel build_precision(const GeneratorSpec& spec, std::size_t p, Rng& rng);

/// {a, b} with |omega_ab| > zero_tol.
EdgeSet edge_set(const DenseMatrix& omega, double zero_tol = 0.0);

}  // namespace matns
