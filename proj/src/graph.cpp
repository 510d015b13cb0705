#include "matns/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "matns/error.hpp"

namespace matns {

void EdgeSet::insert(std::size_t a, std::size_t b) {
  if (a == b) throw InvalidArgument("self-loop at vertex " + std::to_string(a));
  if (a >= dimension_ || b >= dimension_) {
    throw InvalidArgument("edge endpoint out of range for dimension " + std::to_string(dimension_));
  }
  edges_.emplace(std::min(a, b), std::max(a, b));
}

bool EdgeSet::contains(std::size_t a, std::size_t b) const {
  return edges_.contains({std::min(a, b), std::max(a, b)});
}

std::vector<std::size_t> EdgeSet::degrees() const {
  std::vector<std::size_t> deg(dimension_, 0);
  for (const auto& [a, b] : edges_) {
    ++deg[a];
    ++deg[b];
  }
  return deg;
}

std::size_t EdgeSet::max_degree() const {
  const auto deg = degrees();
  return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

double EdgeSet::density() const {
  const std::size_t m = max_edges();
  return m == 0 ? 0.0 : static_cast<double>(edges_.size()) / static_cast<double>(m);
}

bool EdgeSet::is_subset_of(const EdgeSet& other) const {
  return std::includes(other.edges_.begin(), other.edges_.end(), edges_.begin(), edges_.end());
}

std::string to_string(Structure s) {
  switch (s) {
    case Structure::Hub: return "hub";
    case Structure::Band: return "band";
    case Structure::Random: return "random";
    case Structure::Custom: return "custom";
  }
  return "custom";
}

Structure parse_structure(const std::string& name) {
  if (name == "hub") return Structure::Hub;
  if (name == "band") return Structure::Band;
  if (name == "random") return Structure::Random;
  if (name == "custom") return Structure::Custom;
  throw InvalidArgument("unknown graph structure '" + name + "'");
}

GeneratorSpec parse_generator_spec(const std::string& text) {
  const auto colon = text.find(':');
  GeneratorSpec spec;
  spec.kind = parse_structure(text.substr(0, colon));
  if (spec.kind == Structure::Custom) throw InvalidArgument("custom structure cannot be generated");
  if (colon == std::string::npos) {
    spec.rho = spec.kind == Structure::Band ? 0.6 : 0.4;
    return spec;
  }
  const std::string rho = text.substr(colon + 1);
  char* end = nullptr;
  spec.rho = std::strtod(rho.c_str(), &end);
  if (rho.empty() || *end != '\0') throw InvalidArgument("bad signal size in '" + text + "'");
  return spec;
}

std::string to_string(const GeneratorSpec& spec) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, spec.rho);
  return to_string(spec.kind) + ":" + std::string(buf, res.ptr);
}

PrecisionModel gen_hub(std::size_t p, double rho) {
  if (p < 10 || p % 10 != 0) {
    throw InvalidDimension("hub structure needs p to be a positive multiple of 10, got " +
                           std::to_string(p));
  }
  DenseMatrix omega = DenseMatrix::identity(p);
  for (std::size_t hub = 0; hub < p; hub += 10) {
    for (std::size_t j = hub + 1; j < hub + 10; ++j) {
      omega(hub, j) = rho;
      omega(j, hub) = rho;
    }
  }
  return {std::move(omega), Structure::Hub, rho};
}

PrecisionModel gen_band(std::size_t p, double rho) {
  if (p < 3) throw InvalidDimension("band structure needs p >= 3, got " + std::to_string(p));
  DenseMatrix omega = DenseMatrix::identity(p);
  for (std::size_t i = 0; i + 1 < p; ++i) {
    omega(i, i + 1) = rho;
    omega(i + 1, i) = rho;
    if (i + 2 < p) {
      omega(i, i + 2) = rho / 2.0;
      omega(i + 2, i) = rho / 2.0;
    }
  }
  return {std::move(omega), Structure::Band, rho};
}

double random_edge_probability(std::size_t p) {
  return std::min(0.05, 5.0 / static_cast<double>(p));
}

PrecisionModel gen_random(std::size_t p, double rho, Rng& rng) {
  if (p < 2) throw InvalidDimension("random structure needs p >= 2, got " + std::to_string(p));
  const double prob = random_edge_probability(p);
  DenseMatrix omega = DenseMatrix::identity(p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      if (rng.uniform() < prob) {
        omega(i, j) = rho;
        omega(j, i) = rho;
      }
    }
  }
  return {std::move(omega), Structure::Random, rho};
}

PrecisionModel repair_pd(PrecisionModel model) {
  const double lambda_min = sym_eigen(model.omega).values.back();
  const double shift = 0.05 + std::abs(lambda_min);
  for (std::size_t i = 0; i < model.omega.rows(); ++i) model.omega(i, i) += shift;
  return model;
}

PrecisionModel scale_diag(PrecisionModel model, std::span<const double> multipliers) {
  if (multipliers.size() != model.omega.rows()) throw DimensionMismatch("scale_diag");
  for (std::size_t i = 0; i < multipliers.size(); ++i) model.omega(i, i) *= multipliers[i];
  return model;
}

PrecisionModel scale_diag_hetero(PrecisionModel model, Rng& rng) {
  Vector draws(model.omega.rows());
  for (double& d : draws) d = rng.uniform(1.0, 5.0);
  return scale_diag(std::move(model), draws);
}

PrecisionModel build_precision(const GeneratorSpec& spec, std::size_t p, Rng& rng) {
  switch (spec.kind) {
    case Structure::Hub: return repair_pd(gen_hub(p, spec.rho));
    case Structure::Band: return gen_band(p, spec.rho);
    case Structure::Random: return repair_pd(gen_random(p, spec.rho, rng));
    case Structure::Custom: break;
  }
  throw InvalidArgument("custom structure cannot be generated");
}

EdgeSet edge_set(const DenseMatrix& omega, double zero_tol) {
  if (!omega.is_square()) throw DimensionMismatch("edge_set requires a square matrix");
  EdgeSet edges(omega.rows());
  for (std::size_t a = 0; a < omega.rows(); ++a)
    for (std::size_t b = a + 1; b < omega.cols(); ++b)
      if (std::abs(omega(a, b)) > zero_tol) edges.insert(a, b);
  return edges;
}

}  // namespace matns
