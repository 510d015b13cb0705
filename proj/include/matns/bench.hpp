#pragma once

// Simulation benchmark harness, connectivity-level calibration and the
// group connectivity table.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "matns/estimators.hpp"
#include "matns/evaluation.hpp"
#include "matns/graph.hpp"
#include "matns/matnorm.hpp"

namespace matns {

enum class Method { MatrixNs, Gemini };
enum class VarianceMode { Heterogeneous, Homogeneous };

std::string to_string(Method m);
Method parse_method(const std::string& name);
std::string to_string(VarianceMode m);
VarianceMode parse_variance_mode(const std::string& name);

struct GridSpec {
  double log2_lo = -10.0;
  double log2_hi = 2.0;
  double log2_step = 0.25;

  Vector lambdas() const { return log2_grid(log2_lo, log2_hi, log2_step); }
};

/// "lo:hi:step", e.g. "-10:2:0.25".
GridSpec parse_grid(const std::string& text);

struct CvSpec {
  std::size_t folds = 5;
  CvMode mode = CvMode::Global;
};

/// "K:global" or "K:individual".
CvSpec parse_cv_spec(const std::string& text);

struct ExperimentConfig {
  std::size_t n = 20;
  std::size_t p = 20;
  std::size_t q = 20;
  GeneratorSpec row_structure{Structure::Band, 0.6};
  GeneratorSpec col_structure{Structure::Band, 0.6};
  VarianceMode variance_mode = VarianceMode::Heterogeneous;
  GridSpec lambda_grid;
  std::size_t replicates = 100;
  std::vector<Method> methods{Method::MatrixNs, Method::Gemini};
  CombineRule rule = CombineRule::And;
  std::uint64_t seed = 1;
  std::optional<CvSpec> cv;
  bool keep_curves = false;
  std::string label;

  /// Throws InvalidArgument on an invalid combination.
  void validate() const;
  bool uses(Method m) const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults. Throws InvalidArgument on unknown keys.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_json(const nlohmann::json& j, const ExperimentConfig& base);
  /// A single object, or {"settings": [...]} whose entries override the
  /// remaining top-level keys.
  static std::vector<ExperimentConfig> load(const std::filesystem::path& path);

  /// fnv1a of the canonical JSON dump.
  std::string hash() const;
};

struct SyntheticDraw {
  PrecisionModel omega_u;
  PrecisionModel omega_v;
  SpdMatrix u;
  SpdMatrix v;
  EdgeSet edges_u;
  EdgeSet edges_v;
  MatrixDataset data;
};

/// Precision matrices, covariances and a sample for one replicate seed.
/// Draw order: Omega_U, Omega_V, diagonal scaling of U then V, sample.
SyntheticDraw simulate(const ExperimentConfig& config, std::uint64_t replicate_seed);

/// Seed of replicate i.
std::uint64_t replicate_seed(const ExperimentConfig& config, std::size_t i);

struct CvOutcome {
  double lambda = 0.0;  // global choice, or the median of the per-node choices
  double fpr = 0.0;
  double tpr = 0.0;
};

struct MethodAxisResult {
  Method method = Method::MatrixNs;
  Axis axis = Axis::Row;
  double pauc = 0.0;
  std::optional<CvOutcome> cv;
  std::vector<ConfusionPoint> curve;  // only kept when keep_curves
  std::vector<std::string> warnings;
};

struct ReplicateResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<MethodAxisResult> results;
};

struct AggregateRow {
  Method method = Method::MatrixNs;
  Axis axis = Axis::Row;
  Summary pauc;
  std::size_t failed = 0;
};

struct RunRecord {
  ExperimentConfig config;
  std::vector<ReplicateResult> replicates;  // by index
  std::vector<AggregateRow> aggregates;
  double wall_clock_seconds = 0.0;
  std::string version;

  std::size_t failed_count() const;
  /// pAUC values of successful replicates, in replicate order.
  std::vector<double> pauc_values(Method m, Axis axis) const;
  const AggregateRow& aggregate(Method m, Axis axis) const;
};

ReplicateResult run_replicate(const ExperimentConfig& config, std::size_t index);

/// Runs body(i) for i in [0, count) on `workers` threads.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body);

/// workers = 0 selects the available hardware parallelism.
RunRecord run_bench(const ExperimentConfig& config, std::size_t workers = 0);

std::string aggregate_csv(const RunRecord& record);
std::string replicates_csv(const RunRecord& record);
nlohmann::json run_json(const RunRecord& record);
/// aggregate.csv, replicates.csv, run.json and, with keep_curves, curves/*.csv.
void write_run(const std::filesystem::path& dir, const RunRecord& record);

/// Edge set of one fit, for calibration.
using FitAtLambda = std::function<EdgeSet(double)>;

struct Calibration {
  double lambda = 0.0;
  double level = 0.0;
  EdgeSet edges;
  bool monotone = true;
  std::size_t evaluations = 0;
};

/// Scans the descending grid, then bisects in log2(lambda) between the
/// bracketing grid points when edge counts are monotone along the grid; falls
/// back to the best grid point otherwise. Throws TargetUnreachable when the
/// closest level found is farther than tol from target.
Calibration calibrate_connectivity(const FitAtLambda& fit, std::span<const double> grid, double target,
                                   double tol, std::size_t max_bisections = 60);

struct GroupDensity {
  std::string group_a;
  std::string group_b;  // equal to group_a for within-group rows
  std::size_t edges = 0;
  std::size_t possible = 0;
  double density = 0.0;
};

/// One label per node. Groups are ordered by first appearance; within-group
/// rows come first, then between-group pairs by label distance.
std::vector<GroupDensity> group_connectivity(const EdgeSet& edges, const std::vector<std::string>& labels);

/// One label per non-comment line.
std::vector<std::string> read_partition(const std::filesystem::path& path);

}  // namespace matns
