#include "matns/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "matns/error.hpp"
#include "matns/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace matns {

std::string to_string(Method m) { return m == Method::MatrixNs ? "matrixns" : "gemini"; }

Method parse_method(const std::string& name) {
  if (name == "matrixns" || name == "matrixNS" || name == "ns") return Method::MatrixNs;
  if (name == "gemini" || name == "GEMINI") return Method::Gemini;
  throw InvalidArgument("unknown method '" + name + "' (expected matrixns or gemini)");
}

std::string to_string(VarianceMode m) {
  return m == VarianceMode::Heterogeneous ? "heterogeneous" : "homogeneous";
}

VarianceMode parse_variance_mode(const std::string& name) {
  if (name == "heterogeneous" || name == "hetero") return VarianceMode::Heterogeneous;
  if (name == "homogeneous" || name == "homo") return VarianceMode::Homogeneous;
  throw InvalidArgument("unknown variance mode '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(text);
  while (std::getline(ss, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("bad " + what + " '" + s + "'");
  }
}

}  // namespace

GridSpec parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw InvalidArgument("grid must be lo:hi:step, got '" + text + "'");
  GridSpec g{parse_number(parts[0], "grid bound"), parse_number(parts[1], "grid bound"),
             parse_number(parts[2], "grid step")};
  g.lambdas();
  return g;
}

CvSpec parse_cv_spec(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw InvalidArgument("cv spec must be K:global|individual, got '" + text + "'");
  const double k = parse_number(parts[0], "fold count");
  if (k < 2 || k != std::floor(k)) throw InvalidArgument("fold count must be an integer >= 2");
  return {static_cast<std::size_t>(k), parse_cv_mode(parts[1])};
}

void ExperimentConfig::validate() const {
  if (n < 2) throw InvalidArgument("n must be at least 2");
  if (p < 2 || q < 2) throw InvalidArgument("p and q must be at least 2");
  if (replicates < 1) throw InvalidArgument("replicates must be at least 1");
  if (methods.empty()) throw InvalidArgument("at least one method is required");
  if (lambda_grid.lambdas().empty()) throw InvalidArgument("lambda grid is empty");
  if (cv && cv->folds > n) throw InvalidArgument("cv folds exceed n");
}

bool ExperimentConfig::uses(Method m) const {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

json ExperimentConfig::to_json() const {
  json j;
  j["n"] = n;
  j["p"] = p;
  j["q"] = q;
  j["row_structure"] = to_string(row_structure);
  j["col_structure"] = to_string(col_structure);
  j["variance_mode"] = to_string(variance_mode);
  j["lambda_grid"] = {{"log2_lo", lambda_grid.log2_lo}, {"log2_hi", lambda_grid.log2_hi},
                      {"log2_step", lambda_grid.log2_step}};
  j["replicates"] = replicates;
  json ms = json::array();
  for (Method m : methods) ms.push_back(to_string(m));
  j["methods"] = ms;
  j["rule"] = to_string(rule);
  j["seed"] = seed;
  j["cv"] = cv ? json{{"folds", cv->folds}, {"mode", to_string(cv->mode)}} : json(nullptr);
  j["keep_curves"] = keep_curves;
  j["label"] = label;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) { return from_json(j, ExperimentConfig{}); }

ExperimentConfig ExperimentConfig::from_json(const json& j, const ExperimentConfig& base) {
  static const std::set<std::string> known{"n", "p", "q", "row_structure", "col_structure", "variance_mode",
                                           "lambda_grid", "replicates", "methods", "rule", "seed", "cv",
                                           "keep_curves", "label"};
  if (!j.is_object()) throw InvalidArgument("experiment config must be a JSON object");
  ExperimentConfig c = base;
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.contains(key)) throw InvalidArgument("unknown config key '" + key + "'");
      if (key == "n") c.n = value.get<std::size_t>();
      else if (key == "p") c.p = value.get<std::size_t>();
      else if (key == "q") c.q = value.get<std::size_t>();
      else if (key == "row_structure") c.row_structure = parse_generator_spec(value.get<std::string>());
      else if (key == "col_structure") c.col_structure = parse_generator_spec(value.get<std::string>());
      else if (key == "variance_mode") c.variance_mode = parse_variance_mode(value.get<std::string>());
      else if (key == "lambda_grid") {
        if (value.is_string()) c.lambda_grid = parse_grid(value.get<std::string>());
        else c.lambda_grid = {value.at("log2_lo").get<double>(), value.at("log2_hi").get<double>(),
                              value.at("log2_step").get<double>()};
      } else if (key == "replicates") c.replicates = value.get<std::size_t>();
      else if (key == "methods") {
        c.methods.clear();
        for (const auto& m : value) c.methods.push_back(parse_method(m.get<std::string>()));
      } else if (key == "rule") c.rule = parse_rule(value.get<std::string>());
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "cv") {
        if (value.is_null()) c.cv.reset();
        else if (value.is_string()) c.cv = parse_cv_spec(value.get<std::string>());
        else c.cv = CvSpec{value.at("folds").get<std::size_t>(), parse_cv_mode(value.at("mode").get<std::string>())};
      } else if (key == "keep_curves") c.keep_curves = value.get<bool>();
      else if (key == "label") c.label = value.get<std::string>();
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<ExperimentConfig> ExperimentConfig::load(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw InvalidArgument(path.string() + ": expected a JSON object");
  if (!j.contains("settings")) return {from_json(j)};
  json shared = j;
  shared.erase("settings");
  ExperimentConfig base;
  for (const auto& [key, value] : shared.items()) {
    json one;
    one[key] = value;
    base = from_json(one, base);
  }
  std::vector<ExperimentConfig> out;
  for (const auto& s : j.at("settings")) out.push_back(from_json(s, base));
  if (out.empty()) throw InvalidArgument(path.string() + ": empty settings list");
  return out;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(to_json().dump()); }

std::uint64_t replicate_seed(const ExperimentConfig& config, std::size_t i) {
  return derive_seed(config.seed, i);
}

SyntheticDraw simulate(const ExperimentConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  PrecisionModel ou = build_precision(config.row_structure, config.p, rng);
  PrecisionModel ov = build_precision(config.col_structure, config.q, rng);
  if (config.variance_mode == VarianceMode::Heterogeneous) {
    ou = scale_diag_hetero(std::move(ou), rng);
    ov = scale_diag_hetero(std::move(ov), rng);
  }
  SpdMatrix u(ou.spd().inverse());
  SpdMatrix v(ov.spd().inverse());
  EdgeSet eu = edge_set(ou.omega);
  EdgeSet ev = edge_set(ov.omega);
  MatrixDataset data = sample(config.n, u, v, rng);
  data.seed = seed;
  return {std::move(ou), std::move(ov), std::move(u), std::move(v), std::move(eu), std::move(ev), std::move(data)};
}

namespace {

CvOutcome cv_outcome(const MatrixDataset& standardized, Axis axis, const CvSpec& spec, const Vector& grid,
                     CombineRule rule, const EdgeSet& truth, std::uint64_t seed) {
  Rng rng(derive_seed(seed, axis == Axis::Row ? 1 : 2));
  const CvResult cv = cv_tune(standardized, axis, spec.folds, grid, spec.mode, rng);
  MatrixNsFit fit;
  CvOutcome out;
  if (spec.mode == CvMode::Global) {
    fit = matrixns_fit(standardized, axis, cv.global_lambda, rule);
    out.lambda = cv.global_lambda;
  } else {
    fit = matrixns_fit(standardized, axis, cv.node_lambdas, rule);
    Vector sorted = cv.node_lambdas;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    out.lambda = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  }
  const ConfusionPoint c = confusion(fit.edges, truth);
  out.fpr = c.fpr;
  out.tpr = c.tpr;
  return out;
}

}  // namespace

ReplicateResult run_replicate(const ExperimentConfig& config, std::size_t index) {
  ReplicateResult rep;
  rep.index = index;
  rep.seed = replicate_seed(config, index);
  try {
    const SyntheticDraw draw = simulate(config, rep.seed);
    const Vector grid = config.lambda_grid.lambdas();
    for (Method m : {Method::MatrixNs, Method::Gemini}) {
      if (!config.uses(m)) continue;
      const MatrixDataset prepared = m == Method::MatrixNs ? standardize(draw.data) : center(draw.data);
      for (Axis axis : {Axis::Row, Axis::Col}) {
        const EdgeSet& truth = axis == Axis::Row ? draw.edges_u : draw.edges_v;
        const EstimatePath path = m == Method::MatrixNs ? matrixns_path(prepared, axis, grid, config.rule)
                                                        : gemini_path(prepared, axis, grid);
        const RocCurve roc = roc_from_path(path.points, truth);
        MethodAxisResult r;
        r.method = m;
        r.axis = axis;
        r.pauc = roc.partial_auc;
        r.warnings = path.warnings;
        if (config.keep_curves) r.curve = roc.points;
        if (m == Method::MatrixNs && config.cv) {
          r.cv = cv_outcome(prepared, axis, *config.cv, grid, config.rule, truth, rep.seed);
        }
        rep.results.push_back(std::move(r));
      }
    }
    rep.ok = true;
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.error = e.what();
    rep.results.clear();
  }
  return rep;
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          const std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::size_t RunRecord::failed_count() const {
  return static_cast<std::size_t>(std::count_if(replicates.begin(), replicates.end(),
                                                [](const ReplicateResult& r) { return !r.ok; }));
}

std::vector<double> RunRecord::pauc_values(Method m, Axis axis) const {
  std::vector<double> values;
  for (const auto& rep : replicates) {
    if (!rep.ok) continue;
    for (const auto& r : rep.results)
      if (r.method == m && r.axis == axis) values.push_back(r.pauc);
  }
  return values;
}

const AggregateRow& RunRecord::aggregate(Method m, Axis axis) const {
  for (const auto& a : aggregates)
    if (a.method == m && a.axis == axis) return a;
  throw InvalidArgument("no aggregate for " + to_string(m) + "/" + to_string(axis));
}

RunRecord run_bench(const ExperimentConfig& config, std::size_t workers) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunRecord record;
  record.config = config;
  record.version = kVersion;
  record.replicates.resize(config.replicates);
  parallel_for(config.replicates, workers,
               [&](std::size_t i) { record.replicates[i] = run_replicate(config, i); });

  const std::size_t failed = record.failed_count();
  for (Method m : {Method::MatrixNs, Method::Gemini}) {
    if (!config.uses(m)) continue;
    for (Axis axis : {Axis::Row, Axis::Col}) {
      AggregateRow row;
      row.method = m;
      row.axis = axis;
      row.failed = failed;
      const auto values = record.pauc_values(m, axis);
      if (!values.empty()) row.pauc = aggregate(values);
      record.aggregates.push_back(row);
    }
  }
  record.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

namespace {

Provenance provenance_of(const ExperimentConfig& c) {
  Provenance p;
  p.seed = c.seed;
  p.config_hash = c.hash();
  return p;
}

}  // namespace

std::string aggregate_csv(const RunRecord& record) {
  std::string s = provenance_of(record.config).comment_line();
  s += "method,axis,mean_pauc,sd_pauc,se_pauc,replicates,failed\n";
  for (const auto& a : record.aggregates) {
    s += to_string(a.method) + "," + to_string(a.axis) + "," + format_double(a.pauc.mean) + "," +
         format_double(a.pauc.sd) + "," + format_double(a.pauc.standard_error()) + "," +
         std::to_string(a.pauc.count) + "," + std::to_string(a.failed) + "\n";
  }
  return s;
}

std::string replicates_csv(const RunRecord& record) {
  std::string s = provenance_of(record.config).comment_line();
  s += "replicate,seed,method,axis,pauc,cv_lambda,cv_fpr,cv_tpr\n";
  for (const auto& rep : record.replicates) {
    for (const auto& r : rep.results) {
      s += std::to_string(rep.index) + "," + std::to_string(rep.seed) + "," + to_string(r.method) + "," +
           to_string(r.axis) + "," + format_double(r.pauc);
      if (r.cv) s += "," + format_double(r.cv->lambda) + "," + format_double(r.cv->fpr) + "," + format_double(r.cv->tpr);
      else s += ",,,";
      s += "\n";
    }
  }
  return s;
}

json run_json(const RunRecord& record) {
  json j;
  j["config"] = record.config.to_json();
  j["provenance"] = provenance_of(record.config).to_json();
  j["version"] = record.version;
  j["wall_clock_seconds"] = record.wall_clock_seconds;
  j["replicates"] = record.config.replicates;
  j["failed"] = record.failed_count();
  json failures = json::array();
  for (const auto& rep : record.replicates)
    if (!rep.ok) failures.push_back({{"replicate", rep.index}, {"seed", rep.seed}, {"error", rep.error}});
  j["failures"] = failures;
  json agg = json::array();
  for (const auto& a : record.aggregates) {
    agg.push_back({{"method", to_string(a.method)}, {"axis", to_string(a.axis)}, {"mean", a.pauc.mean},
                   {"sd", a.pauc.sd}, {"se", a.pauc.standard_error()}, {"count", a.pauc.count}});
  }
  j["aggregates"] = agg;
  return j;
}

void write_run(const fs::path& dir, const RunRecord& record) {
  fs::create_directories(dir);
  write_text(dir / "aggregate.csv", aggregate_csv(record));
  write_text(dir / "replicates.csv", replicates_csv(record));
  write_text(dir / "run.json", run_json(record).dump(2) + "\n");
  if (!record.config.keep_curves) return;
  const std::string prov = provenance_of(record.config).comment_line();
  for (const auto& rep : record.replicates) {
    for (const auto& r : rep.results) {
      std::string s = prov + "lambda,fpr,tpr\n";
      for (const auto& c : r.curve) s += format_double(c.lambda) + "," + format_double(c.fpr) + "," + format_double(c.tpr) + "\n";
      write_text(dir / "curves" / ("roc_" + to_string(r.method) + "_" + to_string(r.axis) + "_r" +
                                   std::to_string(rep.index) + ".csv"),
                 s);
    }
  }
}

Calibration calibrate_connectivity(const FitAtLambda& fit, std::span<const double> grid, double target,
                                   double tol, std::size_t max_bisections) {
  if (!(target >= 0.0 && target < 1.0)) throw InvalidArgument("target level must lie in [0, 1)");
  if (!(tol >= 0.0)) throw InvalidArgument("tolerance must be non-negative");
  if (grid.empty()) throw InvalidArgument("calibration grid is empty");
  std::vector<double> lambdas(grid.begin(), grid.end());
  std::sort(lambdas.rbegin(), lambdas.rend());

  Calibration best;
  double best_gap = std::numeric_limits<double>::infinity();
  auto evaluate = [&](double lambda) {
    EdgeSet e = fit(lambda);
    ++best.evaluations;
    const double level = e.density();
    const double gap = std::abs(level - target);
    if (gap < best_gap) {
      best_gap = gap;
      best.lambda = lambda;
      best.level = level;
      best.edges = std::move(e);
    }
    return level;
  };

  std::vector<double> levels;
  for (double l : lambdas) levels.push_back(evaluate(l));
  best.monotone = std::is_sorted(levels.begin(), levels.end());

  if (best_gap > tol && best.monotone) {
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
      if (!(levels[k] < target && target < levels[k + 1])) continue;
      double hi = std::log2(lambdas[k]);  // sparser side
      double lo = std::log2(lambdas[k + 1]);
      for (std::size_t it = 0; it < max_bisections && best_gap > tol; ++it) {
        const double mid = 0.5 * (hi + lo);
        const double level = evaluate(std::exp2(mid));
        if (level < target) hi = mid;
        else lo = mid;
      }
      break;
    }
  }
  if (best_gap > tol) {
    throw TargetUnreachable("closest connectivity level " + format_double(best.level) + " at lambda " +
                            format_double(best.lambda) + " misses target " + format_double(target) +
                            " by more than " + format_double(tol));
  }
  return best;
}

std::vector<GroupDensity> group_connectivity(const EdgeSet& edges, const std::vector<std::string>& labels) {
  if (labels.size() != edges.dimension()) {
    throw DimensionMismatch("partition has " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(edges.dimension()) + " nodes");
  }
  std::vector<std::string> groups;
  std::vector<std::size_t> group_of(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find(groups.begin(), groups.end(), labels[i]);
    if (it == groups.end()) {
      groups.push_back(labels[i]);
      it = groups.end() - 1;
    }
    group_of[i] = static_cast<std::size_t>(it - groups.begin());
  }
  const std::size_t g = groups.size();
  std::vector<std::size_t> sizes(g, 0);
  for (auto k : group_of) ++sizes[k];
  DenseMatrix counts(g, g, 0.0);
  for (const auto& [a, b] : edges) {
    const auto ga = std::min(group_of[a], group_of[b]);
    const auto gb = std::max(group_of[a], group_of[b]);
    counts(ga, gb) += 1.0;
  }
  std::vector<GroupDensity> rows;
  for (std::size_t gap = 0; gap < g; ++gap) {
    for (std::size_t i = 0; i + gap < g; ++i) {
      const std::size_t j = i + gap;
      GroupDensity r;
      r.group_a = groups[i];
      r.group_b = groups[j];
      r.edges = static_cast<std::size_t>(counts(i, j));
      r.possible = i == j ? sizes[i] * (sizes[i] - 1) / 2 : sizes[i] * sizes[j];
      r.density = r.possible == 0 ? 0.0 : static_cast<double>(r.edges) / static_cast<double>(r.possible);
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<std::string> read_partition(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    labels.push_back(line.substr(b, e - b + 1));
  }
  if (labels.empty()) throw FormatError(path.string() + ": no labels");
  return labels;
}

}  // namespace matns
