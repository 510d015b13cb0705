#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "matns/bench.hpp"
#include "matns/diagnostics.hpp"
#include "matns/error.hpp"
#include "matns/estimators.hpp"
#include "matns/io.hpp"
#include "matns/matnorm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace matns;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct SimulationFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n, p, q, replicates;
  std::optional<std::string> row, col, variance, grid, rule, cv;
  std::vector<std::string> methods;
  bool keep_curves = false;
};

void add_simulation_flags(CLI::App* cmd, SimulationFlags& f) {
  cmd->add_option("--config", f.config, "Experiment config JSON");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--n", f.n, "Observations per dataset");
  cmd->add_option("--p", f.p, "Row dimension");
  cmd->add_option("--q", f.q, "Column dimension");
  cmd->add_option("--row", f.row, "Row precision structure kind[:rho]");
  cmd->add_option("--col", f.col, "Column precision structure kind[:rho]");
  cmd->add_option("--variance", f.variance, "heterogeneous|homogeneous");
  cmd->add_option("--grid", f.grid, "log2 lambda grid lo:hi:step");
  cmd->add_option("--rule", f.rule, "and|or");
}

std::vector<ExperimentConfig> resolve_configs(const SimulationFlags& f) {
  std::vector<ExperimentConfig> configs =
      f.config.empty() ? std::vector<ExperimentConfig>{ExperimentConfig{}} : ExperimentConfig::load(f.config);
  for (auto& c : configs) {
    if (f.seed) c.seed = *f.seed;
    if (f.n) c.n = *f.n;
    if (f.p) c.p = *f.p;
    if (f.q) c.q = *f.q;
    if (f.replicates) c.replicates = *f.replicates;
    if (f.row) c.row_structure = parse_generator_spec(*f.row);
    if (f.col) c.col_structure = parse_generator_spec(*f.col);
    if (f.variance) c.variance_mode = parse_variance_mode(*f.variance);
    if (f.grid) c.lambda_grid = parse_grid(*f.grid);
    if (f.rule) c.rule = parse_rule(*f.rule);
    if (f.cv) c.cv = parse_cv_spec(*f.cv);
    if (!f.methods.empty()) {
      c.methods.clear();
      for (const auto& m : f.methods) c.methods.push_back(parse_method(m));
    }
    if (f.keep_curves) c.keep_curves = true;
    c.validate();
  }
  return configs;
}

int cmd_generate(const SimulationFlags& f, const fs::path& out) {
  const auto configs = resolve_configs(f);
  if (configs.size() != 1) throw InvalidArgument("generate takes a config with a single setting");
  const ExperimentConfig& c = configs.front();
  const std::uint64_t seed = replicate_seed(c, 0);
  const SyntheticDraw draw = simulate(c, seed);
  Provenance prov;
  prov.seed = c.seed;
  prov.config_hash = c.hash();

  json extra;
  extra["master_seed"] = c.seed;
  extra["replicate"] = 0;
  extra["config_hash"] = prov.config_hash;
  extra["preprocessing"] = "none";
  write_dataset_dir(out, draw.data, extra);
  const fs::path model = out / "model";
  write_matrix_csv(model / "omega_u.csv", draw.omega_u.omega);
  write_matrix_csv(model / "omega_v.csv", draw.omega_v.omega);
  write_matrix_csv(model / "u.csv", draw.u.matrix());
  write_matrix_csv(model / "v.csv", draw.v.matrix());
  write_edges_csv(model / "edges_u.csv", draw.edges_u, &prov);
  write_edges_csv(model / "edges_v.csv", draw.edges_v, &prov);
  json cfg = c.to_json();
  cfg["provenance"] = prov.to_json();
  write_text(out / "config.json", cfg.dump(2) + "\n");
  std::cout << "wrote n=" << c.n << " p=" << c.p << " q=" << c.q << " dataset to " << out.string() << "; "
            << draw.edges_u.size() << " row edges, " << draw.edges_v.size() << " column edges\n";
  return 0;
}

int cmd_bench(const SimulationFlags& f, const fs::path& out, std::size_t workers) {
  const auto configs = resolve_configs(f);
  for (std::size_t s = 0; s < configs.size(); ++s) {
    const ExperimentConfig& c = configs[s];
    const fs::path dir = configs.size() == 1
                             ? out
                             : out / (c.label.empty() ? "setting_" + std::to_string(s) : c.label);
    const RunRecord record = run_bench(c, workers);
    write_run(dir, record);
    std::cout << (c.label.empty() ? "setting " + std::to_string(s) : c.label) << " (n=" << c.n << " p=" << c.p
              << " q=" << c.q << " col=" << to_string(c.col_structure) << ", " << record.failed_count()
              << " failed)\n";
    for (const auto& a : record.aggregates) {
      std::printf("  %-9s %-4s pAUC %.4f (sd %.4f, se %.4f)\n", to_string(a.method).c_str(),
                  to_string(a.axis).c_str(), a.pauc.mean, a.pauc.sd, a.pauc.standard_error());
    }
  }
  return 0;
}

MatrixDataset prepare(const MatrixDataset& d, Method method, const std::string& mode, std::string& applied) {
  std::string m = mode;
  if (m == "auto") {
    if (method == Method::MatrixNs) m = d.standardized ? "none" : "standardize";
    else m = d.centered || d.standardized ? "none" : "center";
  }
  applied = m;
  if (m == "standardize") return standardize(d);
  if (m == "center") return center(d);
  if (m == "none") return d;
  throw InvalidArgument("unknown preprocessing '" + mode + "' (expected auto|standardize|center|none)");
}

struct FitFlags {
  std::string data;
  std::string method = "matrixns";
  std::string axis = "row";
  std::optional<double> lambda;
  std::optional<std::string> cv;
  std::string grid = "-10:2:0.25";
  std::string rule = "and";
  std::string preprocess = "auto";
  std::uint64_t seed = 1;
};

json warnings_json(const std::vector<std::string>& w) { return json(w); }

int cmd_fit(const FitFlags& f, const fs::path& out) {
  const Method method = parse_method(f.method);
  const Axis axis = parse_axis(f.axis);
  const CombineRule rule = parse_rule(f.rule);
  if (f.lambda.has_value() == f.cv.has_value()) throw InvalidArgument("give exactly one of --lambda and --cv");
  if (f.cv && method != Method::MatrixNs) throw InvalidArgument("--cv is available for matrixns only");
  if (f.lambda && !(*f.lambda > 0.0)) throw InvalidArgument("--lambda must be positive");

  const MatrixDataset raw = read_dataset(f.data);
  std::string applied;
  const MatrixDataset d = prepare(raw, method, f.preprocess, applied);

  json meta;
  meta["method"] = to_string(method);
  meta["axis"] = to_string(axis);
  meta["rule"] = to_string(rule);
  meta["preprocessing"] = applied;
  meta["dataset"] = f.data;
  meta["n"] = d.n;
  meta["p"] = d.p;
  meta["q"] = d.q;
  meta["seed"] = f.seed;

  EdgeSet edges;
  std::vector<std::string> warnings;
  if (f.lambda) {
    meta["lambda"] = *f.lambda;
    if (method == Method::MatrixNs) {
      const MatrixNsFit fit = matrixns_fit(d, axis, *f.lambda, rule);
      edges = fit.edges;
      warnings = fit.warnings;
    } else {
      const GeminiFit fit = gemini_fit(d, axis, *f.lambda);
      edges = fit.edges;
      warnings = fit.warnings;
      meta["glasso_kkt"] = fit.solution.dual_gap_or_kkt;
      meta["glasso_sweeps"] = fit.solution.iterations;
    }
  } else {
    const CvSpec spec = parse_cv_spec(*f.cv);
    const GridSpec grid = parse_grid(f.grid);
    const Vector lambdas = grid.lambdas();
    Rng rng(f.seed);
    const CvResult cv = cv_tune(d, axis, spec.folds, lambdas, spec.mode, rng);
    MatrixNsFit fit = spec.mode == CvMode::Global ? matrixns_fit(d, axis, cv.global_lambda, rule)
                                                  : matrixns_fit(d, axis, cv.node_lambdas, rule);
    edges = fit.edges;
    warnings = fit.warnings;
    meta["grid"] = f.grid;
    meta["cv"] = {{"folds", spec.folds},
                  {"mode", to_string(spec.mode)},
                  {"global_lambda", cv.global_lambda},
                  {"node_lambdas", cv.node_lambdas},
                  {"global_error", cv.global_error}};
    meta["lambda"] = spec.mode == CvMode::Global ? json(cv.global_lambda) : json(cv.node_lambdas);
  }
  meta["edges"] = edges.size();
  meta["warnings"] = warnings_json(warnings);
  meta["version"] = kVersion;
  Provenance prov;
  prov.seed = f.seed;
  prov.config_hash = fnv1a_hex(meta.dump());
  meta["config_hash"] = prov.config_hash;

  write_edges_csv(out / "edges.csv", edges, &prov);
  write_text(out / "fit.json", meta.dump(2) + "\n");
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << edges.size() << " edges (" << to_string(method) << ", " << to_string(axis) << ") written to "
            << (out / "edges.csv").string() << "\n";
  return 0;
}

struct ConnectivityFlags {
  FitFlags fit;
  double target = 0.1;
  double tol = 0.005;
  std::string partition;
};

int cmd_connectivity(const ConnectivityFlags& f, const fs::path& out) {
  const Method method = parse_method(f.fit.method);
  const Axis axis = parse_axis(f.fit.axis);
  const CombineRule rule = parse_rule(f.fit.rule);
  if (!(f.target >= 0.0 && f.target < 1.0)) throw InvalidArgument("--target must lie in [0, 1)");
  const MatrixDataset raw = read_dataset(f.fit.data);
  std::string applied;
  const MatrixDataset d = prepare(raw, method, f.fit.preprocess, applied);
  const GridSpec grid = parse_grid(f.fit.grid);
  const Vector lambdas = grid.lambdas();

  const FitAtLambda fit = [&](double lambda) {
    return method == Method::MatrixNs ? matrixns_fit(d, axis, lambda, rule).edges : gemini_fit(d, axis, lambda).edges;
  };
  const Calibration cal = calibrate_connectivity(fit, lambdas, f.target, f.tol);

  json meta;
  meta["method"] = to_string(method);
  meta["axis"] = to_string(axis);
  meta["rule"] = to_string(rule);
  meta["preprocessing"] = applied;
  meta["dataset"] = f.fit.data;
  meta["target"] = f.target;
  meta["tol"] = f.tol;
  meta["grid"] = f.fit.grid;
  meta["lambda"] = cal.lambda;
  meta["level"] = cal.level;
  meta["edges"] = cal.edges.size();
  meta["monotone"] = cal.monotone;
  meta["evaluations"] = cal.evaluations;
  meta["version"] = kVersion;
  Provenance prov;
  prov.seed = raw.seed;
  prov.config_hash = fnv1a_hex(meta.dump());
  meta["config_hash"] = prov.config_hash;

  write_edges_csv(out / "edges.csv", cal.edges, &prov);
  if (!f.partition.empty()) {
    const auto labels = read_partition(f.partition);
    const auto table = group_connectivity(cal.edges, labels);
    std::string csv = prov.comment_line() + "group_a,group_b,edges,possible,density\n";
    json rows = json::array();
    for (const auto& r : table) {
      csv += r.group_a + "," + r.group_b + "," + std::to_string(r.edges) + "," + std::to_string(r.possible) + "," +
             format_double(r.density) + "\n";
      rows.push_back({{"group_a", r.group_a}, {"group_b", r.group_b}, {"density", r.density}});
    }
    write_text(out / "group_connectivity.csv", csv);
    meta["group_connectivity"] = rows;
  }
  write_text(out / "connectivity.json", meta.dump(2) + "\n");
  std::cout << "level " << format_double(cal.level) << " at lambda " << format_double(cal.lambda) << " ("
            << cal.edges.size() << " edges)\n";
  return 0;
}

struct DiagnoseFlags {
  std::string u, v;
  std::string inputs = "covariance";
  double n = 20;
  double beta = 2.0;
  double c = 1.0, c1 = 1.0, c2 = 1.0, c_probe = 1.0;
  std::size_t probe_replicates = 200;
  std::optional<std::size_t> probe_m, probe_n;
  double t_max = 1.0;
  std::size_t t_points = 21;
  std::uint64_t seed = 1;
};

json inequality_json(const Inequality& in) {
  return {{"name", in.name}, {"lhs", in.lhs}, {"relation", in.relation}, {"rhs", in.rhs}, {"holds", in.holds}};
}

int cmd_diagnose(const DiagnoseFlags& f, const fs::path& out) {
  if (f.inputs != "covariance" && f.inputs != "precision") {
    throw InvalidArgument("--inputs must be covariance or precision");
  }
  if (!(f.n >= 1.0)) throw InvalidArgument("--n must be at least 1");
  if (!(f.beta > 1.0)) throw InvalidArgument("--beta must exceed 1");
  auto load = [&](const std::string& path) {
    const SpdMatrix m(read_matrix_csv(path));
    return f.inputs == "covariance" ? m : SpdMatrix(m.inverse());
  };
  const SpdMatrix u = load(f.u);
  const SpdMatrix v = load(f.v);
  const double p = static_cast<double>(u.dim());
  const double q = static_cast<double>(v.dim());
  const ModelDiagnostics diag = degree_and_bounds(u, v);

  json report;
  report["inputs"] = {{"u", f.u}, {"v", f.v}, {"kind", f.inputs}, {"n", f.n}, {"p", u.dim()}, {"q", v.dim()},
                      {"beta", f.beta}, {"c", f.c}, {"c1", f.c1}, {"c2", f.c2}, {"probe_c", f.c_probe},
                      {"seed", f.seed}};
  report["model"] = {{"alpha", diag.alpha},
                     {"d_max", diag.d_max},
                     {"lambda_min_u", diag.lambda_min_u},
                     {"lambda_max_u", diag.lambda_max_u},
                     {"lambda_min_v", diag.lambda_min_v},
                     {"lambda_max_v", diag.lambda_max_v},
                     {"u_max", diag.u_max},
                     {"v_avg", diag.v_avg}};
  double lambda = 0.0;
  if (diag.d_max == 0) {
    lambda = lambda_rule_incoherence_branch(diag, f.n, p, q, f.beta, f.c);
    report["lambda_rule"] = {{"value", lambda}, {"branch", "incoherence only (empty graph)"}};
  } else {
    lambda = lambda_rule(diag, f.n, p, q, f.beta, f.c);
    report["lambda_rule"] = {{"value", lambda}, {"branch", "full"}};
  }
  report["betamin_threshold"] = betamin_threshold(lambda, diag);

  const ConditionReport cond = check_conditions(diag, f.n, p, q, f.beta, f.c1, f.c2);
  json c1 = json::array(), c2 = json::array();
  for (const auto& in : cond.c1) c1.push_back(inequality_json(in));
  for (const auto& in : cond.c2) c2.push_back(inequality_json(in));
  if (!cond.incoherence.holds) {
    report["warnings"] = json::array({"incoherence fails (alpha <= 0); the lambda rule and verdict do not apply"});
  }
  report["conditions"] = {{"incoherence", inequality_json(cond.incoherence)},
                          {"a", inequality_json(cond.a)},
                          {"b", inequality_json(cond.b)},
                          {"c1", c1},
                          {"c2", c2},
                          {"a_holds", cond.a_holds},
                          {"b_holds", cond.b_holds},
                          {"c1_holds", cond.c1_holds},
                          {"c2_holds", cond.c2_holds},
                          {"verdict", cond.verdict},
                          {"simplified", {inequality_json(cond.simplified_n), inequality_json(cond.simplified_nq)}},
                          {"simplified_holds", cond.simplified_holds},
                          {"probability_floor", cond.probability_floor}};

  Provenance prov;
  prov.seed = f.seed;
  prov.config_hash = fnv1a_hex(report["inputs"].dump());
  if (f.probe_replicates > 0) {
    const std::size_t m = f.probe_m.value_or(std::clamp<std::size_t>(diag.d_max, 1, u.dim()));
    const std::size_t n = f.probe_n.value_or(static_cast<std::size_t>(f.n));
    Rng rng(f.seed);
    const ProbeResult probe =
        concentration_probe(u, v, m, n, f.probe_replicates, rng, default_t_grid(f.t_max, f.t_points), f.c_probe);
    std::string csv = prov.comment_line() + "t,empirical_tail,bound\n";
    for (const auto& r : probe.table) {
      csv += format_double(r.t) + "," + format_double(r.empirical_tail) + "," + format_double(r.bound) + "\n";
    }
    write_text(out / "probe.csv", csv);
    report["probe"] = {{"m", probe.m},
                       {"n", probe.n},
                       {"replicates", probe.replicates},
                       {"a1", probe.constants.a1},
                       {"a2", probe.constants.a2},
                       {"a3", probe.constants.a3},
                       {"u_norm", probe.u_norm},
                       {"median_deviation", probe.median_deviation},
                       {"smallest_dominating_c", probe.smallest_dominating_c},
                       {"small_deviation_frequency", probe.small_deviation_frequency},
                       {"inverse_bound_violations", probe.inverse_bound_violations},
                       {"table", "probe.csv"}};
  }
  report["provenance"] = prov.to_json();
  write_text(out / "diagnostics.json", report.dump(2) + "\n");
  std::cout << "alpha " << format_double(diag.alpha) << ", d_max " << diag.d_max << ", verdict "
            << (cond.verdict ? "pass" : "fail") << "\n";
  return 0;
}

int cmd_ingest(const std::string& in, const std::string& preprocess, const fs::path& out) {
  MatrixDataset d = ingest_trials(in);
  if (preprocess == "standardize") d = standardize(d);
  else if (preprocess == "center") d = center(d);
  else if (preprocess != "none") throw InvalidArgument("--preprocess must be standardize, center or none");
  json extra;
  extra["preprocessing"] = preprocess;
  extra["source"] = in;
  write_dataset_dir(out, d, extra);
  std::cout << "ingested n=" << d.n << " p=" << d.p << " q=" << d.q << " into " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix neighborhood selection for matrix-variate Gaussian graphical models"};
  app.require_subcommand(1);
  std::string out;

  SimulationFlags gen_flags;
  auto* gen = app.add_subcommand("generate", "Simulate a dataset and its true model");
  add_simulation_flags(gen, gen_flags);
  gen->add_option("--out", out, "Output directory")->required();

  SimulationFlags bench_flags;
  std::size_t workers = 0;
  auto* bench = app.add_subcommand("bench", "Run a replicated simulation benchmark");
  add_simulation_flags(bench, bench_flags);
  bench->add_option("--replicates", bench_flags.replicates, "Replicates per setting");
  bench->add_option("--method", bench_flags.methods, "matrixns|gemini (repeatable)");
  bench->add_option("--cv", bench_flags.cv, "Also tune matrixns by K-fold CV, K:global|individual");
  bench->add_option("--workers", workers, "Worker threads (0 = hardware parallelism)");
  bench->add_flag("--keep-curves", bench_flags.keep_curves, "Write per-replicate ROC curves");
  bench->add_option("--out", out, "Output directory")->required();

  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "Estimate a graph from a dataset");
  fit->add_option("--data", fit_flags.data, "Dataset directory or dataset.csv")->required();
  fit->add_option("--method", fit_flags.method, "matrixns|gemini");
  fit->add_option("--axis", fit_flags.axis, "row|col");
  fit->add_option("--lambda", fit_flags.lambda, "Penalty level");
  fit->add_option("--cv", fit_flags.cv, "K:global|individual");
  fit->add_option("--grid", fit_flags.grid, "log2 lambda grid lo:hi:step for --cv");
  fit->add_option("--rule", fit_flags.rule, "and|or");
  fit->add_option("--preprocess", fit_flags.preprocess, "auto|standardize|center|none");
  fit->add_option("--seed", fit_flags.seed, "Seed for the fold split");
  fit->add_option("--out", out, "Output directory")->required();

  ConnectivityFlags conn_flags;
  auto* conn = app.add_subcommand("connectivity", "Calibrate lambda to a target connectivity level");
  conn->add_option("--data", conn_flags.fit.data, "Dataset directory or dataset.csv")->required();
  conn->add_option("--method", conn_flags.fit.method, "matrixns|gemini");
  conn->add_option("--axis", conn_flags.fit.axis, "row|col");
  conn->add_option("--grid", conn_flags.fit.grid, "log2 lambda grid lo:hi:step");
  conn->add_option("--rule", conn_flags.fit.rule, "and|or");
  conn->add_option("--preprocess", conn_flags.fit.preprocess, "auto|standardize|center|none");
  conn->add_option("--target", conn_flags.target, "Edges / possible edges");
  conn->add_option("--tol", conn_flags.tol, "Accepted distance from the target");
  conn->add_option("--partition", conn_flags.partition, "One group label per node");
  conn->add_option("--out", out, "Output directory")->required();

  DiagnoseFlags diag_flags;
  auto* diag = app.add_subcommand("diagnose", "Evaluate the recovery conditions for a known model");
  diag->add_option("--u", diag_flags.u, "Row matrix CSV")->required();
  diag->add_option("--v", diag_flags.v, "Column matrix CSV")->required();
  diag->add_option("--inputs", diag_flags.inputs, "covariance|precision");
  diag->add_option("--n", diag_flags.n, "Sample size");
  diag->add_option("--beta", diag_flags.beta, "beta > 1");
  diag->add_option("--c", diag_flags.c, "Lambda rule constant");
  diag->add_option("--c1", diag_flags.c1, "Condition constant c1");
  diag->add_option("--c2", diag_flags.c2, "Condition constant c2");
  diag->add_option("--probe-c", diag_flags.c_probe, "Probe tail scale C");
  diag->add_option("--probe-replicates", diag_flags.probe_replicates, "Probe replicates, 0 skips the probe");
  diag->add_option("--probe-m", diag_flags.probe_m, "Probe subset size");
  diag->add_option("--probe-n", diag_flags.probe_n, "Probe sample size");
  diag->add_option("--t-max", diag_flags.t_max, "Largest t on the probe grid");
  diag->add_option("--t-points", diag_flags.t_points, "Probe grid size");
  diag->add_option("--seed", diag_flags.seed, "Probe seed");
  diag->add_option("--out", out, "Output directory")->required();

  std::string ingest_in;
  std::string ingest_pre = "none";
  auto* ingest = app.add_subcommand("ingest", "Convert per-trial CSV files into a dataset directory");
  ingest->add_option("--in", ingest_in, "Directory of per-trial CSVs")->required();
  ingest->add_option("--preprocess", ingest_pre, "standardize|center|none");
  ingest->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(gen_flags, out);
    if (*bench) return cmd_bench(bench_flags, out, workers);
    if (*fit) return cmd_fit(fit_flags, out);
    if (*conn) return cmd_connectivity(conn_flags, out);
    if (*diag) return cmd_diagnose(diag_flags, out);
    if (*ingest) return cmd_ingest(ingest_in, ingest_pre, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.error_class()) {
      case ErrorClass::Config: return kExitConfig;
      case ErrorClass::Data: return kExitData;
      case ErrorClass::Numerical: return kExitNumerical;
    }
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error [io]: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
