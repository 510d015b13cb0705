#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "matns/bench.hpp"
#include "matns/error.hpp"
#include "matns/io.hpp"

using namespace matns;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("matns_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

MatrixDataset small_dataset(std::uint64_t seed) {
  Rng rng(seed);
  return sample(4, SpdMatrix(gen_band(3, 0.6).spd().inverse()), SpdMatrix(DenseMatrix::identity(2)), rng);
}

void expect_same(const MatrixDataset& a, const MatrixDataset& b) {
  ASSERT_EQ(a.n, b.n);
  ASSERT_EQ(a.p, b.p);
  ASSERT_EQ(a.q, b.q);
  for (std::size_t i = 0; i < a.n; ++i) EXPECT_EQ(a.observations[i], b.observations[i]);
}

ExperimentConfig quick_config() {
  ExperimentConfig c;
  c.p = 10;
  c.q = 10;
  c.col_structure = {Structure::Hub, 0.4};
  c.replicates = 4;
  c.seed = 77;
  c.lambda_grid = {-8, 1, 0.5};
  return c;
}

}  // namespace

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Format, ProvenanceLine) {
  Provenance p;
  p.seed = 5;
  p.config_hash = "abc";
  EXPECT_EQ(p.comment_line(), std::string("# seed=5 config_hash=abc version=") + kVersion + "\n");
  Provenance none;
  EXPECT_EQ(none.comment_line(), std::string("# seed=none config_hash=none version=") + kVersion + "\n");
}

TEST(MatrixCsv, RoundTrip) {
  TempDir dir;
  const DenseMatrix m{{1.5, -2.0, 1e-300}, {0.1, 1.0 / 3.0, 7.0}};
  write_matrix_csv(dir.path() / "m.csv", m);
  EXPECT_EQ(read_matrix_csv(dir.path() / "m.csv"), m);
}

TEST(MatrixCsv, ReportsLineOfBadNumber) {
  TempDir dir;
  write_text(dir.path() / "bad.csv", "# comment\n1,2\n3,x\n");
  try {
    read_matrix_csv(dir.path() / "bad.csv");
    FAIL() << "no exception";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  write_text(dir.path() / "ragged.csv", "1,2\n3\n");
  EXPECT_THROW(read_matrix_csv(dir.path() / "ragged.csv"), FormatError);
}

TEST(EdgesCsv, RoundTripOneIndexed) {
  TempDir dir;
  EdgeSet e(5);
  e.insert(0, 4);
  e.insert(1, 2);
  Provenance prov;
  prov.seed = 3;
  write_edges_csv(dir.path() / "e.csv", e, &prov);
  const std::string text = read_text(dir.path() / "e.csv");
  EXPECT_EQ(text.rfind("# seed=3", 0), 0u);
  EXPECT_NE(text.find("1,5"), std::string::npos);
  EXPECT_EQ(read_edges_csv(dir.path() / "e.csv", 5), e);
  EXPECT_THROW(read_edges_csv(dir.path() / "e.csv", 4), FormatError);
}

TEST(Dataset, DirectoryRoundTrip) {
  TempDir dir;
  MatrixDataset d = small_dataset(1);
  d.seed = 42;
  write_dataset_dir(dir.path() / "ds", d);
  const MatrixDataset back = read_dataset(dir.path() / "ds");
  expect_same(d, back);
  ASSERT_TRUE(back.seed.has_value());
  EXPECT_EQ(*back.seed, 42u);
}

TEST(Dataset, DirectoryShapeCheckedAgainstMeta) {
  TempDir dir;
  write_dataset_dir(dir.path() / "ds", small_dataset(2));
  write_matrix_csv(dir.path() / "ds" / "obs_1.csv", DenseMatrix(2, 2));
  EXPECT_THROW(read_dataset(dir.path() / "ds"), ShapeMismatch);
}

TEST(Dataset, SingleFileRoundTrip) {
  TempDir dir;
  const MatrixDataset d = small_dataset(3);
  write_dataset_file(dir.path() / "dataset.csv", d);
  EXPECT_EQ(read_text(dir.path() / "dataset.csv").rfind("# 4 3 2\n", 0), 0u);
  expect_same(d, read_dataset(dir.path() / "dataset.csv"));
}

TEST(Ingest, LexicographicTrialsAndShapeErrors) {
  TempDir dir;
  write_matrix_csv(dir.path() / "trial_b.csv", DenseMatrix{{2, 2}});
  write_matrix_csv(dir.path() / "trial_a.csv", DenseMatrix{{1, 1}});
  const MatrixDataset d = ingest_trials(dir.path());
  ASSERT_EQ(d.n, 2u);
  EXPECT_EQ(d.observations[0](0, 0), 1.0);
  write_matrix_csv(dir.path() / "trial_c.csv", DenseMatrix{{1, 1, 1}});
  try {
    ingest_trials(dir.path());
    FAIL() << "no exception";
  } catch (const ShapeMismatch& e) {
    EXPECT_NE(std::string(e.what()).find("trial_c.csv"), std::string::npos);
  }
}

TEST(Ingest, ExportAndReingestIsLossless) {
  TempDir dir;
  const MatrixDataset d = small_dataset(4);
  for (std::size_t i = 0; i < d.n; ++i)
    write_matrix_csv(dir.path() / "raw" / ("t" + std::to_string(i) + ".csv"), d.observations[i]);
  const MatrixDataset first = ingest_trials(dir.path() / "raw");
  write_dataset_dir(dir.path() / "out", first);
  expect_same(first, read_dataset(dir.path() / "out"));
  expect_same(d, first);
}

TEST(Config, JsonRoundTripAndDefaults) {
  ExperimentConfig c = quick_config();
  c.cv = CvSpec{3, CvMode::Individual};
  const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.hash(), c.hash());
  EXPECT_NE(quick_config().hash(), c.hash());
  const ExperimentConfig d = ExperimentConfig::from_json(nlohmann::json::object());
  EXPECT_EQ(d.n, 20u);
  EXPECT_EQ(d.lambda_grid.lambdas().size(), 49u);
  EXPECT_EQ(d.rule, CombineRule::And);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json{{"replicatez", 3}}), InvalidArgument);
  EXPECT_THROW(parse_grid("1:2"), InvalidArgument);
  EXPECT_THROW(parse_cv_spec("5:sometimes"), InvalidArgument);
  ExperimentConfig c;
  c.replicates = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Config, SettingsFile) {
  TempDir dir;
  write_text(dir.path() / "c.json",
             R"({"n": 30, "replicates": 5, "settings": [{"q": 50, "label": "wide"}, {"col_structure": "random:0.2"}]})");
  const auto settings = ExperimentConfig::load(dir.path() / "c.json");
  ASSERT_EQ(settings.size(), 2u);
  EXPECT_EQ(settings[0].n, 30u);
  EXPECT_EQ(settings[0].q, 50u);
  EXPECT_EQ(settings[0].label, "wide");
  EXPECT_EQ(settings[1].q, 20u);
  EXPECT_EQ(settings[1].col_structure.kind, Structure::Random);
  EXPECT_EQ(settings[1].replicates, 5u);
}

TEST(Bench, SimulateIsDeterministic) {
  const ExperimentConfig c = quick_config();
  const SyntheticDraw a = simulate(c, replicate_seed(c, 2));
  const SyntheticDraw b = simulate(c, replicate_seed(c, 2));
  EXPECT_EQ(a.omega_v.omega, b.omega_v.omega);
  for (std::size_t i = 0; i < a.data.n; ++i) EXPECT_EQ(a.data.observations[i], b.data.observations[i]);
  EXPECT_EQ(a.edges_u.size(), 17u);
  EXPECT_EQ(a.edges_v.size(), 9u);
  EXPECT_GT(a.omega_u.omega(0, 0), 1.0);
}

TEST(Bench, SingleReplicateHasZeroSd) {
  ExperimentConfig c = quick_config();
  c.replicates = 1;
  const RunRecord r = run_bench(c, 1);
  ASSERT_EQ(r.replicates.size(), 1u);
  for (const auto& row : r.aggregates) {
    EXPECT_EQ(row.pauc.sd, 0.0);
    EXPECT_EQ(row.pauc.count, 1u);
  }
}

TEST(Bench, MethodSelectionAndRecomputableAggregates) {
  ExperimentConfig c = quick_config();
  c.methods = {Method::MatrixNs};
  const RunRecord r = run_bench(c, 2);
  EXPECT_EQ(r.aggregates.size(), 2u);
  for (const auto& row : r.aggregates) EXPECT_EQ(row.method, Method::MatrixNs);
  EXPECT_EQ(aggregate_csv(r).find("gemini"), std::string::npos);
  const auto values = r.pauc_values(Method::MatrixNs, Axis::Row);
  ASSERT_EQ(values.size(), c.replicates);
  const Summary s = aggregate(values);
  EXPECT_EQ(s.mean, r.aggregate(Method::MatrixNs, Axis::Row).pauc.mean);
  for (double v : values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Bench, WorkerCountDoesNotChangeOutput) {
  const ExperimentConfig c = quick_config();
  const RunRecord one = run_bench(c, 1);
  const RunRecord eight = run_bench(c, 8);
  EXPECT_EQ(aggregate_csv(one), aggregate_csv(eight));
  EXPECT_EQ(replicates_csv(one), replicates_csv(eight));
}

TEST(Bench, CrossValidatedRunRecordsChoice) {
  ExperimentConfig c = quick_config();
  c.replicates = 2;
  c.methods = {Method::MatrixNs};
  c.cv = CvSpec{3, CvMode::Global};
  const RunRecord r = run_bench(c, 1);
  for (const auto& rep : r.replicates) {
    ASSERT_TRUE(rep.ok) << rep.error;
    for (const auto& res : rep.results) {
      ASSERT_TRUE(res.cv.has_value());
      EXPECT_GT(res.cv->lambda, 0.0);
    }
  }
}

TEST(Bench, WriteRunFiles) {
  TempDir dir;
  ExperimentConfig c = quick_config();
  c.replicates = 2;
  c.keep_curves = true;
  const RunRecord r = run_bench(c, 1);
  write_run(dir.path(), r);
  EXPECT_TRUE(fs::exists(dir.path() / "aggregate.csv"));
  EXPECT_TRUE(fs::exists(dir.path() / "replicates.csv"));
  EXPECT_TRUE(fs::exists(dir.path() / "run.json"));
  EXPECT_TRUE(fs::exists(dir.path() / "curves" / "roc_matrixns_row_r0.csv"));
  const std::string agg = read_text(dir.path() / "aggregate.csv");
  EXPECT_NE(agg.find("seed=77"), std::string::npos);
  EXPECT_NE(agg.find("method,axis,mean_pauc,sd_pauc,se_pauc,replicates,failed"), std::string::npos);
}

TEST(Calibration, MonotoneFitBisects) {
  // Level k / 435 with k = min(435, floor(2 / lambda)).
  const FitAtLambda fit = [](double lambda) {
    EdgeSet e(30);
    const auto k = static_cast<std::size_t>(std::min(435.0, std::floor(2.0 / lambda)));
    std::size_t added = 0;
    for (std::size_t a = 0; a < 30 && added < k; ++a)
      for (std::size_t b = a + 1; b < 30 && added < k; ++b, ++added) e.insert(a, b);
    return e;
  };
  const Vector grid = log2_grid(-10, 2, 1.0);
  const Calibration cal = calibrate_connectivity(fit, grid, 0.1, 0.002);
  EXPECT_TRUE(cal.monotone);
  EXPECT_LE(std::fabs(cal.level - 0.1), 0.002);
  EXPECT_EQ(cal.edges.density(), cal.level);
  EXPECT_GT(cal.evaluations, grid.size());
}

TEST(Calibration, UnreachableTargetThrows) {
  const FitAtLambda all_or_nothing = [](double lambda) {
    EdgeSet e(4);
    if (lambda < 0.5)
      for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = a + 1; b < 4; ++b) e.insert(a, b);
    return e;
  };
  const Vector grid = log2_grid(-4, 2, 1.0);
  EXPECT_THROW(calibrate_connectivity(all_or_nothing, grid, 0.5, 0.01), TargetUnreachable);
}

TEST(Calibration, SyntheticDataReachesTenPercent) {
  ExperimentConfig c;
  c.p = 30;
  c.q = 30;
  c.n = 20;
  const SyntheticDraw draw = simulate(c, 11);
  const MatrixDataset d = standardize(draw.data);
  const FitAtLambda fit = [&](double lambda) { return matrixns_fit(d, Axis::Row, lambda, CombineRule::And).edges; };
  const Calibration cal = calibrate_connectivity(fit, c.lambda_grid.lambdas(), 0.1, 0.005);
  EXPECT_LE(std::fabs(cal.level - 0.1), 0.005);
  EXPECT_EQ(cal.edges, fit(cal.lambda));
}

TEST(Groups, TableOrderingAndCounts) {
  EdgeSet e(5);
  e.insert(0, 1);
  e.insert(0, 2);
  e.insert(2, 3);
  e.insert(3, 4);
  const std::vector<std::string> labels{"A", "A", "B", "B", "C"};
  const auto rows = group_connectivity(e, labels);
  ASSERT_EQ(rows.size(), 6u);
  const std::vector<std::pair<std::string, std::string>> order{{"A", "A"}, {"B", "B"}, {"C", "C"},
                                                               {"A", "B"}, {"B", "C"}, {"A", "C"}};
  const std::vector<std::size_t> edges{1, 1, 0, 1, 1, 0};
  const std::vector<std::size_t> possible{1, 1, 0, 4, 2, 2};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].group_a, order[i].first);
    EXPECT_EQ(rows[i].group_b, order[i].second);
    EXPECT_EQ(rows[i].edges, edges[i]);
    EXPECT_EQ(rows[i].possible, possible[i]);
  }
  EXPECT_DOUBLE_EQ(rows[3].density, 0.25);
  EXPECT_EQ(rows[2].density, 0.0);
  EXPECT_THROW(group_connectivity(e, {"A"}), DimensionMismatch);
}

TEST(Groups, PartitionFile) {
  TempDir dir;
  write_text(dir.path() / "part.txt", "# regions\nfrontal\nfrontal\n\noccipital\n");
  EXPECT_EQ(read_partition(dir.path() / "part.txt"), (std::vector<std::string>{"frontal", "frontal", "occipital"}));
}
