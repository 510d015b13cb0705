#include "matns/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "matns/error.hpp"

namespace fs = std::filesystem;

namespace matns {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Provenance::comment_line() const {
  std::string s = "# seed=" + (seed ? std::to_string(*seed) : std::string("none"));
  s += " config_hash=" + (config_hash.empty() ? std::string("none") : config_hash);
  s += " version=" + version + "\n";
  return s;
}

nlohmann::json Provenance::to_json() const {
  nlohmann::json j;
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  j["config_hash"] = config_hash;
  j["version"] = version;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw FormatError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<double> parse_row(const std::string& line, const fs::path& file, std::size_t lineno) {
  std::vector<double> row;
  std::size_t start = 0;
  while (start <= line.size()) {
    const auto comma = line.find(',', start);
    const std::string field = trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
      throw FormatError(file.string() + ":" + std::to_string(lineno) + ": bad number '" + field + "'");
    }
    if (!std::isfinite(v)) {
      throw FormatError(file.string() + ":" + std::to_string(lineno) + ": non-finite value");
    }
    row.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return row;
}

// Rows of every non-blank, non-comment line.
std::vector<std::vector<double>> read_rows(const fs::path& path, std::size_t* first_line = nullptr) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (rows.empty() && first_line != nullptr) *first_line = lineno;
    rows.push_back(parse_row(t, path, lineno));
  }
  return rows;
}

DenseMatrix rows_to_matrix(const std::vector<std::vector<double>>& rows, std::size_t begin,
                           std::size_t count, const fs::path& path) {
  if (count == 0 || rows.size() < begin + count) throw FormatError(path.string() + ": not enough rows");
  const std::size_t cols = rows[begin].size();
  Vector data;
  data.reserve(count * cols);
  for (std::size_t r = begin; r < begin + count; ++r) {
    if (rows[r].size() != cols) {
      throw FormatError(path.string() + ": row " + std::to_string(r + 1) + " has " +
                        std::to_string(rows[r].size()) + " columns, expected " + std::to_string(cols));
    }
    data.insert(data.end(), rows[r].begin(), rows[r].end());
  }
  return DenseMatrix(count, cols, std::move(data));
}

}  // namespace

std::string matrix_to_csv(const DenseMatrix& m) {
  std::string s;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) s += ',';
      s += format_double(m(i, j));
    }
    s += '\n';
  }
  return s;
}

void write_matrix_csv(const fs::path& path, const DenseMatrix& m) { write_text(path, matrix_to_csv(m)); }

DenseMatrix read_matrix_csv(const fs::path& path) {
  const auto rows = read_rows(path);
  if (rows.empty()) throw FormatError(path.string() + ": empty matrix file");
  return rows_to_matrix(rows, 0, rows.size(), path);
}

std::string edges_to_csv(const EdgeSet& edges, const Provenance* provenance) {
  std::string s = provenance ? provenance->comment_line() : std::string();
  for (const auto& [a, b] : edges) s += std::to_string(a + 1) + "," + std::to_string(b + 1) + "\n";
  return s;
}

void write_edges_csv(const fs::path& path, const EdgeSet& edges, const Provenance* provenance) {
  write_text(path, edges_to_csv(edges, provenance));
}

EdgeSet read_edges_csv(const fs::path& path, std::size_t dimension) {
  EdgeSet edges(dimension);
  for (const auto& row : read_rows(path)) {
    if (row.size() != 2) throw FormatError(path.string() + ": edge rows need two columns");
    const auto a = static_cast<long long>(row[0]);
    const auto b = static_cast<long long>(row[1]);
    if (static_cast<double>(a) != row[0] || static_cast<double>(b) != row[1] || a < 1 || b < 1 ||
        static_cast<std::size_t>(a) > dimension || static_cast<std::size_t>(b) > dimension || a == b) {
      throw FormatError(path.string() + ": invalid edge " + format_double(row[0]) + "," + format_double(row[1]));
    }
    edges.insert(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1));
  }
  return edges;
}

nlohmann::json dataset_meta(const MatrixDataset& d) {
  nlohmann::json meta;
  meta["format"] = "matns-dataset";
  meta["n"] = d.n;
  meta["p"] = d.p;
  meta["q"] = d.q;
  meta["standardized"] = d.standardized;
  meta["centered"] = d.centered;
  meta["seed"] = d.seed ? nlohmann::json(*d.seed) : nlohmann::json(nullptr);
  meta["axis_note"] = d.axis_note;
  meta["version"] = kVersion;
  return meta;
}

void write_dataset_dir(const fs::path& dir, const MatrixDataset& d, const nlohmann::json& extra_meta) {
  fs::create_directories(dir);
  nlohmann::json meta = dataset_meta(d);
  for (const auto& [k, v] : extra_meta.items()) meta[k] = v;
  write_text(dir / "meta.json", meta.dump(2) + "\n");
  for (std::size_t i = 0; i < d.n; ++i) {
    write_matrix_csv(dir / ("obs_" + std::to_string(i) + ".csv"), d.observations[i]);
  }
}

void write_dataset_file(const fs::path& path, const MatrixDataset& d) {
  std::string s = "# " + std::to_string(d.n) + " " + std::to_string(d.p) + " " + std::to_string(d.q) + "\n";
  for (const auto& x : d.observations) s += matrix_to_csv(x);
  write_text(path, s);
}

namespace {

MatrixDataset read_dataset_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(trim(header));
  char hash = 0;
  std::size_t n = 0, p = 0, q = 0;
  if (!(hs >> hash >> n >> p >> q) || hash != '#' || n == 0 || p == 0 || q == 0) {
    throw FormatError(path.string() + ":1: expected header '# n p q'");
  }
  const auto rows = read_rows(path);
  if (rows.size() != n * p) {
    throw FormatError(path.string() + ": expected " + std::to_string(n * p) + " data rows, found " +
                      std::to_string(rows.size()));
  }
  std::vector<DenseMatrix> obs;
  for (std::size_t i = 0; i < n; ++i) {
    DenseMatrix x = rows_to_matrix(rows, i * p, p, path);
    if (x.cols() != q) throw FormatError(path.string() + ": expected " + std::to_string(q) + " columns");
    obs.push_back(std::move(x));
  }
  return MatrixDataset::from_observations(std::move(obs), "read from " + path.filename().string());
}

std::vector<fs::path> csv_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

MatrixDataset ingest_trials(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError(dir.string() + " is not a directory");
  const auto files = csv_files(dir);
  if (files.empty()) throw FormatError(dir.string() + " contains no .csv files");
  std::vector<DenseMatrix> obs;
  for (const auto& f : files) {
    DenseMatrix x = read_matrix_csv(f);
    if (!obs.empty() && (x.rows() != obs.front().rows() || x.cols() != obs.front().cols())) {
      throw ShapeMismatch(f.filename().string() + " is " + std::to_string(x.rows()) + "x" +
                          std::to_string(x.cols()) + ", expected " + std::to_string(obs.front().rows()) +
                          "x" + std::to_string(obs.front().cols()));
    }
    obs.push_back(std::move(x));
  }
  return MatrixDataset::from_observations(std::move(obs), "ingested from " + dir.filename().string());
}

MatrixDataset read_dataset(const fs::path& path) {
  if (!fs::exists(path)) throw FormatError(path.string() + " does not exist");
  if (!fs::is_directory(path)) return read_dataset_file(path);
  const fs::path meta_path = path / "meta.json";
  if (!fs::exists(meta_path)) return ingest_trials(path);

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_text(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  std::size_t n = 0, p = 0, q = 0;
  try {
    n = meta.at("n").get<std::size_t>();
    p = meta.at("p").get<std::size_t>();
    q = meta.at("q").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  std::vector<DenseMatrix> obs;
  obs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const fs::path f = path / ("obs_" + std::to_string(i) + ".csv");
    DenseMatrix x = read_matrix_csv(f);
    if (x.rows() != p || x.cols() != q) {
      throw ShapeMismatch(f.filename().string() + " is " + std::to_string(x.rows()) + "x" +
                          std::to_string(x.cols()) + ", meta.json says " + std::to_string(p) + "x" +
                          std::to_string(q));
    }
    obs.push_back(std::move(x));
  }
  MatrixDataset d = MatrixDataset::from_observations(std::move(obs), meta.value("axis_note", std::string()));
  d.standardized = meta.value("standardized", false);
  d.centered = meta.value("centered", false);
  if (meta.contains("seed") && meta["seed"].is_number_unsigned()) d.seed = meta["seed"].get<std::uint64_t>();
  return d;
}

}  // namespace matns
