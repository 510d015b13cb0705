#pragma once

// File formats. Matrices: headerless CSV, one row per line. Edge lists:
// two-column CSV of 1-indexed pairs. Lines starting with '#' are provenance
// comments and are skipped on read, except for the dataset.csv header.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "matns/graph.hpp"
#include "matns/linalg.hpp"
#include "matns/matnorm.hpp"

namespace matns {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

struct Provenance {
  std::optional<std::uint64_t> seed;
  std::string config_hash;
  std::string version = kVersion;

  std::string comment_line() const;
  nlohmann::json to_json() const;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

std::string matrix_to_csv(const DenseMatrix& m);
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m);
/// Throws FormatError naming the file and line on malformed input.
DenseMatrix read_matrix_csv(const std::filesystem::path& path);

std::string edges_to_csv(const EdgeSet& edges, const Provenance* provenance = nullptr);
void write_edges_csv(const std::filesystem::path& path, const EdgeSet& edges,
                     const Provenance* provenance = nullptr);
EdgeSet read_edges_csv(const std::filesystem::path& path, std::size_t dimension);

/// Directory form: meta.json plus obs_<i>.csv for i = 0..n-1.
void write_dataset_dir(const std::filesystem::path& dir, const MatrixDataset& d,
                       const nlohmann::json& extra_meta = nlohmann::json::object());
/// Single-file form: header "# n p q", then n blocks of p rows with q columns.
void write_dataset_file(const std::filesystem::path& path, const MatrixDataset& d);

/// Reads either form. A directory without meta.json is read as one trial
/// per *.csv file, in lexicographic filename order.
MatrixDataset read_dataset(const std::filesystem::path& path);

/// One observation per *.csv file in lexicographic order. Throws ShapeMismatch
/// naming the first file whose shape disagrees with the first trial.
MatrixDataset ingest_trials(const std::filesystem::path& dir);

nlohmann::json dataset_meta(const MatrixDataset& d);

}  // namespace matns
