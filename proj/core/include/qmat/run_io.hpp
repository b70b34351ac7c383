/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#ifndef QMAT_RUN_IO_HPP
#define QMAT_RUN_IO_HPP

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmat/experiments.hpp"

namespace qmat {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a over bytes; used to fingerprint configs and result files.
std::uint64_t fnv1a64(std::string_view data);

/// Flat key=value form of a config, one key per line, fixed key order.
/// parse_config_file(render to a file) reproduces the config exactly.
std::string render_config(const ExperimentConfig& cfg);

/// Reads a flat key=value file ('#' starts a comment). Recognized keys:
/// n, d, trials, seed, p, threads, out_dir, matrix (path of a perturbation
/// matrix in the text format). Unknown keys, malformed values, range
/// violations, and non-prime p each produce a distinct diagnostic.
ExperimentConfig parse_config_file(const std::string& path);

/// Value of QMAT_OUT_DIR, or "." when unset or empty.
std::string default_out_dir();

/// Canonical "num/den" form, e.g. "1/2", "0/1".
std::string rational_string(const mpq_class& q);

/// Fixed 12-digit decimal form, rounded half away from zero,
/// e.g. 1/3 -> "0.333333333333".
std::string decimal12_string(const mpq_class& q);
std::string decimal12_string(double x);

/// RFC-style CSV quoting: fields with commas, quotes, or newlines are
/// wrapped in double quotes with inner quotes doubled.
std::string csv_field(const std::string& raw);

/// Writes content to path via a temp file in the same directory plus
/// rename, creating parent directories as needed.
void write_text_atomic(const std::string& path, const std::string& content);

/// Header plus quoted rows, atomically. An empty row set yields a
/// header-only file.
void write_csv_atomic(const std::string& path, const std::string& header,
                      const std::vector<std::vector<std::string>>& rows);

/// Shared schema for Monte Carlo outputs. p is 0 on runs that never reduce
/// mod a prime; the degenerate flag reports the modulus-selection regime.
std::string results_csv_header();
std::vector<std::string> results_csv_row(std::size_t n, std::size_t d,
                                         std::uint64_t p, bool degenerate,
                                         const EstimateCI& e,
                                         const std::string& mode);

/// Record tying every output of one run to its exact inputs. Written with
/// status "running" before the first trial and finalized (end timestamp,
/// result file hashes) afterwards.
struct RunManifest {
  std::string mode;
  ExperimentConfig config;
  std::uint64_t config_hash = 0;  // fnv1a64 of render_config(config)
  std::string started_utc;
  std::string finished_utc;
  bool complete = false;
  std::optional<PrimeChoice> prime;
  std::vector<std::pair<std::string, std::uint64_t>> results;  // path, hash
};

std::string manifest_to_json(const RunManifest& m);

/// Builds the manifest and writes it (status running) at path.
RunManifest start_manifest(const std::string& mode,
                           const ExperimentConfig& cfg,
                           const std::optional<PrimeChoice>& prime,
                           const std::string& path);

/// Hashes an already-written result file into the manifest.
void manifest_add_result(RunManifest& m, const std::string& result_path);

/// Stamps the end time and rewrites the manifest as complete.
void finalize_manifest(RunManifest& m, const std::string& path);

}  // namespace qmat

#endif  // QMAT_RUN_IO_HPP
