/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#include "qmat/run_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qmat {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: invalid integer for key '" + key +
                                "': '" + value + "'");
  }
}

std::string utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char byte : data) {
    hash ^= byte;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "n=" << cfg.n << '\n';
  os << "d=" << cfg.d << '\n';
  os << "trials=" << cfg.trials << '\n';
  os << "seed=" << cfg.master_seed << '\n';
  os << "p=" << cfg.fixed_p << '\n';
  os << "threads=" << cfg.threads << '\n';
  os << "out_dir=" << cfg.out_dir << '\n';
  if (!cfg.matrix_path.empty()) os << "matrix=" << cfg.matrix_path << '\n';
  return os.str();
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not key=value: '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key == "n") {
      cfg.n = parse_u64(key, value);
    } else if (key == "d") {
      cfg.d = parse_u64(key, value);
    } else if (key == "trials") {
      cfg.trials = parse_u64(key, value);
    } else if (key == "seed") {
      cfg.master_seed = parse_u64(key, value);
    } else if (key == "p") {
      cfg.fixed_p = parse_u64(key, value);
    } else if (key == "threads") {
      cfg.threads = parse_u64(key, value);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "matrix") {
      cfg.matrix_path = value;
      cfg.perturbation = read_matrix_file(value);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (cfg.n == 0 && cfg.perturbation) cfg.n = cfg.perturbation->rows();
  validate_config(cfg);
  return cfg;
}

std::string default_out_dir() {
  const char* env = std::getenv("QMAT_OUT_DIR");
  if (env == nullptr || *env == '\0') return ".";
  return env;
}

std::string rational_string(const mpq_class& q) {
  mpq_class canon = q;
  canon.canonicalize();
  return canon.get_num().get_str() + "/" + canon.get_den().get_str();
}

std::string decimal12_string(const mpq_class& q) {
  const bool negative = q < 0;
  mpq_class a = negative ? mpq_class(-q) : q;
  a.canonicalize();
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, 12);
  const mpz_class num = a.get_num() * scale;
  const mpz_class den = a.get_den();
  mpz_class quot, rem;
  mpz_tdiv_qr(quot.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(),
              den.get_mpz_t());
  if (2 * rem >= den) ++quot;  // round half away from zero
  const mpz_class ip = quot / scale;
  const mpz_class frac = quot % scale;
  std::string frac_str = frac.get_str();
  frac_str.insert(0, 12 - frac_str.size(), '0');
  return (negative ? "-" : "") + ip.get_str() + "." + frac_str;
}

std::string decimal12_string(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12f", x);
  return buf;
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n\r") == std::string::npos) return raw;
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) {
      throw std::runtime_error("cannot create directory " +
                               target.parent_path().string() + ": " +
                               ec.message());
    }
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for write: " + tmp.string());
    os << content;
    os.flush();
    if (!os.good()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path +
                             ": " + ec.message());
  }
}

void write_csv_atomic(const std::string& path, const std::string& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  os << header << '\n';
  for (const std::vector<std::string>& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << csv_field(row[i]);
    }
    os << '\n';
  }
  write_text_atomic(path, os.str());
}

std::string results_csv_header() {
  return "n,d,p,degenerate,trials,successes,estimate,ci_lo,ci_hi,seed,mode";
}

std::vector<std::string> results_csv_row(std::size_t n, std::size_t d,
                                         std::uint64_t p, bool degenerate,
                                         const EstimateCI& e,
                                         const std::string& mode) {
  return {std::to_string(n),
          std::to_string(d),
          std::to_string(p),
          degenerate ? "true" : "false",
          std::to_string(e.trials),
          std::to_string(e.successes),
          decimal12_string(e.estimate),
          decimal12_string(e.lo),
          decimal12_string(e.hi),
          std::to_string(e.master_seed),
          mode};
}

std::string manifest_to_json(const RunManifest& m) {
  nlohmann::json j;
  j["tool"] = "qmat";
  j["version"] = kToolVersion;
  j["mode"] = m.mode;
  j["status"] = m.complete ? "complete" : "running";
  j["log_convention"] = "natural";
  j["started_utc"] = m.started_utc;
  if (!m.finished_utc.empty()) j["finished_utc"] = m.finished_utc;
  nlohmann::json cfg;
  cfg["n"] = m.config.n;
  cfg["d"] = m.config.d;
  cfg["trials"] = m.config.trials;
  cfg["seed"] = m.config.master_seed;
  cfg["p"] = m.config.fixed_p;
  cfg["threads"] = m.config.threads;
  cfg["out_dir"] = m.config.out_dir;
  cfg["matrix"] = m.config.matrix_path;
  j["config"] = cfg;
  j["config_hash"] = hex64(m.config_hash);
  if (m.prime) {
    char target[32];
    std::snprintf(target, sizeof(target), "%.6g", m.prime->target);
    j["prime_choice"] = {{"p", m.prime->p},
                         {"target", std::string(target)},
                         {"degenerate", m.prime->degenerate}};
  }
  nlohmann::json results = nlohmann::json::array();
  for (const auto& [path, hash] : m.results) {
    results.push_back({{"path", path}, {"fnv1a64", hex64(hash)}});
  }
  j["results"] = results;
  return j.dump(2) + "\n";
}

RunManifest start_manifest(const std::string& mode,
                           const ExperimentConfig& cfg,
                           const std::optional<PrimeChoice>& prime,
                           const std::string& path) {
  RunManifest m;
  m.mode = mode;
  m.config = cfg;
  m.config_hash = fnv1a64(render_config(cfg));
  m.started_utc = utc_now();
  m.prime = prime;
  write_text_atomic(path, manifest_to_json(m));
  return m;
}

void manifest_add_result(RunManifest& m, const std::string& result_path) {
  std::ifstream is(result_path, std::ios::binary);
  if (!is) {
    throw std::runtime_error("manifest: cannot hash missing result file " +
                             result_path);
  }
  std::ostringstream buffer;
  buffer << is.rdbuf();
  m.results.emplace_back(result_path, fnv1a64(buffer.str()));
}

void finalize_manifest(RunManifest& m, const std::string& path) {
  m.finished_utc = utc_now();
  m.complete = true;
  write_text_atomic(path, manifest_to_json(m));
}

}  // namespace qmat
