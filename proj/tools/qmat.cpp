/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
//
// qmat — command-line laboratory for random combinatorial matrices.
//
// Subcommands: sample, det, atom, fourier, verify-appendix, verify-bounds,
// mc-singularity, mc-perturbed, kernel-moment, zero-column, conjecture-scan,
// coupling-check. Every run writes CSV results plus a JSON manifest tying
// the outputs to the exact configuration. Exit codes: 0 success, 1 error,
// 2 the checked claim's hypothesis is not met by the inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmat/anticoncentration.hpp"
#include "qmat/combinatorics.hpp"
#include "qmat/experiments.hpp"
#include "qmat/ff_linalg.hpp"
#include "qmat/prime.hpp"
#include "qmat/run_io.hpp"
#include "qmat/sampler.hpp"

namespace {

using namespace qmat;

struct Opts {
  std::string config_path;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t trials = 1000;
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  std::uint64_t p = 0;
  std::string out;
  std::string matrix;
  std::string vector_spec;
  std::size_t indicator = 0;
  std::size_t n_max = 20;
  std::vector<std::uint64_t> p_list{2, 3, 5, 7};
  std::vector<std::size_t> n_list;
  std::vector<double> c_list;
  bool exhaustive = false;
};

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

bool flag_given(const CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

ExperimentConfig build_config(const Opts& o, const CLI::App* sub) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = parse_config_file(o.config_path);
  if (flag_given(sub, "--n")) cfg.n = o.n;
  if (flag_given(sub, "--d")) cfg.d = o.d;
  if (flag_given(sub, "--trials")) cfg.trials = o.trials;
  if (flag_given(sub, "--seed")) cfg.master_seed = o.seed;
  if (flag_given(sub, "--p")) cfg.fixed_p = o.p;
  if (flag_given(sub, "--threads")) cfg.threads = o.threads;
  if (flag_given(sub, "--out")) cfg.out_dir = o.out;
  if (flag_given(sub, "--matrix")) {
    cfg.matrix_path = o.matrix;
    cfg.perturbation = read_matrix_file(o.matrix);
  }
  if (cfg.n == 0 && cfg.perturbation) cfg.n = cfg.perturbation->rows();
  if (cfg.out_dir.empty()) cfg.out_dir = default_out_dir();
  validate_config(cfg);
  return cfg;
}

void add_experiment_options(CLI::App* sub, Opts& o) {
  sub->add_option("--config", o.config_path,
                  "key=value config file; explicit flags override it");
  sub->add_option("--n", o.n, "matrix dimension");
  sub->add_option("--d", o.d, "row weight (ones per row)");
  sub->add_option("--trials", o.trials, "number of Monte Carlo trials");
  sub->add_option("--seed", o.seed, "master seed; trial t uses stream t");
  sub->add_option("--threads", o.threads, "worker threads");
  sub->add_option("--out", o.out,
                  "output directory (default $QMAT_OUT_DIR or '.')");
}

ResidueVector parse_vector(const std::string& text, const PrimeField& field) {
  std::vector<long> values;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      std::size_t pos = 0;
      values.push_back(std::stol(token, &pos));
      if (pos != token.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw std::invalid_argument("--v: bad entry '" + token + "'");
    }
  }
  if (values.empty()) throw std::invalid_argument("--v: empty vector");
  return ResidueVector::reduced(field, values);
}

ResidueVector build_vector(const Opts& o, const CLI::App* sub,
                           const PrimeField& field) {
  if (flag_given(sub, "--v")) return parse_vector(o.vector_spec, field);
  if (flag_given(sub, "--indicator")) {
    if (o.n == 0) {
      throw std::invalid_argument("--indicator requires --n");
    }
    if (o.indicator > o.n) {
      throw std::invalid_argument("--indicator: support size exceeds n");
    }
    std::vector<std::uint64_t> entries(o.n, 0);
    for (std::size_t i = 0; i < o.indicator; ++i) entries[i] = 1 % field.modulus();
    return ResidueVector(field, std::move(entries));
  }
  throw std::invalid_argument("need --v or --indicator");
}

std::string vector_to_string(const ResidueVector& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  return os.str();
}

// ---------------------------------------------------------------- sample --

int run_sample(const Opts& o, const CLI::App* sub) {
  ExperimentConfig cfg = build_config(o, sub);
  if (flag_given(sub, "--count")) cfg.trials = o.trials;
  RunManifest manifest = start_manifest(
      "sample", cfg, std::nullopt, join_path(cfg.out_dir, "sample_manifest.json"));

  std::vector<std::vector<std::string>> rows;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    RngStream rng(cfg.master_seed, t);
    const CombinatorialMatrix q = sample_matrix(cfg.n, cfg.d, rng);
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%06zu.txt", t);
    const std::string path = join_path(cfg.out_dir, name);
    std::ostringstream text;
    write_matrix_text(text, q.to_int_matrix());
    write_text_atomic(path, text.str());
    manifest_add_result(manifest, path);
    for (std::size_t i = 0; i < cfg.n; ++i) {
      rows.push_back({std::to_string(t), std::to_string(i + 1),
                      support_to_string(q.row(i))});
    }
  }
  const std::string csv = join_path(cfg.out_dir, "samples.csv");
  write_csv_atomic(csv, "trial,row,support", rows);
  manifest_add_result(manifest, csv);
  finalize_manifest(manifest, join_path(cfg.out_dir, "sample_manifest.json"));
  std::cout << "sample: wrote " << cfg.trials << " matrix(es) with n=" << cfg.n
            << " d=" << cfg.d << " seed=" << cfg.master_seed << " to "
            << cfg.out_dir << "\n";
  return 0;
}

// ------------------------------------------------------------------- det --

int run_det(const Opts& o, const CLI::App* sub) {
  const IntMatrix a = read_matrix_file(o.matrix);
  ExperimentConfig cfg;
  cfg.n = a.rows();
  cfg.matrix_path = o.matrix;
  cfg.fixed_p = o.p;
  cfg.out_dir = flag_given(sub, "--out") ? o.out : default_out_dir();

  const mpz_class det = det_integer_exact(a);
  std::vector<std::string> row{std::to_string(a.rows()), det.get_str(),
                               "0", "", "", ""};
  std::ostringstream line;
  line << "det: " << a.rows() << "x" << a.cols() << " matrix, det = "
       << det.get_str();
  if (flag_given(sub, "--p")) {
    const PrimeField field(o.p);
    const MatrixZp m = reduce_mod_p(a, field);
    const std::uint64_t dp = det_mod_p(m);
    const std::size_t rank = rank_mod_p(m);
    const mpz_class ker = kernel_size(m);
    row[2] = std::to_string(o.p);
    row[3] = std::to_string(dp);
    row[4] = std::to_string(rank);
    row[5] = ker.get_str();
    line << ", det mod " << o.p << " = " << dp << ", rank = " << rank
         << ", kernel size = " << ker.get_str();
  }
  RunManifest manifest = start_manifest(
      "det", cfg, std::nullopt, join_path(cfg.out_dir, "det_manifest.json"));
  const std::string csv = join_path(cfg.out_dir, "det.csv");
  write_csv_atomic(csv, "n,det,p,det_mod_p,rank_mod_p,kernel_size", {row});
  manifest_add_result(manifest, csv);
  finalize_manifest(manifest, join_path(cfg.out_dir, "det_manifest.json"));
  std::cout << line.str() << "\n";
  return 0;
}

// ------------------------------------------------------------------ atom --

int run_atom(const Opts& o, const CLI::App* sub) {
  const PrimeField field(o.p);
  const ResidueVector v = build_vector(o, sub, field);
  const AtomDistribution dist = atom_distribution_dp(v, o.d);

  ExperimentConfig cfg;
  cfg.n = v.size();
  cfg.d = o.d;
  cfg.fixed_p = o.p;
  cfg.out_dir = flag_given(sub, "--out") ? o.out : default_out_dir();
  RunManifest manifest = start_manifest(
      "atom", cfg, std::nullopt, join_path(cfg.out_dir, "atom_manifest.json"));

  std::vector<std::vector<std::string>> rows;
  for (std::uint64_t b = 0; b < field.modulus(); ++b) {
    const mpq_class& q = dist.prob(b);
    rows.push_back({std::to_string(b), q.get_num().get_str(),
                    q.get_den().get_str(), decimal12_string(q)});
  }
  const std::string csv = join_path(cfg.out_dir, "atom.csv");
  write_csv_atomic(csv, "b,numerator,denominator,decimal", rows);
  manifest_add_result(manifest, csv);
  finalize_manifest(manifest, join_path(cfg.out_dir, "atom_manifest.json"));

  const auto [argmax, max_prob] = dist.max_atom();
  std::cout << "atom: v=(" << vector_to_string(v) << ") p=" << o.p
            << " d=" << o.d << "\n";
  for (std::uint64_t b = 0; b < field.modulus(); ++b) {
    std::cout << "  P[q.v = " << b << "] = " << rational_string(dist.prob(b))
              << " = " << decimal12_string(dist.prob(b)) << "\n";
  }
  std::cout << "  max atom at b=" << argmax << ": "
            << rational_string(max_prob) << "\n";
  return 0;
}

// --------------------------------------------------------------- fourier --

int run_fourier(const Opts& o, const CLI::App* sub) {
  const PrimeField field(o.p);
  const ResidueVector v = build_vector(o, sub, field);
  const FourierProfile profile = fourier_profile(v, o.d);
  const UniformityDeviation dev = uniformity_deviation(v, o.d);

  ExperimentConfig cfg;
  cfg.n = v.size();
  cfg.d = o.d;
  cfg.fixed_p = o.p;
  cfg.out_dir = flag_given(sub, "--out") ? o.out : default_out_dir();
  RunManifest manifest =
      start_manifest("fourier", cfg, std::nullopt,
                     join_path(cfg.out_dir, "fourier_manifest.json"));

  std::vector<std::vector<std::string>> rows;
  for (std::uint64_t xi = 0; xi < field.modulus(); ++xi) {
    rows.push_back({std::to_string(xi),
                    decimal12_string(profile.magnitudes[xi])});
  }
  const std::string csv = join_path(cfg.out_dir, "fourier.csv");
  write_csv_atomic(csv, "xi,magnitude", rows);
  manifest_add_result(manifest, csv);
  finalize_manifest(manifest, join_path(cfg.out_dir, "fourier_manifest.json"));

  double max_nontrivial = 0.0;
  for (std::uint64_t xi = 1; xi < field.modulus(); ++xi) {
    max_nontrivial = std::max(max_nontrivial, profile.magnitudes[xi]);
  }
  std::cout << "fourier: v=(" << vector_to_string(v) << ") p=" << o.p
            << " d=" << o.d << "\n"
            << "  max |E e_p(xi q.v)| over xi != 0: "
            << decimal12_string(max_nontrivial) << "\n"
            << "  uniformity deviation max_b |p P(b) - 1| = "
            << rational_string(dev.exact) << " = "
            << decimal12_string(dev.single_row) << "\n"
            << "  n-row product deviation (1+dev)^n - 1 = "
            << decimal12_string(dev.n_row_product) << "\n";
  return 0;
}

// ------------------------------------------------------- verify-appendix --

int run_verify_appendix(const Opts& o, const CLI::App* sub) {
  ExperimentConfig cfg;
  cfg.n = o.n_max;
  cfg.out_dir = flag_given(sub, "--out") ? o.out : default_out_dir();
  RunManifest manifest =
      start_manifest("verify-appendix", cfg, std::nullopt,
                     join_path(cfg.out_dir, "verify_appendix_manifest.json"));

  std::size_t cells_checked = 0, half_failures = 0, full_failures = 0;
  std::vector<std::vector<std::string>> failure_rows;
  for (std::size_t n = 3; n <= o.n_max; ++n) {
    for (std::size_t d = 1; 2 * d <= n; ++d) {
      for (std::uint64_t p : o.p_list) {
        const PrimeField field(p);
        for (std::size_t s = 2; s + 1 <= n; ++s) {
          for (std::uint64_t b = 0; b < p; ++b) {
            for (const BinomialCell& cell :
                 binomial_cell_inequality(n, d, field, s, b)) {
              ++cells_checked;
              if (!cell.holds_full) ++full_failures;
              if (!cell.holds_half) {
                ++half_failures;
                failure_rows.push_back(
                    {std::to_string(cell.n), std::to_string(cell.d),
                     std::to_string(cell.p), std::to_string(cell.s),
                     std::to_string(cell.b), std::to_string(cell.index),
                     std::to_string(cell.t), cell.a.get_str(),
                     cell.c.get_str()});
              }
            }
          }
        }
      }
    }
  }
  const std::string csv = join_path(cfg.out_dir, "verify_appendix.csv");
  write_csv_atomic(csv, "n,d,p,s,b,i,t,a,c", failure_rows);
  manifest_add_result(manifest, csv);
  finalize_manifest(manifest,
                    join_path(cfg.out_dir, "verify_appendix_manifest.json"));

  std::cout << "verify-appendix: n <= " << o.n_max << ", d <= n/2, p in {";
  for (std::size_t i = 0; i < o.p_list.size(); ++i) {
    if (i) std::cout << ',';
    std::cout << o.p_list[i];
  }
  std::cout << "}: " << cells_checked << " cells, " << half_failures
            << " violations of 2n*a >= d*c";
  std::cout << " (" << full_failures
            << " cells fail the stronger n*a >= d*c, reported only)\n";
  return half_failures == 0 ? 0 : 1;
}

// --------------------------------------------------------- verify-bounds --

int run_verify_bounds(const Opts& o, const CLI::App* sub) {
  const PrimeField field(o.p);
  ExperimentConfig cfg;
  cfg.n = o.n;
  cfg.d = o.d;
  cfg.fixed_p = o.p;
  cfg.out_dir = flag_given(sub, "--out") ? o.out : default_out_dir();

  std::vector<std::vector<std::string>> rows;
  bool all_hold = true;
  std::ostringstream report;

  if (o.exhaustive) {
    if (o.n < 2 || o.d == 0) {
      throw std::invalid_argument(
          "verify-bounds --exhaustive needs --n >= 2 and --d");
    }
    double log_count = static_cast<double>(o.n) *
                       std::log10(static_cast<double>(field.modulus()));
    if (log_count > 6.0) {
      throw std::invalid_argument(
          "verify-bounds --exhaustive: p^n exceeds 10^6; use a single --v");
    }
    mpq_class worst = -1;
    std::string worst_v;
    std::uint64_t count = 0;
    std::vector<std::uint64_t> entries(o.n, 0);
    mpq_class bound;
    for (;;) {
      const ResidueVector v(field, entries);
      if (!v.is_constant()) {
        const AtomBoundReport r = verify_atom_bound(v, o.d);
        bound = r.bound;
        ++count;
        if (r.max_prob > worst) {
          worst = r.max_prob;
          worst_v = vector_to_string(v);
        }
        if (!r.holds) all_hold = false;
      }
      // next vector in lexicographic order over Z_p^n
      std::size_t i = 0;
      while (i < o.n && entries[i] + 1 == field.modulus()) entries[i++] = 0;
      if (i == o.n) break;
      ++entries[i];
    }
    rows.push_back({"atom-bound", std::to_string(o.n), std::to_string(o.d),
                    std::to_string(o.p), worst_v,
                    decimal12_string(worst), decimal12_string(bound),
                    all_hold ? "true" : "false"});
    report << "  atom bound over " << count << " vectors off the constant "
           << "line: worst max atom " << rational_string(worst) << " at v=("
           << worst_v << "), bound " << rational_string(bound) << ", "
           << (all_hold ? "all hold" : "VIOLATED") << "\n";
  } else {
    const ResidueVector v = build_vector(o, sub, field);
    const AtomBoundReport r = verify_atom_bound(v, o.d);
    if (!r.holds) all_hold = false;
    rows.push_back({"atom-bound", std::to_string(v.size()),
                    std::to_string(o.d), std::to_string(o.p),
                    vector_to_string(v), decimal12_string(r.max_prob),
                    decimal12_string(r.bound), r.holds ? "true" : "false"});
    report << "  max atom " << rational_string(r.max_prob) << " at b="
           << r.argmax_b << ", bound 1 - d/2n = " << rational_string(r.bound)
           << ", " << (r.holds ? "holds" : "VIOLATED") << "\n";
    const AlmostConstantReport ac = is_almost_constant(v, o.d);
    rows.push_back({"almost-constant", std::to_string(v.size()),
                    std::to_string(o.d), std::to_string(o.p),
                    std::to_string(ac.witness),
                    std::to_string(ac.level_size),
                    decimal12_string(ac.threshold),
                    ac.almost_constant ? "true" : "false"});
    report << "  largest level set: residue " << ac.witness << " with "
           << ac.level_size << " coordinates, threshold n - d/(10 ln n) = "
           << decimal12_string(ac.threshold) << " -> "
           << (ac.almost_constant ? "almost constant" : "not almost constant")
           << "\n";
  }

  const CosineBoundReport cb = verify_cosine_bound(o.p);
  if (!cb.holds) all_hold = false;
  rows.push_back({"cosine-bound", "0", "0", std::to_string(o.p), "",
                  decimal12_string(cb.max_ratio), "1.000000000000",
                  cb.holds ? "true" : "false"});
  report << "  cosine bound: max |cos(pi m/p)| e^{2/p^2} = "
         << decimal12_string(cb.max_ratio) << ", "
         << (cb.holds ? "holds" : "VIOLATED") << "\n";

  RunManifest manifest =
      start_manifest("verify-bounds", cfg, std::nullopt,
                     join_path(cfg.out_dir, "verify_bounds_manifest.json"));
  const std::string csv = join_path(cfg.out_dir, "verify_bounds.csv");
  write_csv_atomic(csv, "check,n,d,p,witness,value,bound,holds", rows);
  manifest_add_result(manifest, csv);
  finalize_manifest(manifest,
                    join_path(cfg.out_dir, "verify_bounds_manifest.json"));
  std::cout << "verify-bounds: p=" << o.p << "\n" << report.str();
  return all_hold ? 0 : 1;
}

// --------------------------------------------------- mc estimators (3x) ---

int run_mc_singularity(const Opts& o, const CLI::App* sub) {
  const ExperimentConfig cfg = build_config(o, sub);
  const std::string manifest_path =
      join_path(cfg.out_dir, "mc_singularity_manifest.json");
  RunManifest manifest =
      start_manifest("mc-singularity", cfg, std::nullopt, manifest_path);
  const EstimateCI e = estimate_singularity(cfg);
  const std::string csv = join_path(cfg.out_dir, "results.csv");
  write_csv_atomic(csv, results_csv_header(),
                   {results_csv_row(cfg.n, cfg.d, 0, false, e,
                                    "mc-singularity")});
  manifest_add_result(manifest, csv);
  finalize_manifest(manifest, manifest_path);
  std::cout << "mc-singularity: n=" << cfg.n << " d=" << cfg.d << " trials="
            << e.trials << " seed=" << cfg.master_seed << "\n  P[det(Q)=0] ~ "
            << decimal12_string(e.estimate) << "  95% CI ["
            << decimal12_string(e.lo) << ", " << decimal12_string(e.hi)
            << "]  (" << e.successes << "/" << e.trials << " singular)\n";
  return 0;
}

int run_mc_perturbed(const Opts& o, const CLI::App* sub) {
  const ExperimentConfig cfg = build_config(o, sub);
  if (!cfg.perturbation) {
    throw std::invalid_argument("mc-perturbed: need --matrix (or matrix= in "
                                "the config file)");
  }
  const std::string manifest_path =
      join_path(cfg.out_dir, "mc_perturbed_manifest.json");
  RunManifest manifest =
      start_manifest("mc-perturbed", cfg, std::nullopt, manifest_path);
  const EstimateCI e = estimate_perturbed_singularity(cfg);
  const std::string csv = join_path(cfg.out_dir, "results.csv");
  write_csv_atomic(csv, results_csv_header(),
                   {results_csv_row(cfg.n, cfg.d, 0, false, e,
                                    "mc-perturbed")});
  manifest_add_result(manifest, csv);
  finalize_manifest(manifest, manifest_path);
  std::cout << "mc-perturbed: n=" << cfg.n << " d=" << cfg.d << " A="
            << cfg.matrix_path << " trials=" << e.trials << " seed="
            << cfg.master_seed << "\n  P[det(A+Q)=0] ~ "
            << decimal12_string(e.estimate) << "  95% CI ["
            << decimal12_string(e.lo) << ", " << decimal12_string(e.hi)
            << "]  (" << e.successes << "/" << e.trials << " singular)\n";
  return 0;
}

int run_kernel_moment(const Opts& o, const CLI::App* sub) {
  const ExperimentConfig cfg = build_config(o, sub);
  // The modulus is resolved before the manifest so the prime record and the
  // p|d hypothesis check precede any trial work.
  PrimeChoice pc = choose_prime(cfg.n, cfg.d);
  if (cfg.fixed_p != 0) pc.p = cfg.fixed_p;
  const std::string manifest_path =
      join_path(cfg.out_dir, "kernel_moment_manifest.json");
  RunManifest manifest = start_manifest("kernel-moment", cfg, pc,
                                        manifest_path);
  const KernelMomentReport r = kernel_first_moment(cfg);
  const std::string csv = join_path(cfg.out_dir, "results.csv");
  write_csv_atomic(csv, results_csv_header(),
                   {results_csv_row(cfg.n, cfg.d, r.prime.p,
                                    r.prime.degenerate, r.tail,
                                    "kernel-moment")});
  const std::string kernel_csv = join_path(cfg.out_dir, "kernel.csv");
  write_csv_atomic(
      kernel_csv,
      "n,d,p,degenerate,trials,mean_kernel,mean_kernel_decimal,tail_estimate,"
      "markov_bound,markov_holds",
      {{std::to_string(cfg.n), std::to_string(cfg.d),
        std::to_string(r.prime.p), r.prime.degenerate ? "true" : "false",
        std::to_string(cfg.trials), rational_string(r.mean_kernel),
        decimal12_string(r.mean_kernel), decimal12_string(r.tail.estimate),
        decimal12_string(r.markov_bound), r.markov_holds ? "true" : "false"}});
  manifest_add_result(manifest, csv);
  manifest_add_result(manifest, kernel_csv);
  finalize_manifest(manifest, manifest_path);
  std::cout << "kernel-moment: n=" << cfg.n << " d=" << cfg.d << " p="
            << r.prime.p << (r.prime.degenerate ? " (degenerate target)" : "")
            << " trials=" << cfg.trials << " seed=" << cfg.master_seed
            << "\n  mean kernel size E[K] = " << rational_string(r.mean_kernel)
            << " = " << decimal12_string(r.mean_kernel) << "\n  P[K >= p] ~ "
            << decimal12_string(r.tail.estimate) << "  95% CI ["
            << decimal12_string(r.tail.lo) << ", "
            << decimal12_string(r.tail.hi) << "]\n  first-moment bound "
            << "E[K]/p + 3se = " << decimal12_string(r.markov_bound) << ": "
            << (r.markov_holds ? "holds" : "VIOLATED") << "\n";
  return r.markov_holds ? 0 : 1;
}

// ----------------------------------------------------------- zero-column --

int run_zero_column(const Opts& o, const CLI::App* sub) {
  ExperimentConfig cfg = build_config(o, sub);
  const mpq_class exact = zero_column_probability(cfg.n, cfg.d);
  const std::string manifest_path =
      join_path(cfg.out_dir, "zero_column_manifest.json");
  RunManifest manifest =
      start_manifest("zero-column", cfg, std::nullopt, manifest_path);
  const std::string exact_csv = join_path(cfg.out_dir, "zero_column.csv");
  write_csv_atomic(exact_csv, "n,d,value,decimal",
                   {{std::to_string(cfg.n), std::to_string(cfg.d),
                     rational_string(exact), decimal12_string(exact)}});
  manifest_add_result(manifest, exact_csv);
  std::cout << "zero-column: n=" << cfg.n << " d=" << cfg.d
            << "\n  exact P[some column of Q is zero] = "
            << rational_string(exact) << " = " << decimal12_string(exact)
            << "\n";
  if (flag_given(sub, "--trials")) {
    const EstimateCI e = estimate_zero_column(cfg);
    const std::string csv = join_path(cfg.out_dir, "results.csv");
    write_csv_atomic(csv, results_csv_header(),
                     {results_csv_row(cfg.n, cfg.d, 0, false, e,
                                      "zero-column")});
    manifest_add_result(manifest, csv);
    const bool covered = e.lo <= exact.get_d() && exact.get_d() <= e.hi;
    std::cout << "  Monte Carlo ~ " << decimal12_string(e.estimate)
              << "  95% CI [" << decimal12_string(e.lo) << ", "
              << decimal12_string(e.hi) << "]  ("
              << (covered ? "covers" : "does NOT cover")
              << " the exact value)\n";
  }
  finalize_manifest(manifest, manifest_path);
  return 0;
}

// ------------------------------------------------------- conjecture-scan --

int run_conjecture_scan(const Opts& o, const CLI::App* sub) {
  if (o.n_list.empty() || o.c_list.empty()) {
    throw std::invalid_argument("conjecture-scan: need --n-list and --c-list");
  }
  ExperimentConfig cfg;
  cfg.trials = o.trials;
  cfg.master_seed = o.seed;
  cfg.threads = o.threads;
  cfg.out_dir = flag_given(sub, "--out") ? o.out : default_out_dir();
  const std::string manifest_path =
      join_path(cfg.out_dir, "conjecture_scan_manifest.json");
  RunManifest manifest =
      start_manifest("conjecture-scan", cfg, std::nullopt, manifest_path);

  const std::vector<ScanRow> rows =
      conjecture_scan(o.n_list, o.c_list, o.trials, o.seed, o.threads);

  std::vector<std::vector<std::string>> scan_rows, result_rows;
  std::cout << "conjecture-scan: d = min(n, max(1, ceil(c ln n))), trials="
            << o.trials << " seed=" << o.seed << "\n"
            << "  n     c      d   P[det=0]        95% CI           "
            << "P[zero column]\n";
  for (const ScanRow& r : rows) {
    scan_rows.push_back(
        {std::to_string(r.n), decimal12_string(r.c), std::to_string(r.d),
         std::to_string(r.row_seed), std::to_string(r.singularity.trials),
         std::to_string(r.singularity.successes),
         decimal12_string(r.singularity.estimate),
         decimal12_string(r.singularity.lo),
         decimal12_string(r.singularity.hi),
         rational_string(r.zero_column_exact),
         decimal12_string(r.zero_column_exact)});
    result_rows.push_back(results_csv_row(r.n, r.d, 0, false, r.singularity,
                                          "conjecture-scan"));
    char line[160];
    std::snprintf(line, sizeof(line),
                  "  %-5zu %-6.3g %-3zu %.6f  [%.6f, %.6f]  %.6f\n", r.n, r.c,
                  r.d, r.singularity.estimate, r.singularity.lo,
                  r.singularity.hi, r.zero_column_exact.get_d());
    std::cout << line;
  }
  const std::string scan_csv = join_path(cfg.out_dir, "scan.csv");
  write_csv_atomic(scan_csv,
                   "n,c,d,row_seed,trials,successes,estimate,ci_lo,ci_hi,"
                   "zero_column,zero_column_decimal",
                   scan_rows);
  const std::string results = join_path(cfg.out_dir, "results.csv");
  write_csv_atomic(results, results_csv_header(), result_rows);
  manifest_add_result(manifest, scan_csv);
  manifest_add_result(manifest, results);
  finalize_manifest(manifest, manifest_path);
  return 0;
}

// -------------------------------------------------------- coupling-check --

int run_coupling_check(const Opts& o, const CLI::App* sub) {
  if (o.n == 0 || o.d == 0) {
    throw std::invalid_argument("coupling-check: need --n and --d");
  }
  if (o.n < 2 * o.d) {
    throw coupling_error("coupling-check: the coupling needs n >= 2d");
  }
  ExperimentConfig cfg;
  cfg.n = o.n;
  cfg.d = o.d;
  cfg.trials = o.trials;
  cfg.master_seed = o.seed;
  cfg.out_dir = flag_given(sub, "--out") ? o.out : default_out_dir();
  const std::string manifest_path =
      join_path(cfg.out_dir, "coupling_check_manifest.json");
  RunManifest manifest =
      start_manifest("coupling-check", cfg, std::nullopt, manifest_path);

  std::map<std::vector<std::uint32_t>, std::uint64_t> counts;
  std::vector<std::vector<std::string>> rows;
  int exit_code = 0;

  const bool exhaustive = !flag_given(sub, "--trials");
  if (exhaustive) {
    double total_log = static_cast<double>(o.d) * std::log10(2.0);
    for (std::size_t k = 2; k <= o.n; ++k) {
      total_log += std::log10(static_cast<double>(k));
    }
    if (total_log > 7.3) {
      throw std::invalid_argument(
          "coupling-check: 2^d n! too large to enumerate; pass --trials for "
          "a sampled check");
    }
    std::vector<std::uint32_t> sigma(o.n);
    std::iota(sigma.begin(), sigma.end(), 1u);
    std::uint64_t pairs = 0;
    do {
      for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << o.d); ++bits) {
        std::vector<std::uint8_t> gamma(o.d);
        std::vector<std::int8_t> signs(o.d);
        for (std::size_t i = 0; i < o.d; ++i) {
          gamma[i] = (bits >> i) & 1;
          signs[i] = gamma[i] ? 1 : -1;
        }
        const SupportSet t = coupled_support_bernoulli(gamma, sigma, o.d);
        if (coupled_support_rademacher(signs, sigma, o.d) != t) {
          throw std::runtime_error(
              "coupling-check: sign and bit couplings disagree");
        }
        ++counts[t.elements()];
        ++pairs;
      }
    } while (std::next_permutation(sigma.begin(), sigma.end()));

    const mpz_class supports =
        binomial(static_cast<long>(o.n), static_cast<long>(o.d));
    const std::uint64_t expected = pairs / supports.get_ui();
    bool uniform = counts.size() == supports;
    for (const auto& [elements, count] : counts) {
      if (count != expected) uniform = false;
      rows.push_back({support_to_string(SupportSet(o.n, elements)),
                      std::to_string(count), std::to_string(expected)});
    }
    std::cout << "coupling-check: n=" << o.n << " d=" << o.d
              << " exhaustive over " << pairs << " (gamma, sigma) pairs: "
              << counts.size() << " supports, expected count " << expected
              << " each -> " << (uniform ? "uniform" : "NOT uniform") << "\n";
    if (!uniform) exit_code = 1;
  } else {
    for (std::size_t t = 0; t < o.trials; ++t) {
      RngStream rng(o.seed, t);
      const std::vector<std::uint32_t> sigma = random_permutation(o.n, rng);
      std::vector<std::uint8_t> gamma(o.d);
      std::vector<std::int8_t> signs(o.d);
      for (std::size_t i = 0; i < o.d; ++i) {
        gamma[i] = static_cast<std::uint8_t>(rng.uniform_below(2));
        signs[i] = gamma[i] ? 1 : -1;
      }
      const SupportSet s = coupled_support_bernoulli(gamma, sigma, o.d);
      if (coupled_support_rademacher(signs, sigma, o.d) != s) {
        throw std::runtime_error(
            "coupling-check: sign and bit couplings disagree");
      }
      ++counts[s.elements()];
    }
    const mpz_class supports =
        binomial(static_cast<long>(o.n), static_cast<long>(o.d));
    const double expected = static_cast<double>(o.trials) /
                            supports.get_d();
    double worst = 0.0;
    for (const auto& [elements, count] : counts) {
      worst = std::max(worst, std::fabs(static_cast<double>(count) - expected));
      rows.push_back({support_to_string(SupportSet(o.n, elements)),
                      std::to_string(count), decimal12_string(expected)});
    }
    std::cout << "coupling-check: n=" << o.n << " d=" << o.d << " sampled "
              << o.trials << " (gamma, sigma) pairs, seed=" << o.seed << "\n  "
              << counts.size() << "/" << supports.get_str()
              << " supports seen, expected count " << decimal12_string(expected)
              << " each, worst absolute deviation " << decimal12_string(worst)
              << "\n";
  }

  const std::string csv = join_path(cfg.out_dir, "coupling.csv");
  write_csv_atomic(csv, "support,count,expected", rows);
  manifest_add_result(manifest, csv);
  finalize_manifest(manifest, manifest_path);
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qmat: exact and Monte Carlo laboratory for random 0/1 matrices with "
      "constant row weight"};
  app.require_subcommand(1);
  int exit_code = 0;

  auto o_sample = std::make_shared<Opts>();
  CLI::App* sample = app.add_subcommand(
      "sample", "Sample matrices and write them in the text format");
  add_experiment_options(sample, *o_sample);
  sample->add_option("--count", o_sample->trials, "how many matrices");
  sample->callback(
      [&, o_sample] { exit_code = run_sample(*o_sample, sample); });

  auto o_det = std::make_shared<Opts>();
  CLI::App* det = app.add_subcommand(
      "det", "Exact integer determinant of a matrix file, optionally mod p");
  det->add_option("--matrix", o_det->matrix, "matrix file (text format)")
      ->required();
  det->add_option("--p", o_det->p, "also reduce mod this prime");
  det->add_option("--out", o_det->out, "output directory");
  det->callback([&, o_det] { exit_code = run_det(*o_det, det); });

  auto o_atom = std::make_shared<Opts>();
  CLI::App* atom = app.add_subcommand(
      "atom", "Exact law of q.v mod p for a uniform weight-d row q");
  atom->add_option("--v", o_atom->vector_spec,
                   "comma-separated integer vector");
  atom->add_option("--indicator", o_atom->indicator,
                   "use the indicator vector of the first s coordinates");
  atom->add_option("--n", o_atom->n, "vector length (with --indicator)");
  atom->add_option("--d", o_atom->d, "row weight")->required();
  atom->add_option("--p", o_atom->p, "prime modulus")->required();
  atom->add_option("--out", o_atom->out, "output directory");
  atom->callback([&, o_atom] { exit_code = run_atom(*o_atom, atom); });

  auto o_fourier = std::make_shared<Opts>();
  CLI::App* fourier = app.add_subcommand(
      "fourier", "Character-sum magnitudes |E e_p(xi q.v)| of the atom law");
  fourier->add_option("--v", o_fourier->vector_spec,
                      "comma-separated integer vector");
  fourier->add_option("--indicator", o_fourier->indicator,
                      "use the indicator vector of the first s coordinates");
  fourier->add_option("--n", o_fourier->n, "vector length (with --indicator)");
  fourier->add_option("--d", o_fourier->d, "row weight")->required();
  fourier->add_option("--p", o_fourier->p, "prime modulus")->required();
  fourier->add_option("--out", o_fourier->out, "output directory");
  fourier->callback(
      [&, o_fourier] { exit_code = run_fourier(*o_fourier, fourier); });

  auto o_appendix = std::make_shared<Opts>();
  CLI::App* appendix = app.add_subcommand(
      "verify-appendix",
      "Sweep the neighbor-term binomial inequality 2n*a >= d*c");
  appendix->add_option("--n-max", o_appendix->n_max, "largest n (default 20)");
  appendix->add_option("--p-list", o_appendix->p_list,
                       "primes to sweep (default 2,3,5,7)")
      ->delimiter(',');
  appendix->add_option("--out", o_appendix->out, "output directory");
  appendix->callback([&, o_appendix] {
    exit_code = run_verify_appendix(*o_appendix, appendix);
  });

  auto o_bounds = std::make_shared<Opts>();
  CLI::App* bounds = app.add_subcommand(
      "verify-bounds",
      "Check the atom bound 1 - d/(2n) and the cosine bound e^{-2/p^2}");
  bounds->add_option("--v", o_bounds->vector_spec,
                     "comma-separated integer vector");
  bounds->add_option("--indicator", o_bounds->indicator,
                     "use the indicator vector of the first s coordinates");
  bounds->add_option("--n", o_bounds->n, "vector length");
  bounds->add_option("--d", o_bounds->d, "row weight")->required();
  bounds->add_option("--p", o_bounds->p, "prime modulus")->required();
  bounds->add_flag("--exhaustive", o_bounds->exhaustive,
                   "sweep every vector in Z_p^n off the constant line");
  bounds->add_option("--out", o_bounds->out, "output directory");
  bounds->callback(
      [&, o_bounds] { exit_code = run_verify_bounds(*o_bounds, bounds); });

  auto o_sing = std::make_shared<Opts>();
  CLI::App* sing = app.add_subcommand(
      "mc-singularity", "Monte Carlo estimate of P[det(Q_{n,d}) = 0]");
  add_experiment_options(sing, *o_sing);
  sing->callback(
      [&, o_sing] { exit_code = run_mc_singularity(*o_sing, sing); });

  auto o_pert = std::make_shared<Opts>();
  CLI::App* pert = app.add_subcommand(
      "mc-perturbed", "Monte Carlo estimate of P[det(A + Q_{n,d}) = 0]");
  add_experiment_options(pert, *o_pert);
  pert->add_option("--matrix", o_pert->matrix,
                   "perturbation matrix A (text format)");
  pert->callback(
      [&, o_pert] { exit_code = run_mc_perturbed(*o_pert, pert); });

  auto o_kernel = std::make_shared<Opts>();
  CLI::App* kernel = app.add_subcommand(
      "kernel-moment",
      "Mean kernel size of Q_{n,d} over Z_p and the tail P[K >= p]");
  add_experiment_options(kernel, *o_kernel);
  kernel->add_option("--p", o_kernel->p,
                     "fixed prime modulus (default: selection rule)");
  kernel->callback(
      [&, o_kernel] { exit_code = run_kernel_moment(*o_kernel, kernel); });

  auto o_zero = std::make_shared<Opts>();
  CLI::App* zero = app.add_subcommand(
      "zero-column",
      "Exact P[some column of Q is zero], optionally with Monte Carlo");
  add_experiment_options(zero, *o_zero);
  zero->callback(
      [&, o_zero] { exit_code = run_zero_column(*o_zero, zero); });

  auto o_scan = std::make_shared<Opts>();
  CLI::App* scan = app.add_subcommand(
      "conjecture-scan",
      "Singularity estimates across an (n, c) grid at d = ceil(c ln n)");
  scan->add_option("--n-list", o_scan->n_list, "n values")
      ->delimiter(',')
      ->required();
  scan->add_option("--c-list", o_scan->c_list, "c values")
      ->delimiter(',')
      ->required();
  scan->add_option("--trials", o_scan->trials, "trials per grid cell");
  scan->add_option("--seed", o_scan->seed, "master seed");
  scan->add_option("--threads", o_scan->threads, "worker threads");
  scan->add_option("--out", o_scan->out, "output directory");
  scan->callback(
      [&, o_scan] { exit_code = run_conjecture_scan(*o_scan, scan); });

  auto o_coupling = std::make_shared<Opts>();
  CLI::App* coupling = app.add_subcommand(
      "coupling-check",
      "Uniformity of the permutation-and-bits support coupling");
  coupling->add_option("--n", o_coupling->n, "ambient dimension")->required();
  coupling->add_option("--d", o_coupling->d, "subset size")->required();
  coupling->add_option("--trials", o_coupling->trials,
                       "sampled pairs (default: exhaustive enumeration)");
  coupling->add_option("--seed", o_coupling->seed, "master seed");
  coupling->add_option("--out", o_coupling->out, "output directory");
  coupling->callback([&, o_coupling] {
    exit_code = run_coupling_check(*o_coupling, coupling);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const hypothesis_error& e) {
    std::cerr << "hypothesis not met: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
