/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#ifndef QMAT_EXPERIMENTS_HPP
#define QMAT_EXPERIMENTS_HPP

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmat/errors.hpp"
#include "qmat/ff_linalg.hpp"
#include "qmat/sampler.hpp"

namespace qmat {

/// 95% Wilson score interval for a binomial proportion. Stable at 0 or
/// trials successes, which matters for near-zero probabilities.
std::pair<double, double> wilson_interval(std::size_t successes,
                                          std::size_t trials);

struct EstimateCI {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t master_seed = 0;

  bool operator==(const EstimateCI&) const = default;
};

EstimateCI make_estimate(std::size_t successes, std::size_t trials,
                         std::uint64_t master_seed);

/// The working modulus d / (sqrt(n) ln^{3/2} n), rounded to the nearest
/// prime that does not divide d. At desk scale the target is usually < 2;
/// such runs are flagged degenerate and use the smallest prime not
/// dividing d instead.
struct PrimeChoice {
  std::uint64_t p = 2;
  double target = 0.0;  // d / (sqrt(n) ln^{3/2} n), natural log
  bool degenerate = false;
};

PrimeChoice choose_prime(std::size_t n, std::size_t d);

/// One reproducible run: dimensions, trial budget, seed, modulus rule, and
/// an optional additive perturbation matrix. Trial t always draws from
/// RngStream(master_seed, t), so results do not depend on thread count.
struct ExperimentConfig {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  std::uint64_t fixed_p = 0;  // 0 = choose_prime(n, d)
  std::size_t threads = 1;
  std::string out_dir;
  std::string matrix_path;             // source of the perturbation, if any
  std::optional<IntMatrix> perturbation;

  bool operator==(const ExperimentConfig&) const = default;
};

void validate_config(const ExperimentConfig& cfg);

/// Fraction of trials in which det(Q_{n,d}) = 0 over the integers.
EstimateCI estimate_singularity(const ExperimentConfig& cfg);

/// True iff A * 1 = -d * 1 exactly, i.e. every row of A sums to -d. Such A
/// make A + Q_{n,d} always singular (Q * 1 = d * 1), so they are excluded
/// from the perturbed estimate.
bool eigenpair_check(const IntMatrix& a, std::size_t d);

/// Fraction of trials in which det(A + Q_{n,d}) = 0. Requires a
/// perturbation in cfg with eigenpair_check false; violations raise
/// hypothesis_error.
EstimateCI estimate_perturbed_singularity(const ExperimentConfig& cfg);

struct KernelMomentReport {
  PrimeChoice prime;
  mpq_class mean_kernel;   // exact average of K = p^(n - rank) over trials
  double mean_kernel_d = 0.0;
  EstimateCI tail;         // fraction of trials with K >= p
  double markov_bound = 0.0;  // mean/p + 3 standard errors of the tail
  bool markov_holds = false;
};

/// Per trial, the kernel size K of Q_{n,d} over Z_p; reports the empirical
/// mean of K, the tail fraction P[K >= p], and the first-moment relation
/// P[K >= p] <= E[K]/p (checked with 3-standard-error slack). The modulus
/// must not divide d; violations raise hypothesis_error.
KernelMomentReport kernel_first_moment(const ExperimentConfig& cfg);

/// Exact P[some column of Q_{n,d} is all-zero] by inclusion-exclusion:
/// sum_{k=1}^{n-d} (-1)^{k+1} C(n,k) (C(n-k,d)/C(n,d))^n.
mpq_class zero_column_probability(std::size_t n, std::size_t d);

/// Monte Carlo counterpart of zero_column_probability.
EstimateCI estimate_zero_column(const ExperimentConfig& cfg);

/// One row of a threshold scan at d = min(n, max(1, ceil(c ln n))).
struct ScanRow {
  std::size_t n = 0;
  double c = 0.0;
  std::size_t d = 0;
  std::uint64_t row_seed = 0;
  EstimateCI singularity;
  mpq_class zero_column_exact;

  bool operator==(const ScanRow& other) const {
    return n == other.n && c == other.c && d == other.d &&
           row_seed == other.row_seed && singularity == other.singularity &&
           zero_column_exact == other.zero_column_exact;
  }
};

/// Singularity estimates across an (n, c) grid, next to the exact
/// zero-column probability of each cell. Row r (in grid order) uses master
/// seed RngStream(master_seed, r).next_u64(), so the table is reproducible
/// and rows are independently seeded. Purely descriptive: no assertions.
std::vector<ScanRow> conjecture_scan(const std::vector<std::size_t>& ns,
                                     const std::vector<double>& cs,
                                     std::size_t trials,
                                     std::uint64_t master_seed,
                                     std::size_t threads);

}  // namespace qmat

#endif  // QMAT_EXPERIMENTS_HPP
