/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#include "qmat/experiments.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "qmat/combinatorics.hpp"
#include "qmat/prime.hpp"

namespace qmat {

namespace {

// Runs body(t) for t in [0, trials) on the requested number of workers and
// returns results indexed by trial. Work is handed out by an atomic counter;
// because every result lands in its own slot, the output is identical for
// any worker count or scheduling.
template <typename T, typename Body>
std::vector<T> run_trials(std::size_t trials, std::size_t threads,
                          Body&& body) {
  std::vector<T> results(trials);
  if (threads <= 1 || trials <= 1) {
    for (std::size_t t = 0; t < trials; ++t) results[t] = body(t);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= trials) return;
      try {
        results[t] = body(t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n_workers = std::min(threads, trials);
  pool.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return results;
}

std::uint64_t smallest_prime_not_dividing(std::size_t d) {
  std::uint64_t p = 2;
  while (d % p == 0) p = next_prime(p + 1);
  return p;
}

}  // namespace

std::pair<double, double> wilson_interval(std::size_t successes,
                                          std::size_t trials) {
  if (successes > trials) {
    throw std::invalid_argument("wilson_interval: successes exceed trials");
  }
  if (trials == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;  // 97.5% normal quantile
  const double nd = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double center = (phat + z2 / (2.0 * nd)) / denom;
  const double halfwidth =
      z * std::sqrt(phat * (1.0 - phat) / nd + z2 / (4.0 * nd * nd)) / denom;
  double lo = std::max(0.0, center - halfwidth);
  double hi = std::min(1.0, center + halfwidth);
  // The score interval's endpoints are exactly 0 and 1 at the degenerate
  // outcomes; enforce that identity against floating-point residue so the
  // interval always brackets the point estimate.
  if (successes == 0) lo = 0.0;
  if (successes == trials) hi = 1.0;
  return {lo, hi};
}

EstimateCI make_estimate(std::size_t successes, std::size_t trials,
                         std::uint64_t master_seed) {
  EstimateCI out;
  out.successes = successes;
  out.trials = trials;
  out.estimate =
      trials ? static_cast<double>(successes) / static_cast<double>(trials)
             : 0.0;
  std::tie(out.lo, out.hi) = wilson_interval(successes, trials);
  out.master_seed = master_seed;
  return out;
}

PrimeChoice choose_prime(std::size_t n, std::size_t d) {
  if (d < 1 || d > n) {
    throw std::invalid_argument("choose_prime: need 1 <= d <= n");
  }
  PrimeChoice out;
  if (n == 1) {
    // ln 1 = 0 leaves the target undefined; treat as the degenerate regime.
    out.target = std::numeric_limits<double>::infinity();
    out.degenerate = true;
    out.p = smallest_prime_not_dividing(d);
    return out;
  }
  const double ln_n = std::log(static_cast<double>(n));
  out.target = static_cast<double>(d) /
               (std::sqrt(static_cast<double>(n)) * std::pow(ln_n, 1.5));
  if (out.target < 2.0) {
    out.degenerate = true;
    out.p = smallest_prime_not_dividing(d);
    return out;
  }
  // Nearest prime to the target that does not divide d, ties upward.
  std::uint64_t hi =
      next_prime(static_cast<std::uint64_t>(std::ceil(out.target)));
  while (d % hi == 0) hi = next_prime(hi + 1);
  std::uint64_t lo =
      prev_prime(static_cast<std::uint64_t>(std::floor(out.target)));
  while (lo >= 2 && d % lo == 0) lo = prev_prime(lo - 1);
  if (lo < 2) {
    out.p = hi;
  } else {
    const double dist_lo = out.target - static_cast<double>(lo);
    const double dist_hi = static_cast<double>(hi) - out.target;
    out.p = dist_hi <= dist_lo ? hi : lo;
  }
  return out;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.d < 1 || cfg.d > cfg.n) {
    throw std::invalid_argument("config: need 1 <= d <= n, got d=" +
                                std::to_string(cfg.d) +
                                ", n=" + std::to_string(cfg.n));
  }
  if (cfg.trials < 1) {
    throw std::invalid_argument("config: need trials >= 1");
  }
  if (cfg.threads < 1) {
    throw std::invalid_argument("config: need threads >= 1");
  }
  if (cfg.fixed_p != 0 && !is_prime_u64(cfg.fixed_p)) {
    throw std::invalid_argument("config: p must be prime, got " +
                                std::to_string(cfg.fixed_p));
  }
  if (cfg.perturbation &&
      (cfg.perturbation->rows() != cfg.n || cfg.perturbation->cols() != cfg.n)) {
    throw std::invalid_argument("config: perturbation matrix must be n x n");
  }
}

EstimateCI estimate_singularity(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.perturbation) {
    throw std::invalid_argument(
        "estimate_singularity: config carries a perturbation; use "
        "estimate_perturbed_singularity");
  }
  const std::vector<std::uint8_t> singular = run_trials<std::uint8_t>(
      cfg.trials, cfg.threads, [&cfg](std::size_t t) -> std::uint8_t {
        RngStream rng(cfg.master_seed, t);
        const CombinatorialMatrix q = sample_matrix(cfg.n, cfg.d, rng);
        return det_integer_exact(q.to_int_matrix()) == 0 ? 1 : 0;
      });
  std::size_t successes = 0;
  for (std::uint8_t s : singular) successes += s;
  return make_estimate(successes, cfg.trials, cfg.master_seed);
}

bool eigenpair_check(const IntMatrix& a, std::size_t d) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("eigenpair_check: matrix must be square");
  }
  const mpz_class target = -mpz_class(static_cast<unsigned long>(d));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    mpz_class row_sum = 0;
    for (std::size_t j = 0; j < a.cols(); ++j) row_sum += a(i, j);
    if (row_sum != target) return false;
  }
  return true;
}

EstimateCI estimate_perturbed_singularity(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (!cfg.perturbation) {
    throw std::invalid_argument(
        "estimate_perturbed_singularity: config has no perturbation matrix");
  }
  if (eigenpair_check(*cfg.perturbation, cfg.d)) {
    throw hypothesis_error(
        "perturbation matrix has A*1 = -d*1, so A + Q is always singular; "
        "the perturbed bound assumes this eigenpair is excluded");
  }
  const IntMatrix& a = *cfg.perturbation;
  const std::vector<std::uint8_t> singular = run_trials<std::uint8_t>(
      cfg.trials, cfg.threads, [&cfg, &a](std::size_t t) -> std::uint8_t {
        RngStream rng(cfg.master_seed, t);
        const CombinatorialMatrix q = sample_matrix(cfg.n, cfg.d, rng);
        return det_integer_exact(a + q.to_int_matrix()) == 0 ? 1 : 0;
      });
  std::size_t successes = 0;
  for (std::uint8_t s : singular) successes += s;
  return make_estimate(successes, cfg.trials, cfg.master_seed);
}

KernelMomentReport kernel_first_moment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  KernelMomentReport report;
  report.prime = choose_prime(cfg.n, cfg.d);
  if (cfg.fixed_p != 0) report.prime.p = cfg.fixed_p;
  const std::uint64_t p = report.prime.p;
  if (cfg.d % p == 0) {
    throw hypothesis_error(
        "kernel_first_moment: p divides d (p=" + std::to_string(p) + ", d=" +
        std::to_string(cfg.d) +
        "); then 1 is always in the kernel and the first-moment bound is "
        "claimed only for p not dividing d");
  }
  const PrimeField field(p);
  const std::vector<mpz_class> kernels = run_trials<mpz_class>(
      cfg.trials, cfg.threads, [&cfg, &field](std::size_t t) {
        RngStream rng(cfg.master_seed, t);
        const CombinatorialMatrix q = sample_matrix(cfg.n, cfg.d, rng);
        return kernel_size(q.to_matrix_mod_p(field));
      });
  mpz_class sum = 0;
  std::size_t tail_successes = 0;
  for (const mpz_class& k : kernels) {
    sum += k;
    if (k >= static_cast<long>(p)) ++tail_successes;
  }
  report.mean_kernel = mpq_class(sum, static_cast<unsigned long>(cfg.trials));
  report.mean_kernel.canonicalize();
  report.mean_kernel_d = report.mean_kernel.get_d();
  report.tail = make_estimate(tail_successes, cfg.trials, cfg.master_seed);
  const double se = std::sqrt(report.tail.estimate *
                              (1.0 - report.tail.estimate) /
                              static_cast<double>(cfg.trials));
  report.markov_bound =
      report.mean_kernel_d / static_cast<double>(p) + 3.0 * se;
  report.markov_holds = report.tail.estimate <= report.markov_bound + 1e-12;
  return report;
}

mpq_class zero_column_probability(std::size_t n, std::size_t d) {
  if (d < 1 || d > n) {
    throw std::invalid_argument("zero_column_probability: need 1 <= d <= n");
  }
  const long ln = static_cast<long>(n), ld = static_cast<long>(d);
  const mpz_class all = binomial(ln, ld);
  mpz_class all_pow;
  mpz_pow_ui(all_pow.get_mpz_t(), all.get_mpz_t(),
             static_cast<unsigned long>(n));
  mpq_class total = 0;
  for (long k = 1; k <= ln - ld; ++k) {
    mpz_class avoid_pow;
    const mpz_class avoid = binomial(ln - k, ld);
    mpz_pow_ui(avoid_pow.get_mpz_t(), avoid.get_mpz_t(),
               static_cast<unsigned long>(n));
    mpq_class term(binomial(ln, k) * avoid_pow, all_pow);
    term.canonicalize();
    if (k % 2 == 1) {
      total += term;
    } else {
      total -= term;
    }
  }
  return total;
}

EstimateCI estimate_zero_column(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::vector<std::uint8_t> zero_col = run_trials<std::uint8_t>(
      cfg.trials, cfg.threads, [&cfg](std::size_t t) -> std::uint8_t {
        RngStream rng(cfg.master_seed, t);
        const CombinatorialMatrix q = sample_matrix(cfg.n, cfg.d, rng);
        std::vector<bool> hit(cfg.n, false);
        for (const SupportSet& row : q.rows()) {
          for (std::uint32_t e : row.elements()) hit[e - 1] = true;
        }
        for (bool h : hit) {
          if (!h) return 1;
        }
        return 0;
      });
  std::size_t successes = 0;
  for (std::uint8_t s : zero_col) successes += s;
  return make_estimate(successes, cfg.trials, cfg.master_seed);
}

std::vector<ScanRow> conjecture_scan(const std::vector<std::size_t>& ns,
                                     const std::vector<double>& cs,
                                     std::size_t trials,
                                     std::uint64_t master_seed,
                                     std::size_t threads) {
  std::vector<ScanRow> rows;
  rows.reserve(ns.size() * cs.size());
  std::uint64_t row_index = 0;
  for (std::size_t n : ns) {
    for (double c : cs) {
      ScanRow row;
      row.n = n;
      row.c = c;
      const double raw = c * std::log(static_cast<double>(n));
      const std::size_t d_raw =
          raw <= 1.0 ? 1 : static_cast<std::size_t>(std::ceil(raw));
      row.d = std::min(n, std::max<std::size_t>(1, d_raw));
      row.row_seed = RngStream(master_seed, row_index).next_u64();
      ExperimentConfig sub;
      sub.n = n;
      sub.d = row.d;
      sub.trials = trials;
      sub.master_seed = row.row_seed;
      sub.threads = threads;
      row.singularity = estimate_singularity(sub);
      row.zero_column_exact = zero_column_probability(n, row.d);
      rows.push_back(std::move(row));
      ++row_index;
    }
  }
  return rows;
}

}  // namespace qmat
