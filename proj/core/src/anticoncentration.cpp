/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#include "qmat/anticoncentration.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include "qmat/combinatorics.hpp"
#include "qmat/prime.hpp"

namespace qmat {

namespace {

void require_range(std::size_t n, std::size_t d, const char* what) {
  if (d < 1 || d > n) {
    throw std::invalid_argument(std::string(what) + ": need 1 <= d <= n, got d=" +
                                std::to_string(d) + ", n=" + std::to_string(n));
  }
}

mpq_class ratio(const mpz_class& num, const mpz_class& den) {
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace

AtomDistribution::AtomDistribution(PrimeField field,
                                   std::vector<mpq_class> probs)
    : field_(field), probs_(std::move(probs)) {
  if (probs_.size() != field_.modulus()) {
    throw std::invalid_argument("AtomDistribution: need one atom per residue");
  }
  mpq_class total = 0;
  for (const mpq_class& q : probs_) {
    if (q < 0 || q > 1) {
      throw std::invalid_argument("AtomDistribution: atom outside [0,1]");
    }
    total += q;
  }
  if (total != 1) {
    throw std::invalid_argument("AtomDistribution: atoms do not sum to 1");
  }
}

std::pair<std::uint64_t, mpq_class> AtomDistribution::max_atom() const {
  std::uint64_t best = 0;
  for (std::uint64_t b = 1; b < probs_.size(); ++b) {
    if (probs_[b] > probs_[best]) best = b;
  }
  return {best, probs_[best]};
}

AtomDistribution atom_distribution_dp(const ResidueVector& v, std::size_t d) {
  const std::size_t n = v.size();
  require_range(n, d, "atom_distribution_dp");
  const std::uint64_t p = v.field().modulus();

  // ways[c][r] = number of c-subsets of the positions seen so far whose
  // entries sum to r mod p. One rolling table; descending c keeps each
  // position used at most once.
  std::vector<mpz_class> ways((d + 1) * p);
  ways[0] = 1;
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t vk = v[k];
    const std::size_t cmax = std::min(k + 1, d);
    for (std::size_t c = cmax; c >= 1; --c) {
      for (std::uint64_t r = 0; r < p; ++r) {
        const std::uint64_t prev = (r + p - vk) % p;
        ways[c * p + r] += ways[(c - 1) * p + prev];
      }
    }
  }

  const mpz_class total = binomial(static_cast<long>(n), static_cast<long>(d));
  std::vector<mpq_class> probs;
  probs.reserve(p);
  for (std::uint64_t b = 0; b < p; ++b) {
    probs.push_back(ratio(ways[d * p + b], total));
  }
  return AtomDistribution(v.field(), std::move(probs));
}

AtomDistribution atom_distribution_bruteforce(const ResidueVector& v,
                                              std::size_t d) {
  const std::size_t n = v.size();
  require_range(n, d, "atom_distribution_bruteforce");
  const mpz_class total =
      binomial(static_cast<long>(n), static_cast<long>(d));
  if (total > 10000000) {
    throw std::invalid_argument(
        "atom_distribution_bruteforce: C(n,d) exceeds the 10^7 cap");
  }
  const std::uint64_t p = v.field().modulus();

  std::vector<mpz_class> counts(p);
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (;;) {
    std::uint64_t sum = 0;
    for (std::size_t i : idx) sum = (sum + v[i]) % p;
    ++counts[sum];
    // Next subset in lexicographic order.
    std::size_t j = d;
    while (j > 0 && idx[j - 1] == n - d + (j - 1)) --j;
    if (j == 0) break;
    ++idx[j - 1];
    for (std::size_t k = j; k < d; ++k) idx[k] = idx[k - 1] + 1;
  }

  std::vector<mpq_class> probs;
  probs.reserve(p);
  for (std::uint64_t b = 0; b < p; ++b) probs.push_back(ratio(counts[b], total));
  return AtomDistribution(v.field(), std::move(probs));
}

mpq_class atom_prob_indicator_closedform(std::size_t s, std::uint64_t b,
                                         std::size_t n, std::size_t d,
                                         const PrimeField& field) {
  require_range(n, d, "atom_prob_indicator_closedform");
  const std::uint64_t p = field.modulus();
  if (b >= p) {
    throw std::invalid_argument(
        "atom_prob_indicator_closedform: need 0 <= b < p");
  }
  if (s > n) {
    throw std::invalid_argument(
        "atom_prob_indicator_closedform: need s <= n");
  }
  const long ls = static_cast<long>(s), lb = static_cast<long>(b),
             ld = static_cast<long>(d), ln = static_cast<long>(n),
             lp = static_cast<long>(p);
  const long limit = std::min(floor_div(ls - lb, lp), floor_div(ld - lb, lp));
  mpz_class sum = 0;
  for (long i = 0; i <= limit; ++i) {
    const long t = i * lp + lb;
    sum += binomial(ls, t) * binomial(ln - ls, ld - t);
  }
  return ratio(sum, binomial(ln, ld));
}

AlmostConstantReport is_almost_constant(const ResidueVector& v,
                                        std::size_t d) {
  const std::size_t n = v.size();
  require_range(n, d, "is_almost_constant");
  if (n < 2) {
    throw std::invalid_argument("is_almost_constant: need n >= 2");
  }
  std::vector<std::size_t> level(v.field().modulus(), 0);
  for (std::size_t i = 0; i < n; ++i) ++level[v[i]];
  std::uint64_t witness = 0;
  for (std::uint64_t b = 1; b < level.size(); ++b) {
    if (level[b] > level[witness]) witness = b;
  }
  const double threshold =
      static_cast<double>(n) -
      static_cast<double>(d) / (10.0 * std::log(static_cast<double>(n)));
  return {static_cast<double>(level[witness]) > threshold, witness,
          level[witness], threshold};
}

AtomBoundReport verify_atom_bound(const ResidueVector& v, std::size_t d) {
  require_range(v.size(), d, "verify_atom_bound");
  if (v.is_constant()) {
    throw hypothesis_error(
        "verify_atom_bound: v lies on the constant line; the atom bound is "
        "claimed only for vectors off it");
  }
  const AtomDistribution dist = atom_distribution_dp(v, d);
  auto [argmax_b, max_prob] = dist.max_atom();
  const long n = static_cast<long>(v.size());
  mpq_class bound(2 * n - static_cast<long>(d), 2 * n);
  bound.canonicalize();
  return {argmax_b, max_prob, bound, max_prob <= bound};
}

FourierProfile fourier_profile(const ResidueVector& v, std::size_t d) {
  const AtomDistribution dist = atom_distribution_dp(v, d);
  const std::uint64_t p = v.field().modulus();
  FourierProfile out{p, std::vector<double>(p, 0.0)};
  out.magnitudes[0] = 1.0;  // the atoms sum to exactly 1
  for (std::uint64_t xi = 1; xi < p; ++xi) {
    std::complex<double> coef = 0.0;
    for (std::uint64_t b = 0; b < p; ++b) {
      const double angle = 2.0 * std::numbers::pi *
                           static_cast<double>(v.field().mul(xi, b)) /
                           static_cast<double>(p);
      coef += dist.prob(b).get_d() *
              std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out.magnitudes[xi] = std::abs(coef);
  }
  return out;
}

UniformityDeviation uniformity_deviation(const ResidueVector& v,
                                         std::size_t d) {
  const AtomDistribution dist = atom_distribution_dp(v, d);
  const std::uint64_t p = v.field().modulus();
  mpq_class worst = 0;
  for (std::uint64_t b = 0; b < p; ++b) {
    mpq_class dev = mpq_class(static_cast<long>(p)) * dist.prob(b) - 1;
    if (dev < 0) dev = -dev;
    if (dev > worst) worst = dev;
  }
  const double single = worst.get_d();
  const double product =
      std::pow(1.0 + single, static_cast<double>(v.size())) - 1.0;
  return {worst, single, product};
}

CosineBoundReport verify_cosine_bound(std::uint64_t p) {
  if (!is_prime_u64(p)) {
    throw std::invalid_argument("verify_cosine_bound: p must be prime");
  }
  const double pd = static_cast<double>(p);
  const double scale = std::exp(2.0 / (pd * pd));
  double max_ratio = 0.0;
  for (std::uint64_t m = 1; m < p; ++m) {
    const double ratio =
        std::fabs(std::cos(std::numbers::pi * static_cast<double>(m) / pd)) *
        scale;
    max_ratio = std::max(max_ratio, ratio);
  }
  return {max_ratio, max_ratio <= 1.0 + 1e-12};
}

std::vector<BinomialCell> binomial_cell_inequality(std::size_t n,
                                                   std::size_t d,
                                                   const PrimeField& field,
                                                   std::size_t s,
                                                   std::uint64_t b) {
  if (s < 2 || s + 1 > n) {
    throw std::invalid_argument(
        "binomial_cell_inequality: need 2 <= s <= n-1");
  }
  if (d < 1 || 2 * d > n) {
    throw std::invalid_argument(
        "binomial_cell_inequality: need 1 <= d <= n/2");
  }
  const std::uint64_t p = field.modulus();
  if (b >= p) {
    throw std::invalid_argument("binomial_cell_inequality: need 0 <= b < p");
  }
  const long ls = static_cast<long>(s), lb = static_cast<long>(b),
             ld = static_cast<long>(d), ln = static_cast<long>(n),
             lp = static_cast<long>(p);
  const long limit = std::min(floor_div(ls - lb, lp), floor_div(ld - lb, lp));
  std::vector<BinomialCell> cells;
  for (long i = 0; i <= limit; ++i) {
    const long t = i * lp + lb;
    BinomialCell cell;
    cell.n = n;
    cell.d = d;
    cell.s = s;
    cell.p = p;
    cell.b = b;
    cell.index = static_cast<std::size_t>(i);
    cell.t = t;
    cell.a = binomial(ls, t - 1) * binomial(ln - ls, ld - t + 1) +
             binomial(ls, t + 1) * binomial(ln - ls, ld - t - 1);
    cell.c = binomial(ls, t) * binomial(ln - ls, ld - t);
    cell.holds_half = 2 * ln * cell.a >= ld * cell.c;
    cell.holds_full = ln * cell.a >= ld * cell.c;
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace qmat
