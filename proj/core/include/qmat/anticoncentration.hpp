/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#ifndef QMAT_ANTICONCENTRATION_HPP
#define QMAT_ANTICONCENTRATION_HPP

#include <gmpxx.h>

#include <cstdint>
#include <vector>

#include "qmat/errors.hpp"
#include "qmat/ff_linalg.hpp"

namespace qmat {

/// Exact law of q^T v mod p for a uniform weight-d row q: one rational
/// probability per residue b, summing to exactly 1.
class AtomDistribution {
 public:
  AtomDistribution(PrimeField field, std::vector<mpq_class> probs);

  const PrimeField& field() const { return field_; }
  const mpq_class& prob(std::uint64_t b) const { return probs_[b]; }
  const std::vector<mpq_class>& probs() const { return probs_; }

  /// Largest atom and its residue; ties broken by smallest residue.
  std::pair<std::uint64_t, mpq_class> max_atom() const;

  bool operator==(const AtomDistribution&) const = default;

 private:
  PrimeField field_;
  std::vector<mpq_class> probs_;
};

/// |E e_p(xi q^T v)| for each frequency xi, where e_p(x) = exp(2 pi i x / p).
struct FourierProfile {
  std::uint64_t p;
  std::vector<double> magnitudes;  // indexed by xi; magnitudes[0] == 1
};

/// Exact atom law by dynamic programming over (position, #chosen, residue);
/// counts are big integers divided by C(n,d). Time O(n d p), memory O(d p).
AtomDistribution atom_distribution_dp(const ResidueVector& v, std::size_t d);

/// Independent oracle: enumerate every d-subset. Rejects instances with
/// C(n,d) > 10^7.
AtomDistribution atom_distribution_bruteforce(const ResidueVector& v,
                                              std::size_t d);

/// Closed form of the atom probability of an indicator vector with support
/// size s: sum over i of C(s, ip+b) C(n-s, d-ip-b) / C(n,d), the sum running
/// up to l = min(floor((s-b)/p), floor((d-b)/p)); l < 0 gives 0.
mpq_class atom_prob_indicator_closedform(std::size_t s, std::uint64_t b,
                                         std::size_t n, std::size_t d,
                                         const PrimeField& field);

struct AlmostConstantReport {
  bool almost_constant;       // some level set exceeds the threshold
  std::uint64_t witness;      // residue with the largest level set
  std::size_t level_size;     // size of that level set
  double threshold;           // n - d / (10 ln n), natural log
};

/// A vector is almost constant when one residue fills more than
/// n - d/(10 ln n) coordinates. Ties between residues go to the smallest.
/// Requires n >= 2.
AlmostConstantReport is_almost_constant(const ResidueVector& v, std::size_t d);

struct AtomBoundReport {
  std::uint64_t argmax_b;
  mpq_class max_prob;
  mpq_class bound;  // 1 - d/(2n)
  bool holds;
};

/// Checks max_b P[q^T v = b] <= 1 - d/(2n) exactly. Vectors on the constant
/// line are rejected with hypothesis_error: their law is a point mass and
/// the bound is only claimed off that line.
AtomBoundReport verify_atom_bound(const ResidueVector& v, std::size_t d);

/// Character-sum magnitudes, computed as the DFT of the exact atom law.
FourierProfile fourier_profile(const ResidueVector& v, std::size_t d);

struct UniformityDeviation {
  mpq_class exact;        // max_b |p P(b) - 1|
  double single_row;      // the same as a double
  double n_row_product;   // (1 + single_row)^n - 1, by row independence
};

/// Worst-case relative deviation of the atom law from uniform on Z_p.
UniformityDeviation uniformity_deviation(const ResidueVector& v,
                                         std::size_t d);

struct CosineBoundReport {
  double max_ratio;  // max over m in [1, p-1] of |cos(pi m / p)| e^{2/p^2}
  bool holds;        // max_ratio <= 1 + 1e-12
};

/// Verifies |cos(pi m / p)| <= e^{-2/p^2} for every m in [1, p-1].
CosineBoundReport verify_cosine_bound(std::uint64_t p);

/// One term of the indicator-vector atom sum at t = i p + b, together with
/// the mass a of its two neighbor terms (lower index t-1 and t+1). The
/// inequality 2n a >= d c makes each term small relative to its neighbors,
/// which is what caps the atom probability of indicator vectors.
struct BinomialCell {
  std::size_t n, d, s;
  std::uint64_t p, b;
  std::size_t index;  // the i of t = i p + b
  long t;
  mpz_class a;  // C(s,t-1) C(n-s,d-t+1) + C(s,t+1) C(n-s,d-t-1)
  mpz_class c;  // C(s,t)   C(n-s,d-t)
  bool holds_half;  // 2n a >= d c (asserted)
  bool holds_full;  // n a >= d c  (reported only)
};

/// Evaluates every cell i in [0, l] for the given (n, d, p, s, b). Requires
/// 2 <= s <= n-1, d <= n/2, 0 <= b < p.
std::vector<BinomialCell> binomial_cell_inequality(std::size_t n,
                                                   std::size_t d,
                                                   const PrimeField& field,
                                                   std::size_t s,
                                                   std::uint64_t b);

}  // namespace qmat

#endif  // QMAT_ANTICONCENTRATION_HPP
