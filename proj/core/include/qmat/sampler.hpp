/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#ifndef QMAT_SAMPLER_HPP
#define QMAT_SAMPLER_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmat/ff_linalg.hpp"
#include "qmat/rng.hpp"

namespace qmat {

/// The pair couplings below are defined only for d <= n/2 (the shifted index
/// sigma(i+d) must exist); larger d is rejected with this error.
struct coupling_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A d-element subset of {1, ..., n}, kept sorted.
class SupportSet {
 public:
  SupportSet(std::size_t n, std::vector<std::uint32_t> elements);

  std::size_t ambient() const { return n_; }
  std::size_t weight() const { return elements_.size(); }
  const std::vector<std::uint32_t>& elements() const { return elements_; }

  /// 0/1 indicator row of length n.
  std::vector<std::uint8_t> bits() const;

  bool operator==(const SupportSet&) const = default;
  bool operator<(const SupportSet& other) const {
    return elements_ < other.elements_;
  }

 private:
  std::size_t n_;
  std::vector<std::uint32_t> elements_;
};

/// Comma-separated 1-based index list, e.g. "1,3,4".
std::string support_to_string(const SupportSet& s);

/// An n x n 0/1 matrix whose every row has exactly d ones.
class CombinatorialMatrix {
 public:
  CombinatorialMatrix(std::size_t n, std::size_t d,
                      std::vector<SupportSet> rows);

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  const std::vector<SupportSet>& rows() const { return rows_; }
  const SupportSet& row(std::size_t i) const { return rows_[i]; }

  IntMatrix to_int_matrix() const;
  MatrixZp to_matrix_mod_p(const PrimeField& field) const;

  bool operator==(const CombinatorialMatrix&) const = default;

 private:
  std::size_t n_, d_;
  std::vector<SupportSet> rows_;
};

/// Uniform d-subset of {1, ..., n} by partial Fisher-Yates shuffle.
SupportSet sample_support(std::size_t n, std::size_t d, RngStream& rng);

/// n independent uniform rows.
CombinatorialMatrix sample_matrix(std::size_t n, std::size_t d,
                                  RngStream& rng);

/// Uniform permutation of {1, ..., n}; entry i-1 is the image of i.
std::vector<std::uint32_t> random_permutation(std::size_t n, RngStream& rng);

/// The support {sigma(i) : gamma_i = 1} united with {sigma(i+d) : gamma_i = 0}
/// for i in [1, d]. Under uniform (gamma, sigma) this is a uniform d-subset,
/// which lets pair statistics at positions (i, i+d) be isolated. Requires
/// n >= 2d; gamma entries are bits.
SupportSet coupled_support_bernoulli(const std::vector<std::uint8_t>& gamma,
                                     const std::vector<std::uint32_t>& sigma,
                                     std::size_t d);

/// Same coupling with signs: gamma entries are +-1 and sign g selects via
/// the bit (1+g)/2.
SupportSet coupled_support_rademacher(const std::vector<std::int8_t>& gamma,
                                      const std::vector<std::uint32_t>& sigma,
                                      std::size_t d);

/// Number of positions l in [1, m] with v_{sigma(l)} != v_{sigma(l+d)}.
/// Requires m <= d and n >= 2d.
std::size_t differing_pairs_count(const ResidueVector& v,
                                  const std::vector<std::uint32_t>& sigma,
                                  std::size_t d, std::size_t m);

}  // namespace qmat

#endif  // QMAT_SAMPLER_HPP
