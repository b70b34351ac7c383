/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#ifndef QMAT_FF_LINALG_HPP
#define QMAT_FF_LINALG_HPP

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qmat/prime.hpp"

namespace qmat {

/// Dense matrix of residues mod a prime. Entries are kept in [0, p).
class MatrixZp {
 public:
  MatrixZp(std::size_t rows, std::size_t cols, PrimeField field)
      : rows_(rows), cols_(cols), field_(field), entries_(rows * cols, 0) {}

  MatrixZp(std::size_t rows, std::size_t cols, PrimeField field,
           std::vector<std::uint64_t> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const PrimeField& field() const { return field_; }

  std::uint64_t operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }
  void set(std::size_t i, std::size_t j, std::uint64_t value);

  const std::vector<std::uint64_t>& entries() const { return entries_; }

  bool operator==(const MatrixZp&) const = default;

 private:
  std::size_t rows_, cols_;
  PrimeField field_;
  std::vector<std::uint64_t> entries_;
};

/// Dense matrix over the integers with unbounded entries.
class IntMatrix {
 public:
  IntMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols) {}

  IntMatrix(std::size_t rows, std::size_t cols, std::vector<mpz_class> entries);

  /// Convenience for literals: row-major initializer list of signed values.
  static IntMatrix from_rows(
      const std::vector<std::vector<long>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  const mpz_class& operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }
  mpz_class& operator()(std::size_t i, std::size_t j) {
    return entries_[i * cols_ + j];
  }

  IntMatrix operator+(const IntMatrix& other) const;

  bool operator==(const IntMatrix&) const = default;

 private:
  std::size_t rows_, cols_;
  std::vector<mpz_class> entries_;
};

/// A length-n vector of residues mod p.
class ResidueVector {
 public:
  ResidueVector(PrimeField field, std::vector<std::uint64_t> entries);

  /// Reduces arbitrary signed integers to their least nonnegative residues.
  static ResidueVector reduced(PrimeField field,
                               const std::vector<long>& values);

  std::size_t size() const { return entries_.size(); }
  const PrimeField& field() const { return field_; }
  std::uint64_t operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<std::uint64_t>& entries() const { return entries_; }

  /// True when every entry equals the first one, i.e. v lies on the
  /// constant line (including the zero vector).
  bool is_constant() const;

  bool operator==(const ResidueVector&) const = default;

 private:
  PrimeField field_;
  std::vector<std::uint64_t> entries_;
};

/// Entrywise least nonnegative residue of A mod p.
MatrixZp reduce_mod_p(const IntMatrix& a, const PrimeField& field);

/// Rank over Z_p by Gaussian elimination with modular inverses. The pivot is
/// the first nonzero entry in column order, which keeps runs deterministic.
std::size_t rank_mod_p(const MatrixZp& m);

/// Determinant over Z_p; rejects non-square input.
std::uint64_t det_mod_p(const MatrixZp& m);

/// Number of kernel vectors of a square matrix over Z_p, i.e. p^(n - rank).
mpz_class kernel_size(const MatrixZp& m);

/// Exact integer determinant. Computed modulo a greedily chosen set of
/// descending 62-bit primes whose product exceeds twice the Hadamard bound,
/// then recombined by CRT with a symmetric lift. Rejects non-square input.
mpz_class det_integer_exact(const IntMatrix& a);

/// Product over rows of the squared Euclidean row norm. The determinant
/// magnitude is bounded by its square root.
mpz_class hadamard_bound_squared(const IntMatrix& a);

/// Matrix-vector product over Z_p.
std::vector<std::uint64_t> mat_vec_mod_p(const MatrixZp& m,
                                         const std::vector<std::uint64_t>& v);

/// Plain-text matrix format: a "rows cols" header line followed by rows of
/// space-separated integers.
void write_matrix_text(std::ostream& os, const IntMatrix& a);
IntMatrix read_matrix_text(std::istream& is);
void write_matrix_file(const std::string& path, const IntMatrix& a);
IntMatrix read_matrix_file(const std::string& path);

}  // namespace qmat

#endif  // QMAT_FF_LINALG_HPP
