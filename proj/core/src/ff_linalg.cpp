/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#include "qmat/ff_linalg.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

namespace qmat {

namespace {

struct Elimination {
  std::size_t rank = 0;
  std::uint64_t det = 0;  // meaningful for square input only
};

// Row-echelon reduction of a row-major residue buffer, in place.
Elimination eliminate(std::vector<std::uint64_t>& m, std::size_t rows,
                      std::size_t cols, const PrimeField& f) {
  Elimination result;
  std::uint64_t det = 1 % f.modulus();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t pivot = r;
    while (pivot < rows && m[pivot * cols + c] == 0) ++pivot;
    if (pivot == rows) continue;
    if (pivot != r) {
      for (std::size_t j = c; j < cols; ++j) {
        std::swap(m[r * cols + j], m[pivot * cols + j]);
      }
      det = f.neg(det);
    }
    const std::uint64_t lead = m[r * cols + c];
    det = f.mul(det, lead);
    const std::uint64_t inv = f.inv(lead);
    for (std::size_t i = r + 1; i < rows; ++i) {
      const std::uint64_t factor = m[i * cols + c];
      if (factor == 0) continue;
      const std::uint64_t scale = f.mul(factor, inv);
      m[i * cols + c] = 0;
      for (std::size_t j = c + 1; j < cols; ++j) {
        m[i * cols + j] =
            f.sub(m[i * cols + j], f.mul(scale, m[r * cols + j]));
      }
    }
    ++r;
  }
  result.rank = r;
  result.det = (rows == cols && r == rows) ? det : 0;
  return result;
}

void require_square(std::size_t rows, std::size_t cols, const char* what) {
  if (rows != cols) {
    throw std::invalid_argument(std::string(what) + ": matrix is " +
                                std::to_string(rows) + "x" +
                                std::to_string(cols) + ", expected square");
  }
}

}  // namespace

MatrixZp::MatrixZp(std::size_t rows, std::size_t cols, PrimeField field,
                   std::vector<std::uint64_t> entries)
    : rows_(rows), cols_(cols), field_(field), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw std::invalid_argument("MatrixZp: entry count does not match shape");
  }
  for (std::uint64_t e : entries_) {
    if (e >= field_.modulus()) {
      throw std::invalid_argument("MatrixZp: entry not reduced mod p");
    }
  }
}

void MatrixZp::set(std::size_t i, std::size_t j, std::uint64_t value) {
  if (value >= field_.modulus()) {
    throw std::invalid_argument("MatrixZp: entry not reduced mod p");
  }
  entries_[i * cols_ + j] = value;
}

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols,
                     std::vector<mpz_class> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw std::invalid_argument("IntMatrix: entry count does not match shape");
  }
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<long>>& rows) {
  if (rows.empty()) throw std::invalid_argument("IntMatrix: no rows");
  const std::size_t cols = rows.front().size();
  IntMatrix out(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw std::invalid_argument("IntMatrix: ragged rows");
    }
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = rows[i][j];
  }
  return out;
}

IntMatrix IntMatrix::operator+(const IntMatrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw std::invalid_argument("IntMatrix: shape mismatch in addition");
  }
  IntMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    out.entries_[i] = entries_[i] + other.entries_[i];
  }
  return out;
}

ResidueVector::ResidueVector(PrimeField field,
                             std::vector<std::uint64_t> entries)
    : field_(field), entries_(std::move(entries)) {
  for (std::uint64_t e : entries_) {
    if (e >= field_.modulus()) {
      throw std::invalid_argument("ResidueVector: entry not reduced mod p");
    }
  }
}

ResidueVector ResidueVector::reduced(PrimeField field,
                                     const std::vector<long>& values) {
  const long p = static_cast<long>(field.modulus());
  std::vector<std::uint64_t> out;
  out.reserve(values.size());
  for (long v : values) {
    long r = v % p;
    if (r < 0) r += p;
    out.push_back(static_cast<std::uint64_t>(r));
  }
  return ResidueVector(field, std::move(out));
}

bool ResidueVector::is_constant() const {
  for (std::uint64_t e : entries_) {
    if (e != entries_.front()) return false;
  }
  return true;
}

MatrixZp reduce_mod_p(const IntMatrix& a, const PrimeField& field) {
  std::vector<std::uint64_t> entries;
  entries.reserve(a.rows() * a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      entries.push_back(mpz_fdiv_ui(a(i, j).get_mpz_t(), field.modulus()));
    }
  }
  return MatrixZp(a.rows(), a.cols(), field, std::move(entries));
}

std::size_t rank_mod_p(const MatrixZp& m) {
  std::vector<std::uint64_t> buf = m.entries();
  return eliminate(buf, m.rows(), m.cols(), m.field()).rank;
}

std::uint64_t det_mod_p(const MatrixZp& m) {
  require_square(m.rows(), m.cols(), "det_mod_p");
  std::vector<std::uint64_t> buf = m.entries();
  return eliminate(buf, m.rows(), m.cols(), m.field()).det;
}

mpz_class kernel_size(const MatrixZp& m) {
  require_square(m.rows(), m.cols(), "kernel_size");
  const std::size_t rank = rank_mod_p(m);
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), m.field().modulus(),
                static_cast<unsigned long>(m.rows() - rank));
  return out;
}

mpz_class hadamard_bound_squared(const IntMatrix& a) {
  mpz_class product = 1;
  mpz_class row_norm_sq;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    row_norm_sq = 0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      row_norm_sq += a(i, j) * a(i, j);
    }
    product *= row_norm_sq;
  }
  return product;
}

mpz_class det_integer_exact(const IntMatrix& a) {
  require_square(a.rows(), a.cols(), "det_integer_exact");
  const std::size_t n = a.rows();
  if (n == 0) throw std::invalid_argument("det_integer_exact: empty matrix");

  const mpz_class hadamard_sq = hadamard_bound_squared(a);
  if (hadamard_sq == 0) return 0;  // a zero row forces det = 0

  // Greedy prime set: descending from 2^62 until product^2 > 4 * H^2,
  // so the symmetric lift of the CRT residue is the exact determinant.
  std::vector<std::uint64_t> primes;
  mpz_class product = 1;
  std::uint64_t candidate = (std::uint64_t{1} << 62);
  while (product * product <= 4 * hadamard_sq) {
    candidate = prev_prime(candidate);
    primes.push_back(candidate);
    product *= mpz_class(std::to_string(candidate));
    --candidate;
  }

  mpz_class result = 0;   // running CRT value in [0, partial)
  mpz_class partial = 1;  // product of primes consumed so far
  std::vector<std::uint64_t> residues(n * n);
  for (std::uint64_t p : primes) {
    const PrimeField field(p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        residues[i * n + j] = mpz_fdiv_ui(a(i, j).get_mpz_t(), p);
      }
    }
    const std::uint64_t det_p = eliminate(residues, n, n, field).det;

    // Fold the new residue into the running CRT value.
    const std::uint64_t partial_mod_p = mpz_fdiv_ui(partial.get_mpz_t(), p);
    const std::uint64_t result_mod_p = mpz_fdiv_ui(result.get_mpz_t(), p);
    const std::uint64_t delta =
        field.mul(field.sub(det_p, result_mod_p), field.inv(partial_mod_p));
    result += partial * mpz_class(std::to_string(delta));
    partial *= mpz_class(std::to_string(p));
  }

  if (result * 2 > partial) result -= partial;
  return result;
}

std::vector<std::uint64_t> mat_vec_mod_p(const MatrixZp& m,
                                         const std::vector<std::uint64_t>& v) {
  if (v.size() != m.cols()) {
    throw std::invalid_argument("mat_vec_mod_p: size mismatch");
  }
  const PrimeField& f = m.field();
  std::vector<std::uint64_t> out(m.rows(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::uint64_t acc = 0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      acc = f.add(acc, f.mul(m(i, j), v[j]));
    }
    out[i] = acc;
  }
  return out;
}

void write_matrix_text(std::ostream& os, const IntMatrix& a) {
  os << a.rows() << ' ' << a.cols() << '\n';
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j) os << ' ';
      os << a(i, j).get_str();
    }
    os << '\n';
  }
}

IntMatrix read_matrix_text(std::istream& is) {
  std::size_t rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows == 0 || cols == 0) {
    throw std::runtime_error("matrix text: bad or missing header line");
  }
  IntMatrix out(rows, cols);
  std::string token;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (!(is >> token)) {
        throw std::runtime_error("matrix text: truncated at row " +
                                 std::to_string(i));
      }
      if (mpz_set_str(out(i, j).get_mpz_t(), token.c_str(), 10) != 0) {
        throw std::runtime_error("matrix text: bad integer '" + token +
                                 "' at row " + std::to_string(i));
      }
    }
  }
  return out;
}

void write_matrix_file(const std::string& path, const IntMatrix& a) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  write_matrix_text(os, a);
  if (!os.good()) throw std::runtime_error("write failed: " + path);
}

IntMatrix read_matrix_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  try {
    return read_matrix_text(is);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string(e.what()) + " (" + path + ")");
  }
}

}  // namespace qmat
