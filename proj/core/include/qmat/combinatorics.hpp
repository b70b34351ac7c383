/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#ifndef QMAT_COMBINATORICS_HPP
#define QMAT_COMBINATORICS_HPP

#include <gmpxx.h>

#include <cstdint>

namespace qmat {

/// Binomial coefficient C(a, k) with the boundary convention
/// C(a, k) = 0 whenever k < 0 or k > a.
inline mpz_class binomial(long a, long k) {
  if (k < 0 || k > a || a < 0) return 0;
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(a),
               static_cast<unsigned long>(k));
  return out;
}

/// Floor division for signed operands (C++ '/' truncates toward zero).
inline long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace qmat

#endif  // QMAT_COMBINATORICS_HPP
