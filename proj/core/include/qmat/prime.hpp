/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#ifndef QMAT_PRIME_HPP
#define QMAT_PRIME_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qmat {

/// Deterministic Miller-Rabin, valid for the full 64-bit range.
bool is_prime_u64(std::uint64_t n);

/// Smallest prime >= n. Throws std::overflow_error if the search would
/// leave the 64-bit range.
std::uint64_t next_prime(std::uint64_t n);

/// Largest prime <= n, or 0 if n < 2.
std::uint64_t prev_prime(std::uint64_t n);

/// Odd-only sieve; returns all primes <= limit in increasing order.
std::vector<std::uint32_t> primes_up_to(std::uint32_t limit);

/// A prime modulus with word-sized residue arithmetic. Primality is
/// checked at construction; all products go through a 128-bit widening
/// multiply before reduction.
class PrimeField {
 public:
  explicit PrimeField(std::uint64_t p) : p_(p) {
    if (!is_prime_u64(p)) {
      throw std::invalid_argument("PrimeField: modulus " + std::to_string(p) +
                                  " is not prime");
    }
  }

  std::uint64_t modulus() const { return p_; }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t s = a + b;
    return s >= p_ || s < a ? s - p_ : s;
  }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
    return a >= b ? a - b : a + p_ - b;
  }
  std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : p_ - a; }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    return static_cast<std::uint64_t>(
        static_cast<unsigned __int128>(a) * b % p_);
  }
  std::uint64_t pow(std::uint64_t base, std::uint64_t exp) const;

  /// Multiplicative inverse of a nonzero residue.
  std::uint64_t inv(std::uint64_t a) const {
    if (a == 0) throw std::domain_error("PrimeField: inverse of zero");
    return pow(a, p_ - 2);
  }

  bool operator==(const PrimeField&) const = default;

 private:
  std::uint64_t p_;
};

}  // namespace qmat

#endif  // QMAT_PRIME_HPP
