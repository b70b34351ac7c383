/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#ifndef QMAT_RNG_HPP
#define QMAT_RNG_HPP

#include <cstdint>

namespace qmat {

/// One reproducible random stream, keyed by (master_seed, stream_index).
///
/// The pair is hashed into an independent xoshiro256++ state, so streams can
/// be created in any order on any worker: trial t of an experiment always
/// draws from RngStream(master_seed, t) and gets the same values. Bounded
/// draws use multiply-shift rejection and are exactly uniform, independent
/// of platform or standard library.
///
/// A stream is cheap to construct and must not be shared across threads.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  std::uint64_t next_u64();

  /// Uniform draw from {0, 1, ..., bound-1}; bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double();

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t state_[4];
};

}  // namespace qmat

#endif  // QMAT_RNG_HPP
