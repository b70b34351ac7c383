/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#ifndef QMAT_ERRORS_HPP
#define QMAT_ERRORS_HPP

#include <stdexcept>

namespace qmat {

/// Raised when an input violates the standing hypothesis of the claim being
/// checked (for example a perturbation matrix with A*1 = -d*1, a modulus
/// dividing d, or a vector on the constant line). The command-line driver
/// maps this to exit code 2 so batch runs can tell "hypothesis not met"
/// apart from genuine faults.
struct hypothesis_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qmat

#endif  // QMAT_ERRORS_HPP
