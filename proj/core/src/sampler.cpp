/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
#include "qmat/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace qmat {

namespace {

void require_range(std::size_t n, std::size_t d, const char* what) {
  if (d < 1 || d > n) {
    throw std::invalid_argument(std::string(what) + ": need 1 <= d <= n, got d=" +
                                std::to_string(d) + ", n=" + std::to_string(n));
  }
}

void require_coupling_range(std::size_t n, std::size_t d, const char* what) {
  if (n < 2 * d) {
    throw coupling_error(std::string(what) +
                         ": the pair coupling needs n >= 2d, got n=" +
                         std::to_string(n) + ", d=" + std::to_string(d));
  }
}

void require_permutation(const std::vector<std::uint32_t>& sigma,
                         const char* what) {
  std::vector<bool> seen(sigma.size() + 1, false);
  for (std::uint32_t x : sigma) {
    if (x < 1 || x > sigma.size() || seen[x]) {
      throw std::invalid_argument(std::string(what) +
                                  ": sigma is not a permutation of 1..n");
    }
    seen[x] = true;
  }
}

}  // namespace

SupportSet::SupportSet(std::size_t n, std::vector<std::uint32_t> elements)
    : n_(n), elements_(std::move(elements)) {
  std::sort(elements_.begin(), elements_.end());
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (elements_[i] < 1 || elements_[i] > n_) {
      throw std::invalid_argument("SupportSet: index out of [1, n]");
    }
    if (i > 0 && elements_[i] == elements_[i - 1]) {
      throw std::invalid_argument("SupportSet: duplicate index");
    }
  }
}

std::vector<std::uint8_t> SupportSet::bits() const {
  std::vector<std::uint8_t> out(n_, 0);
  for (std::uint32_t e : elements_) out[e - 1] = 1;
  return out;
}

std::string support_to_string(const SupportSet& s) {
  std::ostringstream os;
  for (std::size_t i = 0; i < s.elements().size(); ++i) {
    if (i) os << ',';
    os << s.elements()[i];
  }
  return os.str();
}

CombinatorialMatrix::CombinatorialMatrix(std::size_t n, std::size_t d,
                                         std::vector<SupportSet> rows)
    : n_(n), d_(d), rows_(std::move(rows)) {
  if (rows_.size() != n_) {
    throw std::invalid_argument("CombinatorialMatrix: need n rows");
  }
  for (const SupportSet& r : rows_) {
    if (r.ambient() != n_ || r.weight() != d_) {
      throw std::invalid_argument(
          "CombinatorialMatrix: row with wrong ambient size or weight");
    }
  }
}

IntMatrix CombinatorialMatrix::to_int_matrix() const {
  IntMatrix out(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::uint32_t e : rows_[i].elements()) out(i, e - 1) = 1;
  }
  return out;
}

MatrixZp CombinatorialMatrix::to_matrix_mod_p(const PrimeField& field) const {
  MatrixZp out(n_, n_, field);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::uint32_t e : rows_[i].elements()) out.set(i, e - 1, 1);
  }
  return out;
}

SupportSet sample_support(std::size_t n, std::size_t d, RngStream& rng) {
  require_range(n, d, "sample_support");
  // Partial Fisher-Yates: after d swap steps the prefix is a uniform
  // d-subset in uniform order; SupportSet sorts it.
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 1u);
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t j = i + rng.uniform_below(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(d);
  return SupportSet(n, std::move(pool));
}

CombinatorialMatrix sample_matrix(std::size_t n, std::size_t d,
                                  RngStream& rng) {
  require_range(n, d, "sample_matrix");
  std::vector<SupportSet> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rows.push_back(sample_support(n, d, rng));
  return CombinatorialMatrix(n, d, std::move(rows));
}

std::vector<std::uint32_t> random_permutation(std::size_t n, RngStream& rng) {
  std::vector<std::uint32_t> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 1u);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + rng.uniform_below(n - i);
    std::swap(sigma[i], sigma[j]);
  }
  return sigma;
}

SupportSet coupled_support_bernoulli(const std::vector<std::uint8_t>& gamma,
                                     const std::vector<std::uint32_t>& sigma,
                                     std::size_t d) {
  const std::size_t n = sigma.size();
  require_range(n, d, "coupled_support_bernoulli");
  require_coupling_range(n, d, "coupled_support_bernoulli");
  require_permutation(sigma, "coupled_support_bernoulli");
  if (gamma.size() != d) {
    throw std::invalid_argument("coupled_support_bernoulli: gamma length != d");
  }
  std::vector<std::uint32_t> elements;
  elements.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (gamma[i] > 1) {
      throw std::invalid_argument("coupled_support_bernoulli: gamma not 0/1");
    }
    elements.push_back(gamma[i] ? sigma[i] : sigma[i + d]);
  }
  return SupportSet(n, std::move(elements));
}

SupportSet coupled_support_rademacher(const std::vector<std::int8_t>& gamma,
                                      const std::vector<std::uint32_t>& sigma,
                                      std::size_t d) {
  std::vector<std::uint8_t> bits;
  bits.reserve(gamma.size());
  for (std::int8_t g : gamma) {
    if (g != 1 && g != -1) {
      throw std::invalid_argument("coupled_support_rademacher: gamma not +-1");
    }
    bits.push_back(static_cast<std::uint8_t>((1 + g) / 2));
  }
  return coupled_support_bernoulli(bits, sigma, d);
}

std::size_t differing_pairs_count(const ResidueVector& v,
                                  const std::vector<std::uint32_t>& sigma,
                                  std::size_t d, std::size_t m) {
  const std::size_t n = sigma.size();
  require_range(n, d, "differing_pairs_count");
  require_coupling_range(n, d, "differing_pairs_count");
  require_permutation(sigma, "differing_pairs_count");
  if (v.size() != n) {
    throw std::invalid_argument("differing_pairs_count: vector length != n");
  }
  if (m < 1 || m > d) {
    throw std::invalid_argument(
        "differing_pairs_count: window must satisfy 1 <= m <= d, got m=" +
        std::to_string(m));
  }
  std::size_t count = 0;
  for (std::size_t l = 0; l < m; ++l) {
    if (v[sigma[l] - 1] != v[sigma[l + d] - 1]) ++count;
  }
  return count;
}

}  // namespace qmat
