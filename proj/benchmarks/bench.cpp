/* Copyright 2026 the qmat authors. Subject to the Apache-2.0 license. */
//
// Microbenchmarks for the hot paths: row sampling, mod-p elimination,
// exact integer determinants, and the atom-law dynamic program.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "qmat/anticoncentration.hpp"
#include "qmat/ff_linalg.hpp"
#include "qmat/rng.hpp"
#include "qmat/sampler.hpp"

namespace {

using namespace qmat;

void BM_SampleMatrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = n / 4 + 1;
  std::uint64_t stream = 0;
  for (auto _ : state) {
    RngStream rng(1234, stream++);
    benchmark::DoNotOptimize(sample_matrix(n, d, rng));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SampleMatrix)->Arg(16)->Arg(64)->Arg(256)->Complexity();

void BM_DetModP(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PrimeField field(4611686018427387847ULL);  // largest prime < 2^62
  RngStream rng(99, 0);
  const MatrixZp m =
      sample_matrix(n, n / 4 + 1, rng).to_matrix_mod_p(field);
  for (auto _ : state) {
    MatrixZp work = m;
    benchmark::DoNotOptimize(det_mod_p(work));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DetModP)->Arg(16)->Arg(64)->Arg(256)->Complexity();

void BM_DetIntegerExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RngStream rng(7, 0);
  const IntMatrix a = sample_matrix(n, n / 4 + 1, rng).to_int_matrix();
  for (auto _ : state) {
    benchmark::DoNotOptimize(det_integer_exact(a));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DetIntegerExact)->Arg(16)->Arg(64)->Arg(128)->Complexity();

void BM_AtomDistributionDP(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PrimeField field(101);
  RngStream rng(5, 0);
  std::vector<std::uint64_t> entries(n);
  for (auto& e : entries) e = rng.uniform_below(101);
  const ResidueVector v(field, entries);
  for (auto _ : state) {
    benchmark::DoNotOptimize(atom_distribution_dp(v, n / 2));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AtomDistributionDP)->Arg(32)->Arg(128)->Arg(512)->Complexity();

}  // namespace

BENCHMARK_MAIN();
