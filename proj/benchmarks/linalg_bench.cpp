#include <benchmark/benchmark.h>

#include "ditherlab/linalg.hpp"
#include "ditherlab/prng.hpp"

namespace {

using ditherlab::Matrix;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  auto s = ditherlab::derive_stream(seed, {"bench"});
  Matrix m(rows, cols);
  for (double& v : m.values()) v = s.next_uniform(-1.0, 1.0);
  return m;
}

// Hidden-layer forward product: (100 x 784) * (784 x batch).
void BM_MatmulHidden(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Matrix w = random_matrix(100, 784, 1);
  const Matrix x = random_matrix(784, batch, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ditherlab::matmul(w, x));
  state.SetItemsProcessed(state.iterations() * 100 * 784 * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_MatmulHidden)->Arg(32)->Arg(256);

// Weight gradient: (100 x batch) * (784 x batch)^T.
void BM_MatmulTransposedRhs(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Matrix dz = random_matrix(100, batch, 3);
  const Matrix x = random_matrix(784, batch, 4);
  for (auto _ : state) benchmark::DoNotOptimize(ditherlab::matmul_transposed_rhs(dz, x));
  state.SetItemsProcessed(state.iterations() * 100 * 784 * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_MatmulTransposedRhs)->Arg(32)->Arg(256);

// Evaluation-sized product against a matrix that is ~19% non-background,
// roughly the MNIST ink density.
void BM_MatmulCompressed(benchmark::State& state) {
  const std::size_t cols = 2000;
  auto s = ditherlab::derive_stream(5, {"bench-sparse"});
  Matrix x(784, cols, -0.13);
  for (double& v : x.values()) {
    if (s.next_unit() < 0.19) v = s.next_unit() - 0.13;
  }
  const ditherlab::CompressedColumns cx(x, -0.13);
  const Matrix w = random_matrix(100, 784, 6);
  for (auto _ : state) benchmark::DoNotOptimize(ditherlab::matmul(w, cx));
  state.SetItemsProcessed(state.iterations() * 100 * static_cast<std::int64_t>(cx.stored()));
}
BENCHMARK(BM_MatmulCompressed);

}  // namespace
