#include <benchmark/benchmark.h>

#include "ditherlab/experiment.hpp"
#include "ditherlab/network.hpp"

namespace {

using namespace ditherlab;

Matrix random_batch(std::size_t batch) {
  auto s = derive_stream(9, {"bench-batch"});
  Matrix x(784, batch);
  for (double& v : x.values()) v = s.next_uniform(-0.13, 0.87);
  return x;
}

// One forward + backward + SGD step; range(0) = batch size, range(1) = regulariser.
void BM_TrainStep(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const RegulariserSpec regs[] = {RegulariserSpec::none(), RegulariserSpec::dropout(), RegulariserSpec::dither()};
  const RegulariserSpec& reg = regs[state.range(1)];
  const Matrix x = random_batch(batch);
  std::vector<std::uint8_t> labels(batch);
  for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<std::uint8_t>(i % 10);
  MlpParams params = shared_init(1);
  std::size_t step = 0;
  for (auto _ : state) {
    BatchNoise noise = batch_noise(1, reg, batch, 1, step++);
    const auto trace = forward(params, x, reg, Mode::kTrain, &noise);
    params = sgd_step(params, backward(trace, labels, params), 1.0);
  }
  state.SetLabel(reg.name());
}
BENCHMARK(BM_TrainStep)->ArgsProduct({{32, 256}, {0, 1, 2}});

void BM_EvaluateTenThousand(benchmark::State& state) {
  Dataset test;
  test.images = random_batch(10000);
  // Background-heavy like MNIST so the compressed path has something to skip.
  auto s = derive_stream(10, {"bench-mask"});
  for (double& v : test.images.values()) {
    if (s.next_unit() > 0.19) v = -0.13;
  }
  test.labels.assign(10000, 0);
  test.compressed = CompressedColumns(test.images, -0.13);
  const MlpParams params = shared_init(1);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(params, test, RegulariserSpec::none()));
}
BENCHMARK(BM_EvaluateTenThousand)->Unit(benchmark::kMillisecond);

}  // namespace
