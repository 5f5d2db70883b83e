#include "ditherlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <thread>
#include <utility>

#include "ditherlab/error.hpp"

namespace ditherlab {
namespace {

void run_parallel(std::size_t tasks, unsigned jobs, const std::function<void(std::size_t)>& body) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(jobs, tasks);
  std::vector<std::exception_ptr> failures(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks; i = next++) {
      try {
        body(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (train_count == 0) throw ConfigError("train count must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_sizes.empty()) throw ConfigError("no batch sizes configured");
  if (regularisers.empty()) throw ConfigError("no regularisers configured");
  for (std::size_t bs : batch_sizes) {
    if (bs == 0 || train_count % bs != 0) {
      throw ConfigError("batch size " + std::to_string(bs) + " does not divide train count " +
                        std::to_string(train_count));
    }
  }
}

MlpParams shared_init(std::uint64_t master_seed, MlpShape shape) {
  RngStream stream = derive_stream(master_seed, {"init"});
  return init_params(stream, shape);
}

BatchNoise batch_noise(std::uint64_t master_seed, const RegulariserSpec& reg, std::size_t batch_size,
                       std::size_t epoch, std::size_t batch_index) {
  auto make = [&](const char* purpose) {
    return derive_stream(master_seed, {"run", reg.name(), std::uint64_t{batch_size}, purpose,
                                       std::uint64_t{epoch}, std::uint64_t{batch_index}});
  };
  return {make("input"), make("hidden")};
}

LearningCurve run_single(const ExperimentConfig& cfg, const PreparedData& data,
                         const RegulariserSpec& reg, std::size_t batch_size, const MlpParams& init) {
  cfg.validate();
  if (data.train.size() != cfg.train_count) {
    throw ConfigError("training set holds " + std::to_string(data.train.size()) + " items, config wants " +
                      std::to_string(cfg.train_count));
  }
  const BatchPlan plan = make_batches(cfg.train_count, batch_size);
  const std::span<const std::uint8_t> labels(data.train.labels);

  LearningCurve curve{reg.name(), batch_size, cfg.master_seed, {}, params_hash(init)};
  curve.errors.reserve(cfg.epochs);

  MlpParams params = init;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t b = 0; b < plan.batches.size(); ++b) {
      const BatchRange range = plan.batches[b];
      const Matrix x = data.train.images.columns(range.begin, range.end);
      BatchNoise noise = batch_noise(cfg.master_seed, reg, batch_size, epoch, b);
      const ForwardTrace trace = forward(params, x, reg, Mode::kTrain, &noise);
      const Gradients grads = backward(trace, labels.subspan(range.begin, range.size()), params);
      params = sgd_step(params, grads, cfg.learning_rate);
    }
    curve.errors.push_back(evaluate(params, data.test, reg));
  }
  return curve;
}

std::vector<LearningCurve> run_grid(const ExperimentConfig& cfg, const PreparedData& data) {
  cfg.validate();
  const MlpParams init = shared_init(cfg.master_seed, {data.train.images.rows(), kMnistShape.hidden,
                                                       kNumClasses});
  std::vector<std::pair<RegulariserSpec, std::size_t>> runs;
  for (const auto& reg : cfg.regularisers) {
    for (std::size_t bs : cfg.batch_sizes) runs.emplace_back(reg, bs);
  }
  std::vector<LearningCurve> curves(runs.size());
  run_parallel(runs.size(), cfg.jobs, [&](std::size_t i) {
    curves[i] = run_single(cfg, data, runs[i].first, runs[i].second, init);
  });
  return curves;
}

std::vector<LearningCurve> run_grid_seeds(const ExperimentConfig& cfg, const PreparedData& data,
                                          std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  std::vector<LearningCurve> all;
  for (std::uint64_t seed : seeds) {
    ExperimentConfig per_seed = cfg;
    per_seed.master_seed = seed;
    auto curves = run_grid(per_seed, data);
    all.insert(all.end(), std::make_move_iterator(curves.begin()), std::make_move_iterator(curves.end()));
  }
  return all;
}

std::vector<AggregateRow> run_seeds(const ExperimentConfig& cfg, const PreparedData& data,
                                    std::span<const std::uint64_t> seeds) {
  const auto curves = run_grid_seeds(cfg, data, seeds);
  return aggregate(curves);
}

std::size_t epochs_to_threshold(const LearningCurve& curve, double band) {
  if (curve.errors.empty()) throw ConfigError("epochs_to_threshold: empty curve");
  const double target = curve.final_error();
  for (std::size_t i = 0; i < curve.errors.size(); ++i) {
    // Errors are multiples of 1/N; the slack keeps an exact 2-point gap inside
    // the band despite rounding.
    if (std::abs(curve.errors[i] - target) <= band + 1e-12) return i + 1;
  }
  return curve.errors.size();
}

double median(std::vector<double> values) {
  if (values.empty()) throw ConfigError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<AggregateRow> aggregate(std::span<const LearningCurve> curves, double band) {
  std::map<std::pair<std::string, std::size_t>, std::pair<std::vector<double>, std::vector<double>>> cells;
  for (const auto& c : curves) {
    auto& [finals, etts] = cells[{c.regulariser, c.batch_size}];
    finals.push_back(c.final_error());
    etts.push_back(static_cast<double>(epochs_to_threshold(c, band)));
  }
  std::vector<AggregateRow> rows;
  for (auto& [key, cell] : cells) {
    rows.push_back({key.first, key.second, cell.first.size(), median(cell.first), median(cell.second)});
  }
  return rows;
}

}  // namespace ditherlab
