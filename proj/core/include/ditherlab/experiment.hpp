#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ditherlab/dataset.hpp"
#include "ditherlab/network.hpp"
#include "ditherlab/regularise.hpp"

namespace ditherlab {

// A run "has converged" at the first epoch whose test error is within this
// many fractional points (0.02 == 2 percentage points) of its final error.
inline constexpr double kConvergenceBand = 0.02;

struct ExperimentConfig {
  std::uint64_t master_seed = 1;
  std::size_t train_count = 256;
  std::size_t epochs = 100;
  double learning_rate = 1.0;
  std::vector<std::size_t> batch_sizes{32, 64, 128, 256};
  std::vector<RegulariserSpec> regularisers{RegulariserSpec::none(), RegulariserSpec::dropout(0.5),
                                            RegulariserSpec::dither(0.5)};
  std::filesystem::path data_dir = "data/mnist";
  std::filesystem::path out_dir = "out";
  // Worker threads for grid runs; 0 means one per hardware thread.
  unsigned jobs = 0;

  // Throws ConfigError on epochs == 0, lr <= 0, empty lists or a batch size
  // that does not divide train_count.
  void validate() const;
};

/// Test error after each epoch of one (regulariser, batch size, seed) run.
struct LearningCurve {
  std::string regulariser;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  std::vector<double> errors;  // errors[e - 1] is the error after epoch e
  std::uint64_t init_hash = 0;

  double final_error() const { return errors.back(); }
  friend bool operator==(const LearningCurve&, const LearningCurve&) = default;
};

struct AggregateRow {
  std::string regulariser;
  std::size_t batch_size = 0;
  std::size_t runs = 0;
  double median_final_error = 0.0;
  double median_epochs_to_threshold = 0.0;
};

// The single draw of starting weights every run of a seed is cloned from.
MlpParams shared_init(std::uint64_t master_seed, MlpShape shape = kMnistShape);

// Streams for one training batch, keyed by run, epoch and batch index.
BatchNoise batch_noise(std::uint64_t master_seed, const RegulariserSpec& reg, std::size_t batch_size,
                       std::size_t epoch, std::size_t batch_index);

LearningCurve run_single(const ExperimentConfig& cfg, const PreparedData& data,
                         const RegulariserSpec& reg, std::size_t batch_size, const MlpParams& init);

// Every (regulariser, batch size) pair for cfg.master_seed, from one shared
// init. Curves come back in regulariser-major order of the config lists no
// matter how many worker threads ran them.
std::vector<LearningCurve> run_grid(const ExperimentConfig& cfg, const PreparedData& data);

// run_grid for each seed in turn, concatenated. Throws ConfigError when
// `seeds` is empty.
std::vector<LearningCurve> run_grid_seeds(const ExperimentConfig& cfg, const PreparedData& data,
                                          std::span<const std::uint64_t> seeds);

std::vector<AggregateRow> run_seeds(const ExperimentConfig& cfg, const PreparedData& data,
                                    std::span<const std::uint64_t> seeds);

// Medians per (regulariser, batch size), sorted by that key.
std::vector<AggregateRow> aggregate(std::span<const LearningCurve> curves,
                                    double band = kConvergenceBand);

std::size_t epochs_to_threshold(const LearningCurve& curve, double band = kConvergenceBand);

// Middle element, or mean of the middle two. Throws ConfigError when empty.
double median(std::vector<double> values);

}  // namespace ditherlab
