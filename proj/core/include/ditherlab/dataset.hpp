#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ditherlab/linalg.hpp"

namespace ditherlab {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
inline constexpr std::size_t kNumClasses = 10;

inline constexpr const char* kTrainImagesFile = "train-images-idx3-ubyte";
inline constexpr const char* kTrainLabelsFile = "train-labels-idx1-ubyte";
inline constexpr const char* kTestImagesFile = "t10k-images-idx3-ubyte";
inline constexpr const char* kTestLabelsFile = "t10k-labels-idx1-ubyte";

/// Images as stored on disk: `count` items of rows*cols bytes, row-major.
struct RawImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;

  std::size_t pixels_per_image() const noexcept { return rows * cols; }
  std::span<const std::uint8_t> image(std::size_t i) const {
    return std::span(pixels).subspan(i * pixels_per_image(), pixels_per_image());
  }
};

struct RawMnist {
  RawImages images;
  std::vector<std::uint8_t> labels;
};

/// Normalised images (features x count) with their class labels.
struct Dataset {
  Matrix images;
  std::vector<std::uint8_t> labels;
  double mean_offset = 0.0;
  // Same pixels, compressed around the value byte 0 maps to. Used for
  // evaluation over the full test set.
  CompressedColumns compressed;

  std::size_t size() const noexcept { return labels.size(); }
};

struct BatchRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const BatchRange&, const BatchRange&) = default;
};

struct BatchPlan {
  std::size_t batch_size = 0;
  std::vector<BatchRange> batches;
};

// Throw FormatError on bad magic, truncated payload or trailing bytes.
RawImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize_idx_images(const RawImages& images);
std::vector<std::uint8_t> serialize_idx_labels(std::span<const std::uint8_t> labels);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// Reads the canonical train or test pair from `dir`. Errors name the file.
RawMnist load_mnist_split(const std::filesystem::path& dir, bool train);

// Grand mean of byte/255 over the first n images, all pixels pooled.
double mean_of_training_subset(const RawMnist& raw, std::size_t n);

// Maps every pixel to byte/255 - subset_mean. Keeps the first `count`
// items (all of them when count is 0).
Dataset normalize(const RawMnist& raw, double subset_mean, std::size_t count = 0);

BatchPlan make_batches(std::size_t n, std::size_t batch_size);

// 28 lines of 28 glyphs; values are read as intensities in [0, 1] and clamped.
std::string render_ascii(std::span<const double> image);

/// Training subset and full test set sharing one normalisation offset.
struct PreparedData {
  Dataset train;
  Dataset test;
};

PreparedData prepare_data(const RawMnist& train, const RawMnist& test, std::size_t train_count);
PreparedData load_prepared(const std::filesystem::path& dir, std::size_t train_count);

}  // namespace ditherlab
