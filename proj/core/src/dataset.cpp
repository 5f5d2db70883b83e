#include "ditherlab/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "ditherlab/error.hpp"

namespace ditherlab {
namespace {

constexpr std::string_view kRamp = " .:-=+*#%@";
constexpr std::size_t kSide = 28;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

void check_magic(std::span<const std::uint8_t> bytes, std::size_t header, std::uint32_t want,
                 const char* what) {
  if (bytes.size() < header) {
    throw FormatError(std::string(what) + ": truncated header (" + std::to_string(bytes.size()) +
                      " bytes)");
  }
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != want) {
    throw FormatError(std::string(what) + ": bad magic " + hex32(magic) + ", expected " + hex32(want));
  }
}

}  // namespace

RawImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, 16, kIdxImageMagic, "IDX images");
  RawImages out;
  out.count = read_be32(bytes, 4);
  out.rows = read_be32(bytes, 8);
  out.cols = read_be32(bytes, 12);
  const std::size_t payload = out.count * out.rows * out.cols;
  if (bytes.size() - 16 != payload) {
    throw FormatError("IDX images: header promises " + std::to_string(payload) +
                      " pixel bytes, file has " + std::to_string(bytes.size() - 16));
  }
  out.pixels.assign(bytes.begin() + 16, bytes.end());
  return out;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, 8, kIdxLabelMagic, "IDX labels");
  const std::size_t count = read_be32(bytes, 4);
  if (bytes.size() - 8 != count) {
    throw FormatError("IDX labels: header promises " + std::to_string(count) +
                      " labels, file has " + std::to_string(bytes.size() - 8));
  }
  std::vector<std::uint8_t> labels(bytes.begin() + 8, bytes.end());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= kNumClasses) {
      throw FormatError("IDX labels: label " + std::to_string(labels[i]) + " at index " +
                        std::to_string(i) + " is not a digit");
    }
  }
  return labels;
}

std::vector<std::uint8_t> serialize_idx_images(const RawImages& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kIdxImageMagic);
  write_be32(out, static_cast<std::uint32_t>(images.count));
  write_be32(out, static_cast<std::uint32_t>(images.rows));
  write_be32(out, static_cast<std::uint32_t>(images.cols));
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  return bytes;
}

RawMnist load_mnist_split(const std::filesystem::path& dir, bool train) {
  const auto images_path = dir / (train ? kTrainImagesFile : kTestImagesFile);
  const auto labels_path = dir / (train ? kTrainLabelsFile : kTestLabelsFile);
  RawMnist raw;
  try {
    raw.images = parse_idx_images(read_file(images_path));
  } catch (const FormatError& e) {
    throw FormatError(images_path.string() + ": " + e.what());
  }
  try {
    raw.labels = parse_idx_labels(read_file(labels_path));
  } catch (const FormatError& e) {
    throw FormatError(labels_path.string() + ": " + e.what());
  }
  if (raw.images.count != raw.labels.size()) {
    throw FormatError(images_path.string() + " has " + std::to_string(raw.images.count) +
                      " images but " + labels_path.string() + " has " +
                      std::to_string(raw.labels.size()) + " labels");
  }
  return raw;
}

double mean_of_training_subset(const RawMnist& raw, std::size_t n) {
  if (n == 0) throw ConfigError("mean_of_training_subset: n must be positive");
  if (n > raw.images.count) {
    throw ConfigError("mean_of_training_subset: n = " + std::to_string(n) + " exceeds " +
                      std::to_string(raw.images.count) + " images");
  }
  // Integer sum keeps the mean independent of summation order.
  std::uint64_t total = 0;
  const std::size_t len = n * raw.images.pixels_per_image();
  for (std::size_t i = 0; i < len; ++i) total += raw.images.pixels[i];
  return static_cast<double>(total) / (255.0 * static_cast<double>(len));
}

Dataset normalize(const RawMnist& raw, double subset_mean, std::size_t count) {
  const std::size_t n = count == 0 ? raw.images.count : count;
  if (n > raw.images.count || n > raw.labels.size()) {
    throw ConfigError("normalize: requested " + std::to_string(n) + " items, have " +
                      std::to_string(std::min(raw.images.count, raw.labels.size())));
  }
  const std::size_t features = raw.images.pixels_per_image();
  Dataset out;
  out.mean_offset = subset_mean;
  out.labels.assign(raw.labels.begin(), raw.labels.begin() + static_cast<std::ptrdiff_t>(n));
  out.images = Matrix(features, n);
  for (std::size_t item = 0; item < n; ++item) {
    const auto pixels = raw.images.image(item);
    for (std::size_t f = 0; f < features; ++f) {
      out.images(f, item) = static_cast<double>(pixels[f]) / 255.0 - subset_mean;
    }
  }
  out.compressed = CompressedColumns(out.images, 0.0 / 255.0 - subset_mean);
  return out;
}

BatchPlan make_batches(std::size_t n, std::size_t batch_size) {
  if (batch_size == 0 || n == 0 || n % batch_size != 0) {
    throw ConfigError("make_batches: batch size " + std::to_string(batch_size) +
                      " does not divide " + std::to_string(n) + " training items");
  }
  BatchPlan plan{batch_size, {}};
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    plan.batches.push_back({begin, begin + batch_size});
  }
  return plan;
}

std::string render_ascii(std::span<const double> image) {
  if (image.size() != kSide * kSide) {
    throw ConfigError("render_ascii: expected " + std::to_string(kSide * kSide) + " values, got " +
                      std::to_string(image.size()));
  }
  std::string out;
  out.reserve(kSide * (kSide + 1));
  for (std::size_t r = 0; r < kSide; ++r) {
    for (std::size_t c = 0; c < kSide; ++c) {
      const double v = std::clamp(image[r * kSide + c], 0.0, 1.0);
      const auto idx = static_cast<std::size_t>(v * static_cast<double>(kRamp.size() - 1) + 0.5);
      out.push_back(kRamp[idx]);
    }
    out.push_back('\n');
  }
  return out;
}

PreparedData prepare_data(const RawMnist& train, const RawMnist& test, std::size_t train_count) {
  const double mean = mean_of_training_subset(train, train_count);
  return {normalize(train, mean, train_count), normalize(test, mean)};
}

PreparedData load_prepared(const std::filesystem::path& dir, std::size_t train_count) {
  return prepare_data(load_mnist_split(dir, true), load_mnist_split(dir, false), train_count);
}

}  // namespace ditherlab
