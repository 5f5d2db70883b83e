#include "ditherlab/prng.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "ditherlab/error.hpp"

namespace ditherlab {
namespace {

std::uint64_t feed_u64(std::uint64_t state, std::uint64_t value) {
  std::array<std::uint8_t, 8> bytes{};
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<std::uint8_t>(value >> (8 * i));
  return fnv1a64(bytes, state);
}

std::uint64_t feed_tag(std::uint64_t state, char tag) {
  const std::uint8_t byte = static_cast<std::uint8_t>(tag);
  return fnv1a64(std::span<const std::uint8_t>(&byte, 1), state);
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state) {
  for (std::uint8_t b : bytes) {
    state ^= b;
    state *= kFnvPrime;
  }
  return state;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t state) {
  return fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), state);
}

std::uint64_t hash_labels(std::span<const StreamLabel> labels) {
  std::uint64_t h = kFnvOffsetBasis;
  for (const auto& label : labels) {
    if (const auto* name = std::get_if<std::string>(&label)) {
      h = feed_tag(h, 's');
      h = feed_u64(h, name->size());
      h = fnv1a64(*name, h);
    } else {
      h = feed_tag(h, 'i');
      h = feed_u64(h, std::get<std::uint64_t>(label));
    }
  }
  return h;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
    : seed_(master_seed), stream_id_(stream_id), key_(mix64(mix64(master_seed) ^ stream_id)) {}

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGoldenGamma);
}

double RngStream::next_unit() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_uniform(double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("next_uniform: requires lo < hi");
  const double v = lo + (hi - lo) * next_unit();
  // Rounding of lo + width * u can land exactly on hi.
  return v < hi ? v : std::nextafter(hi, lo);
}

double RngStream::next_gaussian(double mean, double stddev) {
  if (!(stddev >= 0.0)) throw ConfigError("next_gaussian: stddev must be >= 0");
  const double u1 = 1.0 - next_unit();  // (0, 1]
  const double u2 = next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * (radius * std::cos(2.0 * std::numbers::pi * u2));
}

RngStream derive_stream(std::uint64_t master_seed, std::span<const StreamLabel> labels) {
  return RngStream(master_seed, hash_labels(labels));
}

RngStream derive_stream(std::uint64_t master_seed, std::initializer_list<StreamLabel> labels) {
  return derive_stream(master_seed, std::span<const StreamLabel>(labels.begin(), labels.size()));
}

}  // namespace ditherlab
