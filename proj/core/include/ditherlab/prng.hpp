#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ditherlab {

/// One component of a stream key: either a name ("dither") or an index
/// (epoch, batch, batch size).
using StreamLabel = std::variant<std::string, std::uint64_t>;

// Constants below are part of the on-disk contract: golden files pin output
// produced with them, so changing any of them is a breaking change.
inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x00000100000001b3ULL;
inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// FNV-1a 64 over raw bytes, continuing from `state`.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state = kFnvOffsetBasis);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t state = kFnvOffsetBasis);

/// SplitMix64 finaliser (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Hash of a label sequence. Each label is encoded as a tag byte followed by
/// its payload: 's', u64 little-endian length, bytes for names; 'i', u64
/// little-endian value for indices. The encoding is fed through FNV-1a 64.
std::uint64_t hash_labels(std::span<const StreamLabel> labels);

/// Counter-based random stream.
///
/// Draw n (0-based) is mix64(key + (n + 1) * kGoldenGamma), where
/// key = mix64(mix64(master_seed) ^ hash_labels(labels)). Two streams with the
/// same seed and labels produce the same sequence on every platform; the
/// output never depends on which thread or in which order streams are used.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t key() const noexcept { return key_; }
  // Number of 64-bit draws consumed so far.
  std::uint64_t draws() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() noexcept;
  // Uniform in [lo, hi); throws ConfigError unless lo < hi.
  double next_uniform(double lo, double hi);
  // Box-Muller on two unit draws; consumes exactly two draws.
  // Throws ConfigError when stddev < 0.
  double next_gaussian(double mean, double stddev);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

RngStream derive_stream(std::uint64_t master_seed, std::span<const StreamLabel> labels);
RngStream derive_stream(std::uint64_t master_seed, std::initializer_list<StreamLabel> labels);

}  // namespace ditherlab
