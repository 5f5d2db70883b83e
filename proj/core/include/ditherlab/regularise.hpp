#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ditherlab/linalg.hpp"
#include "ditherlab/prng.hpp"

namespace ditherlab {

enum class Mode { kTrain, kTest };

/// One of the three training conditions.
///
/// Dropout zeroes hidden units with probability `dropout_rate` during training
/// and scales hidden activations by the keep probability at test time. Dither
/// adds iid uniform noise on [-halfwidth, halfwidth) to input pixels during
/// training only.
struct RegulariserSpec {
  enum class Kind { kNone, kDropout, kDither };

  Kind kind = Kind::kNone;
  double dropout_rate = 0.0;
  double dither_halfwidth = 0.0;

  static RegulariserSpec none() { return {}; }
  // Throws ConfigError unless rate is in [0, 1).
  static RegulariserSpec dropout(double rate = 0.5);
  // Throws ConfigError unless halfwidth > 0.
  static RegulariserSpec dither(double halfwidth = 0.5);
  // Accepts "none", "dropout", "dither"; dither uses the given total width.
  static RegulariserSpec parse(std::string_view name, double dither_width = 1.0);

  // "none", "dropout" or "dither".
  std::string name() const;

  friend bool operator==(const RegulariserSpec&, const RegulariserSpec&) = default;
};

struct HiddenOutput {
  Matrix activations;
  std::optional<Matrix> mask;
};

// Dither + Train adds noise drawn from `stream`; everything else is identity
// and draws nothing.
Matrix apply_input(const RegulariserSpec& spec, const Matrix& batch, Mode mode, RngStream& stream);

// Dropout + Train multiplies by a {0,1} keep mask (returned for backprop);
// Dropout + Test scales by 1 - rate; other kinds are identity with no mask.
HiddenOutput apply_hidden(const RegulariserSpec& spec, const Matrix& hidden, Mode mode,
                          RngStream& stream);

}  // namespace ditherlab
