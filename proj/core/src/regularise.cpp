#include "ditherlab/regularise.hpp"

#include "ditherlab/error.hpp"

namespace ditherlab {

RegulariserSpec RegulariserSpec::dropout(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
  return {Kind::kDropout, rate, 0.0};
}

RegulariserSpec RegulariserSpec::dither(double halfwidth) {
  if (!(halfwidth > 0.0)) throw ConfigError("dither half-width must be positive");
  return {Kind::kDither, 0.0, halfwidth};
}

RegulariserSpec RegulariserSpec::parse(std::string_view name, double dither_width) {
  if (name == "none") return none();
  if (name == "dropout") return dropout(0.5);
  if (name == "dither") return dither(dither_width / 2.0);
  throw ConfigError("unknown regulariser '" + std::string(name) + "' (expected none|dropout|dither)");
}

std::string RegulariserSpec::name() const {
  switch (kind) {
    case Kind::kNone:
      return "none";
    case Kind::kDropout:
      return "dropout";
    case Kind::kDither:
      return "dither";
  }
  return "unknown";
}

Matrix apply_input(const RegulariserSpec& spec, const Matrix& batch, Mode mode, RngStream& stream) {
  if (spec.kind != RegulariserSpec::Kind::kDither || mode != Mode::kTrain) return batch;
  const double hw = spec.dither_halfwidth;
  Matrix out = batch;
  for (double& v : out.values()) v += stream.next_uniform(-hw, hw);
  return out;
}

HiddenOutput apply_hidden(const RegulariserSpec& spec, const Matrix& hidden, Mode mode,
                          RngStream& stream) {
  if (spec.kind != RegulariserSpec::Kind::kDropout) return {hidden, std::nullopt};
  const double keep = 1.0 - spec.dropout_rate;
  if (mode == Mode::kTest) return {scale(hidden, keep), std::nullopt};

  Matrix mask(hidden.rows(), hidden.cols());
  for (double& m : mask.values()) m = stream.next_unit() < keep ? 1.0 : 0.0;
  Matrix out = hadamard(hidden, mask);
  return {std::move(out), std::move(mask)};
}

}  // namespace ditherlab
