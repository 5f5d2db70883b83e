#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "ditherlab/dataset.hpp"
#include "ditherlab/linalg.hpp"
#include "ditherlab/prng.hpp"
#include "ditherlab/regularise.hpp"

namespace ditherlab {

struct MlpShape {
  std::size_t inputs = 784;
  std::size_t hidden = 100;
  std::size_t outputs = 10;
  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

inline constexpr MlpShape kMnistShape{784, 100, 10};
inline constexpr double kInitStddev = 0.01;

/// Weights and biases of a one-hidden-layer perceptron. Copying is a deep
/// clone, which is how every training condition gets the same start point.
struct MlpParams {
  Matrix w1;  // hidden x inputs
  Matrix b1;  // hidden x 1
  Matrix w2;  // outputs x hidden
  Matrix b2;  // outputs x 1

  MlpShape shape() const { return {w1.cols(), w1.rows(), w2.rows()}; }
  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

struct Gradients {
  Matrix gw1;
  Matrix gb1;
  Matrix gw2;
  Matrix gb2;
};

/// Everything backward() needs from one forward pass.
struct ForwardTrace {
  Mode mode = Mode::kTest;
  Matrix input;  // after the input regulariser
  Matrix z1;
  Matrix h1;  // after the hidden regulariser
  std::optional<Matrix> dropout_mask;
  Matrix z2;
  Matrix probs;
};

/// Noise sources for one training batch.
struct BatchNoise {
  RngStream input;
  RngStream hidden;
};

// Weights ~ N(0, stddev^2) drawn w1 then w2 in row-major order; biases zero.
MlpParams init_params(RngStream& stream, MlpShape shape = kMnistShape, double stddev = kInitStddev);

// FNV-1a 64 over the shape and the little-endian bit patterns of w1, b1, w2, b2.
std::uint64_t params_hash(const MlpParams& params);

// Zero-centred logistic: 1 / (1 + e^-z) - 1/2.
double biased_sigmoid(double z);
// Derivative of the above, which equals that of the plain logistic.
double biased_sigmoid_grad(double z);
Matrix biased_sigmoid(const Matrix& z);

// Column-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

// Mean over columns of -log p(true class), with p clamped at 1e-300.
double cross_entropy(const Matrix& probs, std::span<const std::uint8_t> labels);

// Lowest index wins ties.
std::size_t argmax_column(const Matrix& m, std::size_t col);

// `noise` may be null in Test mode or when the regulariser draws nothing.
ForwardTrace forward(const MlpParams& params, const Matrix& batch, const RegulariserSpec& reg,
                     Mode mode, BatchNoise* noise = nullptr);

// Exact gradients of the mean cross-entropy for a Train-mode trace.
Gradients backward(const ForwardTrace& trace, std::span<const std::uint8_t> labels,
                   const MlpParams& params);

// theta <- theta - lr * g. Throws ConfigError unless lr > 0.
MlpParams sgd_step(const MlpParams& params, const Gradients& grads, double lr);

namespace detail {
MlpParams apply_update(const MlpParams& params, const Gradients& grads, double lr);
}

// Misclassification rate in Test mode. Uses the compressed copy of the
// images when present.
double evaluate(const MlpParams& params, const Dataset& data, const RegulariserSpec& reg);

// Same, always through the dense matmul path.
double evaluate_dense(const MlpParams& params, const Dataset& data, const RegulariserSpec& reg);

// Test-mode mean cross-entropy over a whole dataset.
double dataset_loss(const MlpParams& params, const Dataset& data, const RegulariserSpec& reg);

}  // namespace ditherlab
