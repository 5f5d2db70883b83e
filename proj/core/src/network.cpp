#include "ditherlab/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "ditherlab/error.hpp"

namespace ditherlab {
namespace {

constexpr double kLogClamp = 1e-300;

std::uint64_t hash_u64(std::uint64_t state, std::uint64_t v) {
  std::uint8_t bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return fnv1a64(bytes, state);
}

std::uint64_t hash_matrix(std::uint64_t state, const Matrix& m) {
  for (double v : m.values()) state = hash_u64(state, std::bit_cast<std::uint64_t>(v));
  return state;
}

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()));
  }
}

void check_params(const MlpParams& p) {
  const auto s = p.shape();
  check_shape(p.b1, s.hidden, 1, "b1");
  check_shape(p.w2, s.outputs, s.hidden, "w2");
  check_shape(p.b2, s.outputs, 1, "b2");
}

void check_labels(std::span<const std::uint8_t> labels, std::size_t classes, std::size_t batch) {
  if (labels.size() != batch) {
    throw ConfigError("expected " + std::to_string(batch) + " labels, got " +
                      std::to_string(labels.size()));
  }
  for (auto y : labels) {
    if (y >= classes) throw ConfigError("label " + std::to_string(y) + " out of range");
  }
}

double error_rate(const Matrix& probs, std::span<const std::uint8_t> labels) {
  std::size_t wrong = 0;
  for (std::size_t c = 0; c < probs.cols(); ++c) {
    if (argmax_column(probs, c) != labels[c]) ++wrong;
  }
  return probs.cols() == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(probs.cols());
}

// Hidden pre-activation -> class probabilities in Test mode.
Matrix test_head(const MlpParams& params, const Matrix& w1x, const RegulariserSpec& reg) {
  RngStream idle(0, 0);
  const Matrix h = biased_sigmoid(broadcast_add_col(w1x, params.b1));
  const Matrix h_reg = apply_hidden(reg, h, Mode::kTest, idle).activations;
  return softmax(broadcast_add_col(matmul(params.w2, h_reg), params.b2));
}

}  // namespace

MlpParams init_params(RngStream& stream, MlpShape shape, double stddev) {
  MlpParams p{Matrix(shape.hidden, shape.inputs), Matrix(shape.hidden, 1),
              Matrix(shape.outputs, shape.hidden), Matrix(shape.outputs, 1)};
  for (double& v : p.w1.values()) v = stream.next_gaussian(0.0, stddev);
  for (double& v : p.w2.values()) v = stream.next_gaussian(0.0, stddev);
  return p;
}

std::uint64_t params_hash(const MlpParams& params) {
  const auto s = params.shape();
  std::uint64_t h = kFnvOffsetBasis;
  h = hash_u64(h, s.inputs);
  h = hash_u64(h, s.hidden);
  h = hash_u64(h, s.outputs);
  h = hash_matrix(h, params.w1);
  h = hash_matrix(h, params.b1);
  h = hash_matrix(h, params.w2);
  return hash_matrix(h, params.b2);
}

// sigma(z) - 1/2 == tanh(z/2) / 2, which keeps full precision near zero and
// is exactly odd.
double biased_sigmoid(double z) { return 0.5 * std::tanh(0.5 * z); }

double biased_sigmoid_grad(double z) {
  const double f = biased_sigmoid(z);
  return 0.25 - f * f;
}

Matrix biased_sigmoid(const Matrix& z) {
  Matrix out = z;
  for (double& v : out.values()) v = biased_sigmoid(v);
  return out;
}

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t c = 0; c < logits.cols(); ++c) {
    double peak = logits(0, c);
    for (std::size_t r = 1; r < logits.rows(); ++r) peak = std::max(peak, logits(r, c));
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
      const double e = std::exp(logits(r, c) - peak);
      out(r, c) = e;
      total += e;
    }
    for (std::size_t r = 0; r < logits.rows(); ++r) out(r, c) /= total;
  }
  return out;
}

double cross_entropy(const Matrix& probs, std::span<const std::uint8_t> labels) {
  check_labels(labels, probs.rows(), probs.cols());
  if (probs.cols() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t c = 0; c < probs.cols(); ++c) {
    total -= std::log(std::max(probs(labels[c], c), kLogClamp));
  }
  return total / static_cast<double>(probs.cols());
}

std::size_t argmax_column(const Matrix& m, std::size_t col) {
  std::size_t best = 0;
  for (std::size_t r = 1; r < m.rows(); ++r) {
    if (m(r, col) > m(best, col)) best = r;
  }
  return best;
}

ForwardTrace forward(const MlpParams& params, const Matrix& batch, const RegulariserSpec& reg,
                     Mode mode, BatchNoise* noise) {
  check_params(params);
  if (batch.rows() != params.w1.cols()) {
    throw ConfigError("forward: batch has " + std::to_string(batch.rows()) + " features, network expects " +
                      std::to_string(params.w1.cols()));
  }
  const bool draws = mode == Mode::kTrain && reg.kind != RegulariserSpec::Kind::kNone;
  if (draws && noise == nullptr) throw ConfigError("forward: training with " + reg.name() + " needs noise streams");

  RngStream idle(0, 0);
  RngStream& input_stream = noise ? noise->input : idle;
  RngStream& hidden_stream = noise ? noise->hidden : idle;

  ForwardTrace t;
  t.mode = mode;
  t.input = apply_input(reg, batch, mode, input_stream);
  t.z1 = broadcast_add_col(matmul(params.w1, t.input), params.b1);
  auto hidden = apply_hidden(reg, biased_sigmoid(t.z1), mode, hidden_stream);
  t.h1 = std::move(hidden.activations);
  t.dropout_mask = std::move(hidden.mask);
  t.z2 = broadcast_add_col(matmul(params.w2, t.h1), params.b2);
  t.probs = softmax(t.z2);
  return t;
}

Gradients backward(const ForwardTrace& trace, std::span<const std::uint8_t> labels,
                   const MlpParams& params) {
  check_params(params);
  if (trace.mode != Mode::kTrain) throw ConfigError("backward: trace was not produced in Train mode");
  if (trace.probs.empty() || trace.z1.empty() || trace.h1.empty() || trace.input.empty()) {
    throw ConfigError("backward: incomplete forward trace");
  }
  const std::size_t batch = trace.probs.cols();
  check_labels(labels, trace.probs.rows(), batch);

  Matrix dz2 = trace.probs;
  for (std::size_t c = 0; c < batch; ++c) dz2(labels[c], c) -= 1.0;
  dz2 = scale(dz2, 1.0 / static_cast<double>(batch));

  Gradients g;
  g.gw2 = matmul_transposed_rhs(dz2, trace.h1);
  g.gb2 = row_sum(dz2);

  Matrix dh1 = matmul_transposed_lhs(params.w2, dz2);
  if (trace.dropout_mask) dh1 = hadamard(dh1, *trace.dropout_mask);
  Matrix dz1 = std::move(dh1);
  auto z1 = trace.z1.values();
  auto d = dz1.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= biased_sigmoid_grad(z1[i]);

  g.gw1 = matmul_transposed_rhs(dz1, trace.input);
  g.gb1 = row_sum(dz1);
  return g;
}

namespace detail {
MlpParams apply_update(const MlpParams& params, const Gradients& grads, double lr) {
  return {sub(params.w1, scale(grads.gw1, lr)), sub(params.b1, scale(grads.gb1, lr)),
          sub(params.w2, scale(grads.gw2, lr)), sub(params.b2, scale(grads.gb2, lr))};
}
}  // namespace detail

MlpParams sgd_step(const MlpParams& params, const Gradients& grads, double lr) {
  if (!(lr > 0.0)) throw ConfigError("sgd_step: learning rate must be positive");
  return detail::apply_update(params, grads, lr);
}

double evaluate(const MlpParams& params, const Dataset& data, const RegulariserSpec& reg) {
  check_params(params);
  if (data.compressed.cols() != data.size() || data.compressed.rows() != params.w1.cols()) {
    return evaluate_dense(params, data, reg);
  }
  return error_rate(test_head(params, matmul(params.w1, data.compressed), reg), data.labels);
}

double evaluate_dense(const MlpParams& params, const Dataset& data, const RegulariserSpec& reg) {
  check_params(params);
  return error_rate(test_head(params, matmul(params.w1, data.images), reg), data.labels);
}

double dataset_loss(const MlpParams& params, const Dataset& data, const RegulariserSpec& reg) {
  return cross_entropy(forward(params, data.images, reg, Mode::kTest).probs, data.labels);
}

}  // namespace ditherlab
