#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <variant>
#include <vector>

#include "biomatch/metric.hpp"

namespace biomatch::nn {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

enum class ActivationKind : std::uint8_t {
  kSign = 0,
  kThreshold = 1,
  kSigmoid = 2,
  kReLU = 3,
  kSoftmax = 4,
};

/// h(x) = x^T W + b, with W of shape in x out.
struct LinearLayer {
  Matrix weights;
  std::vector<double> bias;

  friend bool operator==(const LinearLayer&, const LinearLayer&) = default;
};

/// Element-wise activation, or softmax over the whole vector.
struct ActivationLayer {
  ActivationKind kind = ActivationKind::kReLU;
  std::size_t dim = 0;

  friend bool operator==(const ActivationLayer&, const ActivationLayer&) = default;
};

/// Zero-padded convolution of a rows x cols input (flattened row-major) with
/// `filter`; output keeps the input shape.
struct Conv2DLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Matrix filter;

  friend bool operator==(const Conv2DLayer&, const Conv2DLayer&) = default;
};

/// Non-overlapping window pooling; trailing partial windows are dropped.
struct Pool2DLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t window_rows = 1;
  std::size_t window_cols = 1;

  friend bool operator==(const Pool2DLayer&, const Pool2DLayer&) = default;
};

struct MaxPool2DLayer : Pool2DLayer {};
struct AvgPool2DLayer : Pool2DLayer {};

using Layer =
    std::variant<LinearLayer, ActivationLayer, Conv2DLayer, MaxPool2DLayer, AvgPool2DLayer>;

std::size_t input_dim(const Layer& layer);
std::size_t output_dim(const Layer& layer);

class NeuralNetwork {
 public:
  NeuralNetwork() = default;
  /// Validates that consecutive layer dimensions chain and weights are finite.
  explicit NeuralNetwork(std::vector<Layer> layers, std::uint64_t seed = 0);

  /// Fully connected network with widths[0] inputs. Every hidden Linear is
  /// followed by `hidden` activation; the last Linear gets a softmax head
  /// when `softmax_head` is set. Weights ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)],
  /// biases zero.
  static NeuralNetwork mlp(std::span<const std::size_t> widths, ActivationKind hidden,
                           bool softmax_head, std::uint64_t seed);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::uint64_t seed() const { return seed_; }
  const std::vector<Layer>& layers() const { return layers_; }
  bool empty() const { return layers_.empty(); }

  friend bool operator==(const NeuralNetwork&, const NeuralNetwork&) = default;

 private:
  std::vector<Layer> layers_;
  std::uint64_t seed_ = 0;
};

/// A fresh Linear layer initialised from `rng_seed` with the default scheme.
LinearLayer make_linear(std::size_t in, std::size_t out, std::uint64_t rng_seed);

double activation(ActivationKind kind, double x);
std::vector<double> relu(std::span<const double> x);
/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> x);

Matrix conv2d(const Matrix& filter, const Matrix& x);
Matrix maxpool2d(std::size_t window_rows, std::size_t window_cols, const Matrix& x);
Matrix avgpool2d(std::size_t window_rows, std::size_t window_cols, const Matrix& x);

std::vector<double> apply_layer(const Layer& layer, std::span<const double> x);
std::vector<double> forward(const NeuralNetwork& net, std::span<const double> x);

enum class Loss : std::uint8_t { kSquaredError, kCrossEntropy, kZeroOne };

/// One training example. Squared error regresses onto `target` when it is
/// non-empty, otherwise onto the one-hot encoding of `label`.
struct LabeledSample {
  std::vector<double> input;
  std::size_t label = 0;
  std::vector<double> target;
};

struct LayerGradient {
  std::vector<double> weights;
  std::vector<double> bias;
};

/// Same layout as the network: one entry per layer, empty for layers
/// without parameters.
struct Gradients {
  std::vector<LayerGradient> layers;
};

double sample_loss(const NeuralNetwork& net, const LabeledSample& sample, Loss loss);
double mean_loss(const NeuralNetwork& net, std::span<const LabeledSample> batch, Loss loss);

/// d(mean batch loss)/dw for every weight and bias.
Gradients backprop_gradients(const NeuralNetwork& net, std::span<const LabeledSample> batch,
                             Loss loss);

/// Flat parameter view: per layer, weights row-major then bias.
std::vector<double> flatten_parameters(const NeuralNetwork& net);
std::vector<double> flatten(const Gradients& grads);
NeuralNetwork with_parameters(const NeuralNetwork& net, std::span<const double> params);

/// w - alpha * g, element-wise.
std::vector<double> gradient_descent_step(std::span<const double> weights,
                                          std::span<const double> gradients, double alpha);
NeuralNetwork gradient_descent_step(const NeuralNetwork& net, const Gradients& grads,
                                    double alpha);

struct TrainingConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 100;
  Loss loss = Loss::kCrossEntropy;
  std::uint64_t seed = 0;
};

struct TrainResult {
  NeuralNetwork network;
  /// Mean loss before each epoch, plus the loss after the final step
  /// (epochs + 1 entries).
  std::vector<double> epoch_loss;
};

/// Full-batch gradient descent on the empirical risk. Aborts with
/// DivergenceDetected once the loss is non-finite or above 1e12.
TrainResult train(NeuralNetwork net, std::span<const LabeledSample> data,
                  const TrainingConfig& config);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);
/// Fraction of samples whose argmax prediction differs from the label.
double empirical_error(const NeuralNetwork& net, std::span<const LabeledSample> data);

/// Width of the representation embed() produces: the output of the last
/// layer that is not a trailing softmax.
std::size_t embedding_dim(const NeuralNetwork& net);
/// Forward pass without a trailing softmax head. Hamming spaces binarise each
/// coordinate with 1[v > 0]; Levenshtein spaces cannot be embedded into.
MetricPoint embed(const NeuralNetwork& net, std::span<const double> x,
                  const SpaceDescriptor& space);

}  // namespace biomatch::nn
