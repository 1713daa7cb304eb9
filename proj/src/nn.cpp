#include "biomatch/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "biomatch/error.hpp"

namespace biomatch::nn {

namespace {

constexpr double kDivergenceLimit = 1e12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_window(std::size_t k, std::size_t l, std::size_t n, std::size_t m) {
  if (k == 0 || l == 0 || k > n || l > m) {
    throw Error(ErrorCode::kWindowTooLarge, "window " + std::to_string(k) + "x" +
                                                std::to_string(l) + " does not fit input " +
                                                std::to_string(n) + "x" + std::to_string(m));
  }
}

Matrix as_matrix(std::size_t rows, std::size_t cols, std::span<const double> x) {
  Matrix m(rows, cols);
  std::copy(x.begin(), x.end(), m.data.begin());
  return m;
}

void require_dim(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected input of dimension " + std::to_string(expected) + ", got " +
                    std::to_string(got));
  }
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double log_sum_exp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return m + std::log(sum);
}

bool has_softmax_head(const NeuralNetwork& net) {
  if (net.empty()) return false;
  const auto* act = std::get_if<ActivationLayer>(&net.layers().back());
  return act != nullptr && act->kind == ActivationKind::kSoftmax;
}

std::vector<double> squared_target(const LabeledSample& sample, std::size_t out_dim) {
  if (!sample.target.empty()) {
    if (sample.target.size() != out_dim) {
      throw Error(ErrorCode::kDimensionMismatch, "target dimension does not match network output");
    }
    return sample.target;
  }
  if (sample.label >= out_dim) {
    throw Error(ErrorCode::kInvalidArgument, "label exceeds class count");
  }
  std::vector<double> onehot(out_dim, 0.0);
  onehot[sample.label] = 1.0;
  return onehot;
}

// Forward pass keeping every layer input; acts[i] feeds layer i and
// acts.back() is the network output.
std::vector<std::vector<double>> forward_trace(const NeuralNetwork& net,
                                               std::span<const double> x) {
  require_dim(net.input_dim(), x.size());
  std::vector<std::vector<double>> acts;
  acts.reserve(net.layers().size() + 1);
  acts.emplace_back(x.begin(), x.end());
  for (const auto& layer : net.layers()) {
    acts.push_back(apply_layer(layer, acts.back()));
    if (!all_finite(acts.back())) {
      throw Error(ErrorCode::kNonFiniteActivation, "forward pass produced a non-finite value");
    }
  }
  return acts;
}

// Accumulates the parameter gradient of `layer` into `grad` and returns the
// gradient with respect to the layer input.
std::vector<double> backward_layer(const Layer& layer, std::span<const double> input,
                                   std::span<const double> output, std::span<const double> delta,
                                   LayerGradient& grad) {
  return std::visit(
      Overloaded{
          [&](const LinearLayer& l) {
            const std::size_t in = l.weights.rows;
            const std::size_t out = l.weights.cols;
            std::vector<double> dx(in, 0.0);
            for (std::size_t i = 0; i < in; ++i) {
              double acc = 0.0;
              for (std::size_t j = 0; j < out; ++j) {
                grad.weights[i * out + j] += input[i] * delta[j];
                acc += l.weights(i, j) * delta[j];
              }
              dx[i] = acc;
            }
            for (std::size_t j = 0; j < out; ++j) grad.bias[j] += delta[j];
            return dx;
          },
          [&](const ActivationLayer& a) {
            std::vector<double> dx(a.dim, 0.0);
            switch (a.kind) {
              case ActivationKind::kSign:
              case ActivationKind::kThreshold:
                break;  // zero almost everywhere
              case ActivationKind::kSigmoid:
                for (std::size_t i = 0; i < a.dim; ++i) {
                  dx[i] = delta[i] * output[i] * (1.0 - output[i]);
                }
                break;
              case ActivationKind::kReLU:
                for (std::size_t i = 0; i < a.dim; ++i) dx[i] = input[i] > 0.0 ? delta[i] : 0.0;
                break;
              case ActivationKind::kSoftmax: {
                double dot = 0.0;
                for (std::size_t i = 0; i < a.dim; ++i) dot += output[i] * delta[i];
                for (std::size_t i = 0; i < a.dim; ++i) dx[i] = output[i] * (delta[i] - dot);
                break;
              }
            }
            return dx;
          },
          [&](const Conv2DLayer& c) {
            const std::size_t k = c.filter.rows;
            const std::size_t l = c.filter.cols;
            std::vector<double> dx(c.rows * c.cols, 0.0);
            for (std::size_t i = 0; i < c.rows; ++i) {
              for (std::size_t j = 0; j < c.cols; ++j) {
                const double d = delta[i * c.cols + j];
                for (std::size_t u = 0; u < k && u < i; ++u) {
                  for (std::size_t v = 0; v < l && v < j; ++v) {
                    const std::size_t src = (i - u - 1) * c.cols + (j - v - 1);
                    grad.weights[u * l + v] += d * input[src];
                    dx[src] += d * c.filter(u, v);
                  }
                }
              }
            }
            return dx;
          },
          [&](const MaxPool2DLayer& p) {
            std::vector<double> dx(p.rows * p.cols, 0.0);
            const std::size_t out_cols = p.cols / p.window_cols;
            for (std::size_t oi = 0; oi < p.rows / p.window_rows; ++oi) {
              for (std::size_t oj = 0; oj < out_cols; ++oj) {
                std::size_t best = oi * p.window_rows * p.cols + oj * p.window_cols;
                for (std::size_t u = 0; u < p.window_rows; ++u) {
                  for (std::size_t v = 0; v < p.window_cols; ++v) {
                    const std::size_t idx =
                        (oi * p.window_rows + u) * p.cols + oj * p.window_cols + v;
                    if (input[idx] > input[best]) best = idx;
                  }
                }
                dx[best] += delta[oi * out_cols + oj];
              }
            }
            return dx;
          },
          [&](const AvgPool2DLayer& p) {
            std::vector<double> dx(p.rows * p.cols, 0.0);
            const std::size_t out_cols = p.cols / p.window_cols;
            const double scale = 1.0 / static_cast<double>(p.window_rows * p.window_cols);
            for (std::size_t oi = 0; oi < p.rows / p.window_rows; ++oi) {
              for (std::size_t oj = 0; oj < out_cols; ++oj) {
                for (std::size_t u = 0; u < p.window_rows; ++u) {
                  for (std::size_t v = 0; v < p.window_cols; ++v) {
                    dx[(oi * p.window_rows + u) * p.cols + oj * p.window_cols + v] +=
                        delta[oi * out_cols + oj] * scale;
                  }
                }
              }
            }
            return dx;
          },
      },
      layer);
}

LayerGradient zero_gradient(const Layer& layer) {
  return std::visit(Overloaded{
                        [](const LinearLayer& l) {
                          return LayerGradient{std::vector<double>(l.weights.data.size(), 0.0),
                                               std::vector<double>(l.bias.size(), 0.0)};
                        },
                        [](const Conv2DLayer& c) {
                          return LayerGradient{std::vector<double>(c.filter.data.size(), 0.0), {}};
                        },
                        [](const auto&) { return LayerGradient{}; },
                    },
                    layer);
}

}  // namespace

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m;
  m.rows = rows.size();
  m.cols = rows.size() == 0 ? 0 : rows.begin()->size();
  for (const auto& row : rows) {
    if (row.size() != m.cols) throw Error(ErrorCode::kShapeMismatch, "ragged matrix rows");
    m.data.insert(m.data.end(), row.begin(), row.end());
  }
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::size_t input_dim(const Layer& layer) {
  return std::visit(Overloaded{
                        [](const LinearLayer& l) { return l.weights.rows; },
                        [](const ActivationLayer& a) { return a.dim; },
                        [](const Conv2DLayer& c) { return c.rows * c.cols; },
                        [](const Pool2DLayer& p) { return p.rows * p.cols; },
                    },
                    layer);
}

std::size_t output_dim(const Layer& layer) {
  return std::visit(
      Overloaded{
          [](const LinearLayer& l) { return l.weights.cols; },
          [](const ActivationLayer& a) { return a.dim; },
          [](const Conv2DLayer& c) { return c.rows * c.cols; },
          [](const Pool2DLayer& p) {
            return (p.rows / p.window_rows) * (p.cols / p.window_cols);
          },
      },
      layer);
}

NeuralNetwork::NeuralNetwork(std::vector<Layer> layers, std::uint64_t seed)
    : layers_(std::move(layers)), seed_(seed) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    std::visit(Overloaded{
                   [](const LinearLayer& l) {
                     if (l.bias.size() != l.weights.cols || l.weights.rows == 0 ||
                         l.weights.cols == 0 ||
                         l.weights.data.size() != l.weights.rows * l.weights.cols) {
                       throw Error(ErrorCode::kShapeMismatch, "linear layer shape is inconsistent");
                     }
                     if (!all_finite(l.weights.data) || !all_finite(l.bias)) {
                       throw Error(ErrorCode::kNonFiniteInput, "linear layer has non-finite weight");
                     }
                   },
                   [](const ActivationLayer& a) {
                     if (a.dim == 0) throw Error(ErrorCode::kShapeMismatch, "zero-width activation");
                   },
                   [](const Conv2DLayer& c) {
                     check_window(c.filter.rows, c.filter.cols, c.rows, c.cols);
                     if (!all_finite(c.filter.data)) {
                       throw Error(ErrorCode::kNonFiniteInput, "conv filter has non-finite weight");
                     }
                   },
                   [](const Pool2DLayer& p) {
                     check_window(p.window_rows, p.window_cols, p.rows, p.cols);
                   },
               },
               layers_[i]);
    if (i > 0 && nn::output_dim(layers_[i - 1]) != nn::input_dim(layers_[i])) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "layer " + std::to_string(i - 1) + " outputs " +
                      std::to_string(nn::output_dim(layers_[i - 1])) + " values but layer " +
                      std::to_string(i) + " expects " + std::to_string(nn::input_dim(layers_[i])));
    }
  }
}

LinearLayer make_linear(std::size_t in, std::size_t out, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  LinearLayer layer{Matrix(in, out), std::vector<double>(out, 0.0)};
  for (auto& w : layer.weights.data) w = dist(rng);
  return layer;
}

NeuralNetwork NeuralNetwork::mlp(std::span<const std::size_t> widths, ActivationKind hidden,
                                 bool softmax_head, std::uint64_t seed) {
  if (widths.size() < 2) throw Error(ErrorCode::kInvalidArgument, "mlp needs at least two widths");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    layers.emplace_back(make_linear(widths[i], widths[i + 1], seed + i));
    const bool last = i + 2 == widths.size();
    if (!last) {
      layers.emplace_back(ActivationLayer{hidden, widths[i + 1]});
    } else if (softmax_head) {
      layers.emplace_back(ActivationLayer{ActivationKind::kSoftmax, widths[i + 1]});
    }
  }
  return NeuralNetwork(std::move(layers), seed);
}

std::size_t NeuralNetwork::input_dim() const {
  return layers_.empty() ? 0 : nn::input_dim(layers_.front());
}

std::size_t NeuralNetwork::output_dim() const {
  return layers_.empty() ? 0 : nn::output_dim(layers_.back());
}

double activation(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::kSign: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    case ActivationKind::kThreshold: return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::kReLU: return x > 0.0 ? x : 0.0;
    case ActivationKind::kSoftmax: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "softmax is not a scalar activation");
}

std::vector<double> relu(std::span<const double> x) {
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(),
                 [](double v) { return activation(ActivationKind::kReLU, v); });
  return out;
}

std::vector<double> softmax(std::span<const double> x) {
  if (x.empty()) return {};
  const double m = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - m);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

Matrix conv2d(const Matrix& filter, const Matrix& x) {
  check_window(filter.rows, filter.cols, x.rows, x.cols);
  Matrix y(x.rows, x.cols);
  // One-based Y[i,j] = sum F[u,v] X[i-u, j-v]; shifted to zero-based that
  // reads X[i-u-1][j-v-1], and negative indices contribute zero.
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) {
      double acc = 0.0;
      for (std::size_t u = 0; u < filter.rows && u < i; ++u) {
        for (std::size_t v = 0; v < filter.cols && v < j; ++v) {
          acc += filter(u, v) * x(i - u - 1, j - v - 1);
        }
      }
      y(i, j) = acc;
    }
  }
  return y;
}

Matrix maxpool2d(std::size_t window_rows, std::size_t window_cols, const Matrix& x) {
  check_window(window_rows, window_cols, x.rows, x.cols);
  Matrix y(x.rows / window_rows, x.cols / window_cols);
  for (std::size_t i = 0; i < y.rows; ++i) {
    for (std::size_t j = 0; j < y.cols; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t u = 0; u < window_rows; ++u) {
        for (std::size_t v = 0; v < window_cols; ++v) {
          best = std::max(best, x(i * window_rows + u, j * window_cols + v));
        }
      }
      y(i, j) = best;
    }
  }
  return y;
}

Matrix avgpool2d(std::size_t window_rows, std::size_t window_cols, const Matrix& x) {
  check_window(window_rows, window_cols, x.rows, x.cols);
  Matrix y(x.rows / window_rows, x.cols / window_cols);
  const double scale = 1.0 / static_cast<double>(window_rows * window_cols);
  for (std::size_t i = 0; i < y.rows; ++i) {
    for (std::size_t j = 0; j < y.cols; ++j) {
      double acc = 0.0;
      for (std::size_t u = 0; u < window_rows; ++u) {
        for (std::size_t v = 0; v < window_cols; ++v) {
          acc += x(i * window_rows + u, j * window_cols + v);
        }
      }
      y(i, j) = acc * scale;
    }
  }
  return y;
}

std::vector<double> apply_layer(const Layer& layer, std::span<const double> x) {
  require_dim(input_dim(layer), x.size());
  return std::visit(
      Overloaded{
          [&](const LinearLayer& l) {
            std::vector<double> out(l.bias);
            for (std::size_t i = 0; i < l.weights.rows; ++i) {
              const double xi = x[i];
              for (std::size_t j = 0; j < l.weights.cols; ++j) out[j] += xi * l.weights(i, j);
            }
            return out;
          },
          [&](const ActivationLayer& a) {
            if (a.kind == ActivationKind::kSoftmax) return softmax(x);
            std::vector<double> out(x.size());
            std::transform(x.begin(), x.end(), out.begin(),
                           [&](double v) { return activation(a.kind, v); });
            return out;
          },
          [&](const Conv2DLayer& c) {
            return conv2d(c.filter, as_matrix(c.rows, c.cols, x)).data;
          },
          [&](const MaxPool2DLayer& p) {
            return maxpool2d(p.window_rows, p.window_cols, as_matrix(p.rows, p.cols, x)).data;
          },
          [&](const AvgPool2DLayer& p) {
            return avgpool2d(p.window_rows, p.window_cols, as_matrix(p.rows, p.cols, x)).data;
          },
      },
      layer);
}

std::vector<double> forward(const NeuralNetwork& net, std::span<const double> x) {
  return std::move(forward_trace(net, x).back());
}

double sample_loss(const NeuralNetwork& net, const LabeledSample& sample, Loss loss) {
  const auto acts = forward_trace(net, sample.input);
  const auto& out = acts.back();
  switch (loss) {
    case Loss::kSquaredError: {
      const auto target = squared_target(sample, out.size());
      double sum = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) sum += (out[i] - target[i]) * (out[i] - target[i]);
      return sum;
    }
    case Loss::kCrossEntropy: {
      if (sample.label >= out.size()) throw Error(ErrorCode::kInvalidArgument, "label out of range");
      if (has_softmax_head(net)) {
        // Evaluate on the logits so saturated probabilities stay finite.
        const auto& logits = acts[acts.size() - 2];
        return log_sum_exp(logits) - logits[sample.label];
      }
      return -std::log(out[sample.label]);
    }
    case Loss::kZeroOne:
      return argmax(out) == sample.label ? 0.0 : 1.0;
  }
  return 0.0;
}

double mean_loss(const NeuralNetwork& net, std::span<const LabeledSample> batch, Loss loss) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  double sum = 0.0;
  for (const auto& s : batch) sum += sample_loss(net, s, loss);
  return sum / static_cast<double>(batch.size());
}

Gradients backprop_gradients(const NeuralNetwork& net, std::span<const LabeledSample> batch,
                             Loss loss) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  if (loss == Loss::kZeroOne) {
    throw Error(ErrorCode::kInvalidArgument, "zero-one loss is not differentiable");
  }
  const auto& layers = net.layers();
  Gradients grads;
  for (const auto& layer : layers) grads.layers.push_back(zero_gradient(layer));

  const bool fused = loss == Loss::kCrossEntropy && has_softmax_head(net);
  for (const auto& sample : batch) {
    const auto acts = forward_trace(net, sample.input);
    const auto& out = acts.back();
    std::vector<double> delta(out.size(), 0.0);
    std::size_t top = layers.size();
    if (loss == Loss::kSquaredError) {
      const auto target = squared_target(sample, out.size());
      for (std::size_t i = 0; i < out.size(); ++i) delta[i] = 2.0 * (out[i] - target[i]);
    } else {
      if (sample.label >= out.size()) throw Error(ErrorCode::kInvalidArgument, "label out of range");
      if (fused) {
        // Softmax followed by cross-entropy: dL/dz = p - onehot.
        delta = out;
        delta[sample.label] -= 1.0;
        top = layers.size() - 1;
      } else {
        delta[sample.label] = -1.0 / out[sample.label];
      }
    }
    for (std::size_t i = top; i-- > 0;) {
      delta = backward_layer(layers[i], acts[i], acts[i + 1], delta, grads.layers[i]);
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grads.layers) {
    for (auto& v : g.weights) v *= inv;
    for (auto& v : g.bias) v *= inv;
    if (!all_finite(g.weights) || !all_finite(g.bias)) {
      throw Error(ErrorCode::kNonFiniteGradient, "backpropagation produced a non-finite gradient");
    }
  }
  return grads;
}

std::vector<double> flatten_parameters(const NeuralNetwork& net) {
  std::vector<double> out;
  for (const auto& layer : net.layers()) {
    if (const auto* l = std::get_if<LinearLayer>(&layer)) {
      out.insert(out.end(), l->weights.data.begin(), l->weights.data.end());
      out.insert(out.end(), l->bias.begin(), l->bias.end());
    } else if (const auto* c = std::get_if<Conv2DLayer>(&layer)) {
      out.insert(out.end(), c->filter.data.begin(), c->filter.data.end());
    }
  }
  return out;
}

std::vector<double> flatten(const Gradients& grads) {
  std::vector<double> out;
  for (const auto& g : grads.layers) {
    out.insert(out.end(), g.weights.begin(), g.weights.end());
    out.insert(out.end(), g.bias.begin(), g.bias.end());
  }
  return out;
}

NeuralNetwork with_parameters(const NeuralNetwork& net, std::span<const double> params) {
  std::vector<Layer> layers = net.layers();
  std::size_t pos = 0;
  auto take = [&](std::vector<double>& dst) {
    if (pos + dst.size() > params.size()) {
      throw Error(ErrorCode::kShapeMismatch, "parameter vector too short");
    }
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(pos), dst.size(), dst.begin());
    pos += dst.size();
  };
  for (auto& layer : layers) {
    if (auto* l = std::get_if<LinearLayer>(&layer)) {
      take(l->weights.data);
      take(l->bias);
    } else if (auto* c = std::get_if<Conv2DLayer>(&layer)) {
      take(c->filter.data);
    }
  }
  if (pos != params.size()) throw Error(ErrorCode::kShapeMismatch, "parameter vector too long");
  return NeuralNetwork(std::move(layers), net.seed());
}

std::vector<double> gradient_descent_step(std::span<const double> weights,
                                          std::span<const double> gradients, double alpha) {
  if (weights.size() != gradients.size()) {
    throw Error(ErrorCode::kShapeMismatch, "weights and gradients differ in shape");
  }
  if (!(alpha > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
  std::vector<double> out(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) out[i] = weights[i] - alpha * gradients[i];
  return out;
}

NeuralNetwork gradient_descent_step(const NeuralNetwork& net, const Gradients& grads,
                                    double alpha) {
  if (grads.layers.size() != net.layers().size()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient layer count differs from network");
  }
  return with_parameters(net, gradient_descent_step(flatten_parameters(net), flatten(grads), alpha));
}

TrainResult train(NeuralNetwork net, std::span<const LabeledSample> data,
                  const TrainingConfig& config) {
  if (data.empty()) throw Error(ErrorCode::kInvalidArgument, "training data is empty");
  if (!(config.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
  }
  if (config.epochs == 0) throw Error(ErrorCode::kInvalidArgument, "epochs must be positive");
  if (config.loss == Loss::kZeroOne) {
    throw Error(ErrorCode::kInvalidArgument, "zero-one loss cannot be used for training");
  }
  for (const auto& s : data) {
    if (config.loss == Loss::kCrossEntropy && s.label >= net.output_dim()) {
      throw Error(ErrorCode::kInvalidArgument, "label exceeds class count");
    }
  }

  auto checked_loss = [&](const NeuralNetwork& n) {
    double value = 0.0;
    try {
      value = mean_loss(n, data, config.loss);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFiniteActivation) throw;
      value = std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(value) || value > kDivergenceLimit) {
      throw Error(ErrorCode::kDivergenceDetected,
                  "training loss diverged (" + std::to_string(value) + ")");
    }
    return value;
  };

  TrainResult result;
  result.epoch_loss.reserve(config.epochs + 1);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    result.epoch_loss.push_back(checked_loss(net));
    net = gradient_descent_step(net, backprop_gradients(net, data, config.loss),
                                config.learning_rate);
  }
  result.epoch_loss.push_back(checked_loss(net));
  result.network = std::move(net);
  return result;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double empirical_error(const NeuralNetwork& net, std::span<const LabeledSample> data) {
  if (data.empty()) throw Error(ErrorCode::kInvalidArgument, "empty data set");
  std::size_t wrong = 0;
  for (const auto& s : data) {
    if (argmax(forward(net, s.input)) != s.label) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

std::size_t embedding_dim(const NeuralNetwork& net) {
  if (net.empty()) return 0;
  return has_softmax_head(net) ? input_dim(net.layers().back()) : net.output_dim();
}

MetricPoint embed(const NeuralNetwork& net, std::span<const double> x,
                  const SpaceDescriptor& space) {
  if (space.kind == MetricKind::kLevenshtein) {
    throw Error(ErrorCode::kSpaceMismatch, "a network cannot embed into a Levenshtein space");
  }
  if (embedding_dim(net) != space.dimension) {
    throw Error(ErrorCode::kDimensionMismatch,
                "network embeds into dimension " + std::to_string(embedding_dim(net)) +
                    " but the space has dimension " + std::to_string(space.dimension));
  }
  require_dim(net.input_dim(), x.size());
  std::vector<double> v(x.begin(), x.end());
  const std::size_t depth = net.layers().size() - (has_softmax_head(net) ? 1 : 0);
  for (std::size_t i = 0; i < depth; ++i) {
    v = apply_layer(net.layers()[i], v);
    if (!all_finite(v)) {
      throw Error(ErrorCode::kNonFiniteActivation, "embedding produced a non-finite value");
    }
  }
  if (space.kind == MetricKind::kHamming) {
    BitString bits;
    bits.bits.reserve(v.size());
    for (double value : v) {
      bits.bits.push_back(static_cast<std::uint8_t>(activation(ActivationKind::kThreshold, value)));
    }
    return bits;
  }
  return RealVector{std::move(v)};
}

}  // namespace biomatch::nn
