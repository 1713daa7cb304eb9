#pragma once

// Independent reference implementations used as test oracles. They favour
// transparency over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "biomatch/nn.hpp"
#include "biomatch/template_store.hpp"

namespace oracle {

/// Edit distance by the textbook recursion, no memoisation:
/// lev(i, j) = max(i, j) if min(i, j) = 0, otherwise the minimum of
/// lev(i-1, j) + 1, lev(i, j-1) + 1 and lev(i-1, j-1) + [x_i != y_j].
inline std::size_t naive_levenshtein(const std::string& x, const std::string& y, std::size_t i,
                                     std::size_t j) {
  if (std::min(i, j) == 0) return std::max(i, j);
  const std::size_t del = naive_levenshtein(x, y, i - 1, j) + 1;
  const std::size_t ins = naive_levenshtein(x, y, i, j - 1) + 1;
  const std::size_t sub = naive_levenshtein(x, y, i - 1, j - 1) + (x[i - 1] != y[j - 1] ? 1 : 0);
  return std::min({del, ins, sub});
}

inline std::size_t naive_levenshtein(const std::string& x, const std::string& y) {
  return naive_levenshtein(x, y, x.size(), y.size());
}

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Y[i,j] = sum_{u,v} F[u,v] X[i-u, j-v] with 1-based indices and zeros
/// outside X, evaluated with the indices exactly as written.
inline biomatch::nn::Matrix conv_1based(const biomatch::nn::Matrix& f,
                                        const biomatch::nn::Matrix& x) {
  biomatch::nn::Matrix y(x.rows, x.cols);
  for (long i = 1; i <= static_cast<long>(x.rows); ++i) {
    for (long j = 1; j <= static_cast<long>(x.cols); ++j) {
      double acc = 0.0;
      for (long u = 1; u <= static_cast<long>(f.rows); ++u) {
        for (long v = 1; v <= static_cast<long>(f.cols); ++v) {
          const long xi = i - u;
          const long xj = j - v;
          if (xi < 1 || xj < 1 || xi > static_cast<long>(x.rows) || xj > static_cast<long>(x.cols)) {
            continue;
          }
          acc += f(u - 1, v - 1) * x(xi - 1, xj - 1);
        }
      }
      y(i - 1, j - 1) = acc;
    }
  }
  return y;
}

struct ScanResult {
  std::optional<std::size_t> index;  // into the record list
  double best = 0.0;
};

/// Exhaustive Euclidean nearest-record search; ties resolve to the smallest
/// identifier. Accepts when best <= t.
inline ScanResult linear_scan(const std::vector<biomatch::store::TemplateRecord>& records,
                              const std::vector<double>& probe, double t) {
  ScanResult r;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& e = std::get<biomatch::RealVector>(records[i].embedding).values;
    const double d = euclid(e, probe);
    if (!best || d < r.best || (d == r.best && records[i].id < records[*best].id)) {
      best = i;
      r.best = d;
    }
  }
  if (best && r.best <= t) r.index = best;
  return r;
}

/// Central differences of the mean batch loss with respect to every
/// parameter, in flatten_parameters order.
inline std::vector<double> finite_difference_gradient(
    const biomatch::nn::NeuralNetwork& net, const std::vector<biomatch::nn::LabeledSample>& batch,
    biomatch::nn::Loss loss, double eps) {
  const std::vector<double> theta = biomatch::nn::flatten_parameters(net);
  std::vector<double> g(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    std::vector<double> plus = theta;
    std::vector<double> minus = theta;
    plus[k] += eps;
    minus[k] -= eps;
    const double lp = biomatch::nn::mean_loss(biomatch::nn::with_parameters(net, plus), batch, loss);
    const double lm = biomatch::nn::mean_loss(biomatch::nn::with_parameters(net, minus), batch, loss);
    g[k] = (lp - lm) / (2.0 * eps);
  }
  return g;
}

/// Classifies each sample by the closest class mean of `train`.
inline double nearest_centroid_error(const std::vector<biomatch::nn::LabeledSample>& train,
                                     const std::vector<biomatch::nn::LabeledSample>& test,
                                     std::size_t classes) {
  const std::size_t n = train.front().input.size();
  std::vector<std::vector<double>> mean(classes, std::vector<double>(n, 0.0));
  std::vector<std::size_t> count(classes, 0);
  for (const auto& s : train) {
    for (std::size_t i = 0; i < n; ++i) mean[s.label][i] += s.input[i];
    ++count[s.label];
  }
  for (std::size_t c = 0; c < classes; ++c) {
    for (auto& m : mean[c]) m /= static_cast<double>(std::max<std::size_t>(count[c], 1));
  }
  std::size_t wrong = 0;
  for (const auto& s : test) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (euclid(mean[c], s.input) < euclid(mean[best], s.input)) best = c;
    }
    if (best != s.label) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

/// Hand-rolled generators for property tests.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  bool coin() { return index(2) == 1; }

  std::vector<double> reals(std::size_t n, double lo = -10.0, double hi = 10.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = real(lo, hi);
    return v;
  }
  std::vector<std::uint8_t> bits(std::size_t n) {
    std::vector<std::uint8_t> v(n);
    for (auto& b : v) b = static_cast<std::uint8_t>(index(2));
    return v;
  }
  std::string word(std::size_t max_len, const std::string& alphabet) {
    std::string s(index(max_len + 1), ' ');
    for (auto& c : s) c = alphabet[index(alphabet.size())];
    return s;
  }
};

}  // namespace oracle
