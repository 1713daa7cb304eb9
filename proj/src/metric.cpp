#include "biomatch/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "biomatch/error.hpp"

namespace biomatch {

namespace {

void check_real_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector dimensions differ: " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(y.begin(), y.end(), finite)) {
    throw Error(ErrorCode::kNonFiniteInput, "vector contains a non-finite value");
  }
}

const char* variant_name(const MetricPoint& p) {
  switch (p.index()) {
    case 0: return "BitString";
    case 1: return "SymbolString";
    default: return "RealVector";
  }
}

std::size_t expected_variant(MetricKind kind) {
  switch (kind) {
    case MetricKind::kHamming: return 0;
    case MetricKind::kLevenshtein: return 1;
    default: return 2;
  }
}

}  // namespace

SpaceDescriptor SpaceDescriptor::of(MetricKind kind, std::size_t dimension) {
  return SpaceDescriptor{kind, dimension,
                         kind == MetricKind::kCosineSimilarity ? Orientation::kSimilarity
                                                               : Orientation::kDistance};
}

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kHamming: return "hamming";
    case MetricKind::kLevenshtein: return "levenshtein";
    case MetricKind::kEuclidean: return "euclidean";
    case MetricKind::kChebyshev: return "chebyshev";
    case MetricKind::kCosineSimilarity: return "cosine";
  }
  return "unknown";
}

MetricKind parse_metric_kind(const std::string& name) {
  for (auto kind : {MetricKind::kHamming, MetricKind::kLevenshtein, MetricKind::kEuclidean,
                    MetricKind::kChebyshev, MetricKind::kCosineSimilarity}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown metric kind '" + name + "'");
}

BitString parse_bits(const std::string& text) {
  BitString out;
  out.bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw Error(ErrorCode::kInvalidArgument, "bit string contains '" + std::string(1, c) + "'");
    }
    out.bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return out;
}

std::string to_string(const BitString& bits) {
  std::string out;
  out.reserve(bits.size());
  for (auto b : bits.bits) out.push_back(b ? '1' : '0');
  return out;
}

std::size_t hamming_distance(const BitString& x, const BitString& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "bit strings differ in length: " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) count += (x.bits[i] != y.bits[i]) ? 1 : 0;
  return count;
}

std::size_t hamming_weight(const BitString& x) {
  return static_cast<std::size_t>(
      std::count_if(x.bits.begin(), x.bits.end(), [](std::uint8_t b) { return b != 0; }));
}

BitString bitwise_xor(const BitString& x, const BitString& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "bit strings differ in length");
  }
  BitString out;
  out.bits.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.bits[i] = static_cast<std::uint8_t>((x.bits[i] != 0) ^ (y.bits[i] != 0));
  }
  return out;
}

std::size_t levenshtein_distance(const SymbolString& x, const SymbolString& y) {
  const auto& a = x.symbols;
  const auto& b = y.symbols;
  // row[j] holds the distance between a[0..i) and b[0..j).
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitution = prev[j - 1] + (a[i - 1] != b[j - 1] ? 1 : 0);
      row[j] = std::min({prev[j] + 1, row[j - 1] + 1, substitution});
    }
    std::swap(prev, row);
  }
  return prev[b.size()];
}

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  check_real_pair(x, y);
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double chebyshev_distance(std::span<const double> x, std::span<const double> y) {
  check_real_pair(x, y);
  double best = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) best = std::max(best, std::abs(x[i] - y[i]));
  return best;
}

double cosine_similarity(std::span<const double> x, std::span<const double> y) {
  check_real_pair(x, y);
  double dot = 0.0;
  double xx = 0.0;
  double yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  if (xx == 0.0 || yy == 0.0) {
    throw Error(ErrorCode::kZeroVector, "cosine similarity of a zero vector is undefined");
  }
  // Rounding can push |cos| a hair past 1.
  return std::clamp(dot / (std::sqrt(xx) * std::sqrt(yy)), -1.0, 1.0);
}

bool conforms(const SpaceDescriptor& space, const MetricPoint& point) {
  try {
    require_conforming(space, point);
    return true;
  } catch (const Error&) {
    return false;
  }
}

void require_conforming(const SpaceDescriptor& space, const MetricPoint& point) {
  if (point.index() != expected_variant(space.kind)) {
    throw Error(ErrorCode::kVariantMismatch, std::string("point is a ") + variant_name(point) +
                                                 " but the space is " + to_string(space.kind));
  }
  if (const auto* bits = std::get_if<BitString>(&point)) {
    if (bits->size() != space.dimension) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "bit string length " + std::to_string(bits->size()) + " != " +
                      std::to_string(space.dimension));
    }
    for (auto b : bits->bits) {
      if (b > 1) throw Error(ErrorCode::kInvalidArgument, "bit value outside {0,1}");
    }
  } else if (const auto* str = std::get_if<SymbolString>(&point)) {
    if (str->size() > space.dimension) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "symbol string longer than " + std::to_string(space.dimension));
    }
  } else {
    const auto& vec = std::get<RealVector>(point);
    if (vec.size() != space.dimension) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "vector dimension " + std::to_string(vec.size()) + " != " +
                      std::to_string(space.dimension));
    }
    for (double v : vec.values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteInput, "non-finite coordinate");
    }
  }
}

double compare(const SpaceDescriptor& space, const MetricPoint& x, const MetricPoint& y) {
  require_conforming(space, x);
  require_conforming(space, y);
  switch (space.kind) {
    case MetricKind::kHamming:
      return static_cast<double>(hamming_distance(std::get<BitString>(x), std::get<BitString>(y)));
    case MetricKind::kLevenshtein:
      return static_cast<double>(
          levenshtein_distance(std::get<SymbolString>(x), std::get<SymbolString>(y)));
    case MetricKind::kEuclidean:
      return euclidean_distance(std::get<RealVector>(x).values, std::get<RealVector>(y).values);
    case MetricKind::kChebyshev:
      return chebyshev_distance(std::get<RealVector>(x).values, std::get<RealVector>(y).values);
    case MetricKind::kCosineSimilarity:
      return cosine_similarity(std::get<RealVector>(x).values, std::get<RealVector>(y).values);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown metric kind");
}

}  // namespace biomatch
