#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace biomatch {

/// Fixed-length bit string; one byte per bit, each 0 or 1.
struct BitString {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  friend bool operator==(const BitString&, const BitString&) = default;
};

/// String over a finite alphabet; each char is one symbol.
struct SymbolString {
  std::string symbols;

  std::size_t size() const { return symbols.size(); }
  friend bool operator==(const SymbolString&, const SymbolString&) = default;
};

struct RealVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  friend bool operator==(const RealVector&, const RealVector&) = default;
};

using MetricPoint = std::variant<BitString, SymbolString, RealVector>;

enum class MetricKind : std::uint8_t {
  kHamming = 0,
  kLevenshtein = 1,
  kEuclidean = 2,
  kChebyshev = 3,
  kCosineSimilarity = 4,
};

enum class Orientation : std::uint8_t { kDistance = 0, kSimilarity = 1 };

struct SpaceDescriptor {
  MetricKind kind = MetricKind::kEuclidean;
  std::size_t dimension = 1;
  Orientation orientation = Orientation::kDistance;

  /// Builds a descriptor with the orientation implied by `kind`.
  static SpaceDescriptor of(MetricKind kind, std::size_t dimension);

  friend bool operator==(const SpaceDescriptor&, const SpaceDescriptor&) = default;
};

std::string to_string(MetricKind kind);
/// Accepts the lower-case names produced by to_string ("hamming", "cosine", ...).
MetricKind parse_metric_kind(const std::string& name);

BitString parse_bits(const std::string& text);
std::string to_string(const BitString& bits);

std::size_t hamming_distance(const BitString& x, const BitString& y);
std::size_t hamming_weight(const BitString& x);
BitString bitwise_xor(const BitString& x, const BitString& y);

/// Edit distance (insert/delete/substitute, unit costs), computed with a
/// rolling two-row table.
std::size_t levenshtein_distance(const SymbolString& x, const SymbolString& y);

double euclidean_distance(std::span<const double> x, std::span<const double> y);
double chebyshev_distance(std::span<const double> x, std::span<const double> y);
/// <x,y> / (|x| |y|). Not a metric: it is a similarity and violates the
/// triangle inequality when turned into 1 - cos.
double cosine_similarity(std::span<const double> x, std::span<const double> y);

/// True when `point` has the variant and dimension `space` requires.
bool conforms(const SpaceDescriptor& space, const MetricPoint& point);
/// Throws VariantMismatch / DimensionMismatch / NonFiniteInput describing the
/// first violated constraint.
void require_conforming(const SpaceDescriptor& space, const MetricPoint& point);

/// Dispatches to the distance or similarity selected by `space`. The score
/// keeps the descriptor's orientation.
double compare(const SpaceDescriptor& space, const MetricPoint& x, const MetricPoint& y);

}  // namespace biomatch
