#pragma once

#include <compare>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biomatch/error.hpp"
#include "biomatch/metric.hpp"

namespace biomatch::store {

/// Minimum identifier length in bits.
inline constexpr std::size_t kMinIdBits = 16;
inline constexpr std::size_t kMaxIdResamples = 100;
inline constexpr std::uint16_t kStoreFormatVersion = 1;

/// A lambda-bit identifier, stored as lambda/8 big-endian bytes and written
/// externally as lower-case hex. Orders lexicographically by bytes.
class Identifier {
 public:
  Identifier() = default;
  explicit Identifier(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

  /// Throws InvalidArgument on malformed hex.
  static Identifier from_hex(std::string_view hex);
  std::string to_hex() const;

  std::size_t bit_length() const { return bytes_.size() * 8; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  friend auto operator<=>(const Identifier&, const Identifier&) = default;
  friend bool operator==(const Identifier&, const Identifier&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
};

/// Throws InvalidArgument unless lambda >= 16 and a multiple of 8.
void validate_lambda(std::size_t lambda);

/// Uniform lambda-bit identifier for which `is_taken` is false. Each 64-bit
/// draw supplies eight bytes, low byte first. Gives up with
/// CapacityExhausted after kMaxIdResamples collisions.
template <class Rng, class IsTaken>
  requires std::uniform_random_bit_generator<Rng> && std::predicate<IsTaken&, const Identifier&>
Identifier generate_id(std::size_t lambda, IsTaken&& is_taken, Rng& rng) {
  static_assert(Rng::min() == 0 && Rng::max() == std::numeric_limits<std::uint64_t>::max(),
                "generate_id needs a full-range 64-bit generator");
  validate_lambda(lambda);
  const std::size_t n_bytes = lambda / 8;
  for (std::size_t attempt = 0; attempt <= kMaxIdResamples; ++attempt) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(n_bytes);
    while (bytes.size() < n_bytes) {
      std::uint64_t word = rng();
      for (int i = 0; i < 8 && bytes.size() < n_bytes; ++i, word >>= 8) {
        bytes.push_back(static_cast<std::uint8_t>(word & 0xFF));
      }
    }
    Identifier id(std::move(bytes));
    if (!is_taken(id)) return id;
  }
  throw Error(ErrorCode::kCapacityExhausted,
              "identifier space of " + std::to_string(lambda) + " bits kept colliding");
}

struct TemplateRecord {
  Identifier id;
  MetricPoint embedding;

  friend bool operator==(const TemplateRecord&, const TemplateRecord&) = default;
};

/// Capacity-bounded set of templates keyed by identifier, kept sorted by
/// identifier. A plain value type: callers that share one across threads
/// must synchronise (protocol::System does).
class Gallery {
 public:
  Gallery(std::size_t lambda, std::size_t capacity, SpaceDescriptor space);

  /// Throws CapacityExceeded, DuplicateId, or SpaceMismatch (wrong id length
  /// or non-conforming embedding).
  void insert(TemplateRecord record);
  std::optional<TemplateRecord> lookup(const Identifier& id) const;
  bool contains(const Identifier& id) const;
  /// Returns false when the id was absent.
  bool remove(const Identifier& id);

  std::size_t size() const { return records_.size(); }
  bool full() const { return records_.size() >= capacity_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t lambda() const { return lambda_; }
  const SpaceDescriptor& space() const { return space_; }
  std::span<const TemplateRecord> records() const { return records_; }

  friend bool operator==(const Gallery&, const Gallery&) = default;

 private:
  std::vector<TemplateRecord>::const_iterator find(const Identifier& id) const;

  std::size_t lambda_;
  std::size_t capacity_;
  SpaceDescriptor space_;
  std::vector<TemplateRecord> records_;
};

template <class Rng>
Identifier generate_id(const Gallery& gallery, Rng& rng) {
  return generate_id(
      gallery.lambda(), [&](const Identifier& id) { return gallery.contains(id); }, rng);
}

/// BMDB container; layout in docs/FORMATS.md.
std::vector<std::uint8_t> serialize_gallery(const Gallery& gallery);
/// Throws CorruptFileError(kCorruptStore) distinguishing bad magic, bad
/// version, truncation and malformed content.
Gallery deserialize_gallery(std::span<const std::uint8_t> bytes);

void save_gallery(const Gallery& gallery, const std::string& path);
Gallery load_gallery(const std::string& path);

/// Embedding encoding shared with the transcript payloads.
void encode_embedding(std::vector<std::uint8_t>& out, const MetricPoint& point);

}  // namespace biomatch::store
