#include "biomatch/template_store.hpp"

#include <algorithm>

#include "binary_io.hpp"
#include "hex.hpp"

namespace biomatch::store {

namespace {

constexpr std::string_view kMagic = "BMDB";

void write_embedding(detail::ByteWriter& w, const MetricPoint& point) {
  if (const auto* bits = std::get_if<BitString>(&point)) {
    // Bit i lives in byte i/8 at position 7 - i%8; padding bits are zero.
    std::vector<std::uint8_t> packed((bits->size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits->size(); ++i) {
      if (bits->bits[i]) packed[i / 8] |= static_cast<std::uint8_t>(0x80U >> (i % 8));
    }
    w.bytes(packed);
  } else if (const auto* str = std::get_if<SymbolString>(&point)) {
    w.u32(static_cast<std::uint32_t>(str->size()));
    w.magic(str->symbols);
  } else {
    for (double v : std::get<RealVector>(point).values) w.f64(v);
  }
}

MetricPoint read_embedding(detail::ByteReader& r, const SpaceDescriptor& space) {
  switch (space.kind) {
    case MetricKind::kHamming: {
      const auto packed = r.bytes((space.dimension + 7) / 8);
      BitString bits;
      bits.bits.resize(space.dimension);
      for (std::size_t i = 0; i < space.dimension; ++i) {
        bits.bits[i] = (packed[i / 8] >> (7 - i % 8)) & 1U;
      }
      if (space.dimension % 8 != 0 &&
          (packed.back() & (0xFFU >> (space.dimension % 8))) != 0) {
        r.fail(CorruptKind::kMalformed, "non-zero padding bits in a Hamming embedding");
      }
      return bits;
    }
    case MetricKind::kLevenshtein: {
      const auto length = r.u32();
      if (length > space.dimension) {
        r.fail(CorruptKind::kMalformed, "symbol string longer than the space allows");
      }
      const auto raw = r.bytes(length);
      return SymbolString{std::string(raw.begin(), raw.end())};
    }
    default: {
      if (space.dimension > r.remaining() / 8) {
        r.fail(CorruptKind::kTruncated, "embedding runs past the end of the file");
      }
      RealVector v;
      v.values.resize(space.dimension);
      for (auto& x : v.values) x = r.f64();
      return v;
    }
  }
}

}  // namespace

Identifier Identifier::from_hex(std::string_view hex) {
  auto bytes = detail::from_hex(hex);
  if (!bytes || bytes->empty()) {
    throw Error(ErrorCode::kInvalidArgument, "identifier '" + std::string(hex) + "' is not hex");
  }
  return Identifier(std::move(*bytes));
}

std::string Identifier::to_hex() const { return detail::to_hex(bytes_); }

void validate_lambda(std::size_t lambda) {
  if (lambda < kMinIdBits || lambda % 8 != 0 || lambda > 0xFFFF) {
    throw Error(ErrorCode::kInvalidArgument,
                "lambda must be a multiple of 8 in [16, 65535], got " + std::to_string(lambda));
  }
}

Gallery::Gallery(std::size_t lambda, std::size_t capacity, SpaceDescriptor space)
    : lambda_(lambda), capacity_(capacity), space_(space) {
  validate_lambda(lambda);
  if (capacity == 0 || capacity > 0xFFFFFFFFULL) {
    throw Error(ErrorCode::kInvalidArgument, "capacity must be in [1, 2^32)");
  }
  if (space.dimension == 0 || space.dimension > 0xFFFFFFFFULL) {
    throw Error(ErrorCode::kInvalidArgument, "space dimension must be in [1, 2^32)");
  }
  if (space.orientation != SpaceDescriptor::of(space.kind, space.dimension).orientation) {
    throw Error(ErrorCode::kInvalidArgument, "orientation does not match the metric kind");
  }
}

std::vector<TemplateRecord>::const_iterator Gallery::find(const Identifier& id) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), id,
                             [](const TemplateRecord& r, const Identifier& key) { return r.id < key; });
  return (it != records_.end() && it->id == id) ? it : records_.end();
}

void Gallery::insert(TemplateRecord record) {
  if (record.id.bit_length() != lambda_) {
    throw Error(ErrorCode::kSpaceMismatch, "identifier has " +
                                               std::to_string(record.id.bit_length()) +
                                               " bits, store uses " + std::to_string(lambda_));
  }
  try {
    require_conforming(space_, record.embedding);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSpaceMismatch, std::string("embedding rejected: ") + e.what());
  }
  if (full()) {
    throw Error(ErrorCode::kCapacityExceeded,
                "gallery holds its capacity of " + std::to_string(capacity_) + " records");
  }
  auto it = std::lower_bound(
      records_.begin(), records_.end(), record.id,
      [](const TemplateRecord& r, const Identifier& key) { return r.id < key; });
  if (it != records_.end() && it->id == record.id) {
    throw Error(ErrorCode::kDuplicateId, "identifier " + record.id.to_hex() + " already enrolled");
  }
  records_.insert(it, std::move(record));
}

std::optional<TemplateRecord> Gallery::lookup(const Identifier& id) const {
  auto it = find(id);
  if (it == records_.end()) return std::nullopt;
  return *it;
}

bool Gallery::contains(const Identifier& id) const { return find(id) != records_.end(); }

bool Gallery::remove(const Identifier& id) {
  auto it = find(id);
  if (it == records_.end()) return false;
  records_.erase(it);
  return true;
}

void encode_embedding(std::vector<std::uint8_t>& out, const MetricPoint& point) {
  detail::ByteWriter w;
  write_embedding(w, point);
  out.insert(out.end(), w.data().begin(), w.data().end());
}

std::vector<std::uint8_t> serialize_gallery(const Gallery& gallery) {
  detail::ByteWriter w;
  w.magic(kMagic);
  w.u16(kStoreFormatVersion);
  w.u16(static_cast<std::uint16_t>(gallery.lambda()));
  w.u32(static_cast<std::uint32_t>(gallery.capacity()));
  w.u8(static_cast<std::uint8_t>(gallery.space().kind));
  w.u32(static_cast<std::uint32_t>(gallery.space().dimension));
  w.u8(static_cast<std::uint8_t>(gallery.space().orientation));
  w.u32(static_cast<std::uint32_t>(gallery.size()));
  for (const auto& record : gallery.records()) {
    w.bytes(record.id.bytes());
    write_embedding(w, record.embedding);
  }
  return w.take();
}

Gallery deserialize_gallery(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, ErrorCode::kCorruptStore);
  const auto magic = r.bytes(kMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    r.fail(CorruptKind::kBadMagic, "not a BMDB store file");
  }
  const auto version = r.u16();
  if (version != kStoreFormatVersion) {
    r.fail(CorruptKind::kBadVersion, "unsupported store version " + std::to_string(version));
  }
  const std::size_t lambda = r.u16();
  const std::size_t capacity = r.u32();
  const auto kind = r.u8();
  const std::size_t dimension = r.u32();
  const auto orientation = r.u8();
  const std::size_t count = r.u32();
  if (kind > static_cast<std::uint8_t>(MetricKind::kCosineSimilarity) || orientation > 1) {
    r.fail(CorruptKind::kMalformed, "unknown space descriptor");
  }
  const SpaceDescriptor space{static_cast<MetricKind>(kind), dimension,
                              static_cast<Orientation>(orientation)};

  std::optional<Gallery> gallery;
  try {
    gallery.emplace(lambda, capacity, space);
  } catch (const Error& e) {
    r.fail(CorruptKind::kMalformed, e.what());
  }
  if (count > capacity) r.fail(CorruptKind::kMalformed, "record count exceeds capacity");

  std::optional<Identifier> previous;
  for (std::size_t i = 0; i < count; ++i) {
    const auto raw = r.bytes(lambda / 8);
    Identifier id(std::vector<std::uint8_t>(raw.begin(), raw.end()));
    if (previous && !(*previous < id)) {
      r.fail(CorruptKind::kMalformed, "records are not strictly sorted by identifier");
    }
    auto embedding = read_embedding(r, space);
    try {
      gallery->insert(TemplateRecord{id, std::move(embedding)});
    } catch (const Error& e) {
      r.fail(CorruptKind::kMalformed, e.what());
    }
    previous = std::move(id);
  }
  if (!r.at_end()) r.fail(CorruptKind::kMalformed, "trailing bytes after the last record");
  return std::move(*gallery);
}

void save_gallery(const Gallery& gallery, const std::string& path) {
  detail::write_file(path, serialize_gallery(gallery));
}

Gallery load_gallery(const std::string& path) {
  return deserialize_gallery(detail::read_file(path));
}

}  // namespace biomatch::store
