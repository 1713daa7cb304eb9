#include "biomatch/model_io.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <limits>

#include "binary_io.hpp"
#include "biomatch/error.hpp"
#include "hex.hpp"

namespace biomatch::nn {

namespace {

constexpr std::string_view kMagic = "BMNN";

enum class LayerTag : std::uint8_t {
  kLinear = 0,
  kActivation = 1,
  kConv2D = 2,
  kMaxPool2D = 3,
  kAvgPool2D = 4,
};

void write_pool(detail::ByteWriter& w, LayerTag tag, const Pool2DLayer& p) {
  w.u8(static_cast<std::uint8_t>(tag));
  w.u32(static_cast<std::uint32_t>(p.rows));
  w.u32(static_cast<std::uint32_t>(p.cols));
  w.u32(static_cast<std::uint32_t>(p.window_rows));
  w.u32(static_cast<std::uint32_t>(p.window_cols));
}

Pool2DLayer read_pool(detail::ByteReader& r) {
  Pool2DLayer p;
  p.rows = r.u32();
  p.cols = r.u32();
  p.window_rows = r.u32();
  p.window_cols = r.u32();
  return p;
}

std::vector<double> read_doubles(detail::ByteReader& r, std::uint64_t count) {
  if (count > r.remaining() / 8) {
    r.fail(CorruptKind::kTruncated, "weight block of " + std::to_string(count) +
                                        " values exceeds the remaining file");
  }
  std::vector<double> out(count);
  for (auto& v : out) v = r.f64();
  return out;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const NeuralNetwork& net) {
  detail::ByteWriter w;
  w.magic(kMagic);
  w.u16(kModelFormatVersion);
  w.u64(net.seed());
  w.u32(static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& layer : net.layers()) {
    if (const auto* l = std::get_if<LinearLayer>(&layer)) {
      w.u8(static_cast<std::uint8_t>(LayerTag::kLinear));
      w.u32(static_cast<std::uint32_t>(l->weights.rows));
      w.u32(static_cast<std::uint32_t>(l->weights.cols));
      for (double v : l->weights.data) w.f64(v);
      for (double v : l->bias) w.f64(v);
    } else if (const auto* a = std::get_if<ActivationLayer>(&layer)) {
      w.u8(static_cast<std::uint8_t>(LayerTag::kActivation));
      w.u8(static_cast<std::uint8_t>(a->kind));
      w.u32(static_cast<std::uint32_t>(a->dim));
    } else if (const auto* c = std::get_if<Conv2DLayer>(&layer)) {
      w.u8(static_cast<std::uint8_t>(LayerTag::kConv2D));
      w.u32(static_cast<std::uint32_t>(c->rows));
      w.u32(static_cast<std::uint32_t>(c->cols));
      w.u32(static_cast<std::uint32_t>(c->filter.rows));
      w.u32(static_cast<std::uint32_t>(c->filter.cols));
      for (double v : c->filter.data) w.f64(v);
    } else if (const auto* mp = std::get_if<MaxPool2DLayer>(&layer)) {
      write_pool(w, LayerTag::kMaxPool2D, *mp);
    } else {
      write_pool(w, LayerTag::kAvgPool2D, std::get<AvgPool2DLayer>(layer));
    }
  }
  return w.take();
}

NeuralNetwork deserialize_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, ErrorCode::kCorruptModel);
  const auto magic = r.bytes(kMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    r.fail(CorruptKind::kBadMagic, "not a BMNN model file");
  }
  const auto version = r.u16();
  if (version != kModelFormatVersion) {
    r.fail(CorruptKind::kBadVersion, "unsupported model version " + std::to_string(version));
  }
  const auto seed = r.u64();
  const auto count = r.u32();
  if (count == 0) r.fail(CorruptKind::kMalformed, "model has no layers");

  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto tag = r.u8();
    switch (static_cast<LayerTag>(tag)) {
      case LayerTag::kLinear: {
        const std::uint64_t in = r.u32();
        const std::uint64_t out = r.u32();
        LinearLayer l;
        l.weights.rows = in;
        l.weights.cols = out;
        l.weights.data = read_doubles(r, in * out);
        l.bias = read_doubles(r, out);
        layers.emplace_back(std::move(l));
        break;
      }
      case LayerTag::kActivation: {
        const auto kind = r.u8();
        if (kind > static_cast<std::uint8_t>(ActivationKind::kSoftmax)) {
          r.fail(CorruptKind::kMalformed, "unknown activation kind " + std::to_string(kind));
        }
        layers.emplace_back(ActivationLayer{static_cast<ActivationKind>(kind), r.u32()});
        break;
      }
      case LayerTag::kConv2D: {
        Conv2DLayer c;
        c.rows = r.u32();
        c.cols = r.u32();
        const std::uint64_t k = r.u32();
        const std::uint64_t l = r.u32();
        c.filter.rows = k;
        c.filter.cols = l;
        c.filter.data = read_doubles(r, k * l);
        layers.emplace_back(std::move(c));
        break;
      }
      case LayerTag::kMaxPool2D: layers.emplace_back(MaxPool2DLayer{read_pool(r)}); break;
      case LayerTag::kAvgPool2D: layers.emplace_back(AvgPool2DLayer{read_pool(r)}); break;
      default: r.fail(CorruptKind::kMalformed, "unknown layer tag " + std::to_string(tag));
    }
  }
  if (!r.at_end()) r.fail(CorruptKind::kMalformed, "trailing bytes after the last layer");
  try {
    return NeuralNetwork(std::move(layers), seed);
  } catch (const CorruptFileError&) {
    throw;
  } catch (const Error& e) {
    r.fail(CorruptKind::kMalformed, e.what());
  }
}

void save_model(const NeuralNetwork& net, const std::string& path) {
  detail::write_file(path, serialize_model(net));
}

NeuralNetwork load_model(const std::string& path) {
  return deserialize_model(detail::read_file(path));
}

std::string model_digest(const NeuralNetwork& net) {
  const auto bytes = serialize_model(net);
  std::array<std::uint8_t, SHA256_DIGEST_LENGTH> digest{};
  SHA256(bytes.data(), bytes.size(), digest.data());
  return detail::to_hex(digest);
}

}  // namespace biomatch::nn
