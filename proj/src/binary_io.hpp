#pragma once

// Little-endian encode/decode helpers shared by the model and store formats.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "biomatch/error.hpp"

namespace biomatch::detail {

class ByteWriter {
 public:
  void bytes(std::span<const std::uint8_t> data) { out_.insert(out_.end(), data.begin(), data.end()); }
  void magic(std::string_view m) { out_.insert(out_.end(), m.begin(), m.end()); }

  template <class T>
  void uint(T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
    }
  }
  void u8(std::uint8_t v) { uint(v); }
  void u16(std::uint16_t v) { uint(v); }
  void u32(std::uint32_t v) { uint(v); }
  void u64(std::uint64_t v) { uint(v); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

  const std::vector<std::uint8_t>& data() const { return out_; }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

/// Bounds-checked reader; running off the end raises CorruptFileError
/// (truncation) with the configured error code.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, ErrorCode code) : data_(data), code_(code) {}

  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  template <class T>
  T uint() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  std::uint8_t u8() { return uint<std::uint8_t>(); }
  std::uint16_t u16() { return uint<std::uint16_t>(); }
  std::uint32_t u32() { return uint<std::uint32_t>(); }
  std::uint64_t u64() { return uint<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }

  std::size_t remaining() const { return data_.size() - pos_; }
  bool at_end() const { return pos_ == data_.size(); }

  [[noreturn]] void fail(CorruptKind kind, const std::string& message) const {
    throw CorruptFileError(code_, kind, message);
  }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      fail(CorruptKind::kTruncated, "needed " + std::to_string(n) + " bytes at offset " +
                                        std::to_string(pos_) + ", " +
                                        std::to_string(data_.size() - pos_) + " left");
    }
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  ErrorCode code_;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> data);

}  // namespace biomatch::detail
