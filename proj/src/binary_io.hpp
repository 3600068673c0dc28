#pragma once

// Little-endian fixed-width encoding helpers shared by the page store and the
// index file.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "bregforest/error.hpp"

namespace bregforest::detail {

inline void put_u32(std::byte* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::byte>((v >> (8 * i)) & 0xFFu);
}

inline void put_u64(std::byte* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::byte>((v >> (8 * i)) & 0xFFu);
}

inline std::uint32_t get_u32(const std::byte* in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(const std::byte* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return v;
}

inline void put_f32(std::byte* out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
inline float get_f32(const std::byte* in) { return std::bit_cast<float>(get_u32(in)); }

// Append-only little-endian writer.
class ByteWriter {
 public:
  void u64(std::uint64_t v) {
    const auto at = grow(8);
    put_u64(buffer_.data() + at, v);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) {
    const auto at = grow(4);
    put_f32(buffer_.data() + at, v);
  }
  void bytes(std::span<const std::byte> data) { buffer_.insert(buffer_.end(), data.begin(), data.end()); }
  void patch_u64(std::size_t at, std::uint64_t v) { put_u64(buffer_.data() + at, v); }

  std::size_t size() const { return buffer_.size(); }
  std::vector<std::byte>& buffer() { return buffer_; }

 private:
  std::size_t grow(std::size_t n) {
    const auto at = buffer_.size();
    buffer_.resize(at + n);
    return at;
  }
  std::vector<std::byte> buffer_;
};

// Bounds-checked reader; running past the end throws TruncatedFile.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> data, std::size_t pos = 0) : data_(data), pos_(pos) {}

  std::uint64_t u64() {
    need(8);
    const auto v = get_u64(data_.data() + pos_);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  float f32() {
    need(4);
    const auto v = get_f32(data_.data() + pos_);
    pos_ += 4;
    return v;
  }
  std::span<const std::byte> bytes(std::size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  void seek(std::size_t pos) {
    if (pos > data_.size()) throw TruncatedFile("index file truncated: offset " + std::to_string(pos) + " past end");
    pos_ = pos;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size() || pos_ + n < pos_) {
      throw TruncatedFile("index file truncated: need " + std::to_string(n) + " bytes at offset " +
                          std::to_string(pos_) + ", file has " + std::to_string(data_.size()));
    }
  }
  std::span<const std::byte> data_;
  std::size_t pos_;
};

}  // namespace bregforest::detail
