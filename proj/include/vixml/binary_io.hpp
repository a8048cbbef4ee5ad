// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "vixml/common.hpp"

namespace vixml::bin {

// Little-endian encoders. Values are assembled byte by byte so the output is
// independent of host endianness.
template <typename U>
void put_uint(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f32(std::string& out, float f) { put_uint(out, std::bit_cast<std::uint32_t>(f)); }

/// Bounds-checked little-endian reader over an in-memory buffer.
class Reader {
 public:
  Reader(std::string_view buf, std::string context) : buf_(buf), context_(std::move(context)) {}

  template <typename U>
  U get_uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }

  float get_f32() { return std::bit_cast<float>(get_uint<std::uint32_t>()); }

  std::string_view get_bytes(std::size_t n) {
    need(n);
    auto s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == buf_.size(); }
  std::size_t offset() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) {
      data_error(context_ + ": truncated record at byte offset " + std::to_string(pos_));
    }
  }

  std::string_view buf_;
  std::string context_;
  std::size_t pos_ = 0;
};

}  // namespace vixml::bin
