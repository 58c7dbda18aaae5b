#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "kvsql/wire/message.h"

namespace kvsql::wire {

// Frame layout: 4-byte big-endian length of the remainder, then
// 1-byte kind code, 8-byte big-endian request id, then the payload
// fields in declared order. Integers are big-endian fixed-width; byte
// strings carry a 4-byte length prefix.

constexpr std::size_t kMaxFrameLen = 16 << 20;

struct EncodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DecodeError {
  std::size_t offset = 0;
  std::string reason;
};

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(uint16_t v);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void str(BytesView s);
  void raw(BytesView s) { buf_.append(s); }

  Bytes take() { return std::move(buf_); }
  std::size_t size() const { return buf_.size(); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(BytesView data) : data_(data) {}

  // Each accessor throws ReaderError{offset, reason} on exhaustion.
  struct Error {
    std::size_t offset;
    std::string reason;
  };

  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t u64();
  Bytes str();

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what);
  BytesView data_;
  std::size_t pos_ = 0;
};

// Encodes a full frame (length prefix included). Throws EncodeError when
// a field exceeds its declared bound or the frame would exceed 16 MiB.
Bytes encode(const Message& msg);

struct DecodeResult {
  bool ok = false;
  Message msg;
  DecodeError error;
};

// Decodes one full frame. Never throws on malformed input; the result
// carries the offset and reason instead.
DecodeResult decode(BytesView frame);

// Splits the 4-byte length prefix; returns the body length or an error.
// Used by transports that read the prefix separately.
struct FrameHeader {
  bool ok = false;
  uint32_t body_len = 0;
  DecodeError error;
};
FrameHeader read_frame_header(BytesView prefix4);

// Decodes kind + request id + payload (a frame without its length
// prefix, as handed over by a transport that already framed the body).
DecodeResult decode_body(BytesView body);

}  // namespace kvsql::wire
