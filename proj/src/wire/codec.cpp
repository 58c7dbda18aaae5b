#include "kvsql/wire/codec.h"

namespace kvsql::wire {

MsgKind Message::kind() const { return kind_of(payload); }

MsgKind kind_of(const Payload& p) {
  struct V {
    MsgKind operator()(const TsGet&) { return MsgKind::TsGet; }
    MsgKind operator()(const TsReply&) { return MsgKind::TsReply; }
    MsgKind operator()(const Read&) { return MsgKind::Read; }
    MsgKind operator()(const ReadReply&) { return MsgKind::ReadReply; }
    MsgKind operator()(const Scan&) { return MsgKind::Scan; }
    MsgKind operator()(const ScanReply&) { return MsgKind::ScanReply; }
    MsgKind operator()(const Prepare&) { return MsgKind::Prepare; }
    MsgKind operator()(const PrepareReply&) { return MsgKind::PrepareReply; }
    MsgKind operator()(const Commit&) { return MsgKind::Commit; }
    MsgKind operator()(const CommitReply&) { return MsgKind::CommitReply; }
    MsgKind operator()(const Abort&) { return MsgKind::Abort; }
    MsgKind operator()(const AbortReply&) { return MsgKind::AbortReply; }
    MsgKind operator()(const CommitDone&) { return MsgKind::CommitDone; }
    MsgKind operator()(const CommitDoneReply&) {
      return MsgKind::CommitDoneReply;
    }
    MsgKind operator()(const ErrorReply&) { return MsgKind::ErrorReply; }
  };
  return std::visit(V{}, p);
}

bool is_known_kind(uint8_t code) {
  switch (static_cast<MsgKind>(code)) {
    case MsgKind::TsGet:
    case MsgKind::Read:
    case MsgKind::Scan:
    case MsgKind::Prepare:
    case MsgKind::Commit:
    case MsgKind::Abort:
    case MsgKind::CommitDone:
    case MsgKind::TsReply:
    case MsgKind::ReadReply:
    case MsgKind::ScanReply:
    case MsgKind::PrepareReply:
    case MsgKind::CommitReply:
    case MsgKind::AbortReply:
    case MsgKind::CommitDoneReply:
    case MsgKind::ErrorReply:
      return true;
  }
  return false;
}

const char* kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::TsGet: return "TS_GET";
    case MsgKind::Read: return "READ";
    case MsgKind::Scan: return "SCAN";
    case MsgKind::Prepare: return "PREPARE";
    case MsgKind::Commit: return "COMMIT";
    case MsgKind::Abort: return "ABORT";
    case MsgKind::CommitDone: return "COMMIT_DONE";
    case MsgKind::TsReply: return "TS_REPLY";
    case MsgKind::ReadReply: return "READ_REPLY";
    case MsgKind::ScanReply: return "SCAN_REPLY";
    case MsgKind::PrepareReply: return "PREPARE_REPLY";
    case MsgKind::CommitReply: return "COMMIT_REPLY";
    case MsgKind::AbortReply: return "ABORT_REPLY";
    case MsgKind::CommitDoneReply: return "COMMIT_DONE_REPLY";
    case MsgKind::ErrorReply: return "ERROR_REPLY";
  }
  return "UNKNOWN";
}

void ByteWriter::u16(uint16_t v) {
  buf_.push_back(static_cast<char>(v >> 8));
  buf_.push_back(static_cast<char>(v));
}

void ByteWriter::u32(uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<char>(v >> s));
}

void ByteWriter::u64(uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) buf_.push_back(static_cast<char>(v >> s));
}

void ByteWriter::str(BytesView s) {
  if (s.size() > kMaxFrameLen) throw EncodeError("byte string too long");
  u32(static_cast<uint32_t>(s.size()));
  buf_.append(s);
}

void ByteReader::need(std::size_t n, const char* what) {
  if (remaining() < n)
    throw Error{pos_, std::string("truncated frame: ") + what};
}

uint8_t ByteReader::u8() {
  need(1, "u8");
  return static_cast<uint8_t>(data_[pos_++]);
}

uint16_t ByteReader::u16() {
  need(2, "u16");
  uint16_t v = 0;
  for (int i = 0; i < 2; i++)
    v = static_cast<uint16_t>((v << 8) | static_cast<uint8_t>(data_[pos_++]));
  return v;
}

uint32_t ByteReader::u32() {
  need(4, "u32");
  uint32_t v = 0;
  for (int i = 0; i < 4; i++) v = (v << 8) | static_cast<uint8_t>(data_[pos_++]);
  return v;
}

uint64_t ByteReader::u64() {
  need(8, "u64");
  uint64_t v = 0;
  for (int i = 0; i < 8; i++) v = (v << 8) | static_cast<uint8_t>(data_[pos_++]);
  return v;
}

Bytes ByteReader::str() {
  uint32_t n = u32();
  if (remaining() < n)
    throw Error{pos_, "length prefix exceeds frame"};
  Bytes out(data_.substr(pos_, n));
  pos_ += n;
  return out;
}

namespace {

struct PayloadWriter {
  ByteWriter& w;

  void operator()(const TsGet& p) { w.u8(static_cast<uint8_t>(p.purpose)); }
  void operator()(const TsReply& p) { w.u64(p.ts); }
  void operator()(const Read& p) {
    w.str(p.key);
    w.u64(p.snapshot_ts);
  }
  void operator()(const ReadReply& p) {
    w.u8(static_cast<uint8_t>(p.status));
    w.u64(p.ts);
    w.str(p.value);
  }
  void operator()(const Scan& p) {
    w.str(p.start);
    w.str(p.end);
    w.u64(p.snapshot_ts);
    w.u32(p.limit);
  }
  void operator()(const ScanReply& p) {
    w.u32(static_cast<uint32_t>(p.entries.size()));
    for (const auto& e : p.entries) {
      w.str(e.key);
      w.u64(e.ts);
      w.str(e.value);
    }
  }
  void operator()(const Prepare& p) {
    w.u64(p.txn_id);
    w.u64(p.snapshot_ts);
    w.u32(static_cast<uint32_t>(p.writes.size()));
    for (const auto& e : p.writes) {
      w.str(e.key);
      w.u8(e.tombstone ? 1 : 0);
      w.str(e.value);
    }
  }
  void operator()(const PrepareReply& p) { w.u8(static_cast<uint8_t>(p.vote)); }
  void operator()(const Commit& p) {
    w.u64(p.txn_id);
    w.u64(p.commit_ts);
  }
  void operator()(const CommitReply&) {}
  void operator()(const Abort& p) { w.u64(p.txn_id); }
  void operator()(const AbortReply&) {}
  void operator()(const CommitDone& p) { w.u64(p.commit_ts); }
  void operator()(const CommitDoneReply&) {}
  void operator()(const ErrorReply& p) {
    w.u8(static_cast<uint8_t>(p.code));
    w.str(p.detail);
  }
};

TsPurpose decode_purpose(ByteReader& r) {
  uint8_t v = r.u8();
  if (v > 1) throw ByteReader::Error{r.pos() - 1, "bad ts purpose"};
  return static_cast<TsPurpose>(v);
}

ReadStatus decode_read_status(ByteReader& r) {
  uint8_t v = r.u8();
  if (v > 2) throw ByteReader::Error{r.pos() - 1, "bad read status"};
  return static_cast<ReadStatus>(v);
}

Vote decode_vote(ByteReader& r) {
  uint8_t v = r.u8();
  if (v > 2) throw ByteReader::Error{r.pos() - 1, "bad vote"};
  return static_cast<Vote>(v);
}

Payload decode_payload(MsgKind kind, ByteReader& r) {
  switch (kind) {
    case MsgKind::TsGet:
      return TsGet{decode_purpose(r)};
    case MsgKind::TsReply:
      return TsReply{r.u64()};
    case MsgKind::Read: {
      Read p;
      p.key = r.str();
      p.snapshot_ts = r.u64();
      return p;
    }
    case MsgKind::ReadReply: {
      ReadReply p;
      p.status = decode_read_status(r);
      p.ts = r.u64();
      p.value = r.str();
      return p;
    }
    case MsgKind::Scan: {
      Scan p;
      p.start = r.str();
      p.end = r.str();
      p.snapshot_ts = r.u64();
      p.limit = r.u32();
      return p;
    }
    case MsgKind::ScanReply: {
      ScanReply p;
      uint32_t n = r.u32();
      p.entries.reserve(std::min<uint32_t>(n, 4096));
      for (uint32_t i = 0; i < n; i++) {
        ScanEntry e;
        e.key = r.str();
        e.ts = r.u64();
        e.value = r.str();
        p.entries.push_back(std::move(e));
      }
      return p;
    }
    case MsgKind::Prepare: {
      Prepare p;
      p.txn_id = r.u64();
      p.snapshot_ts = r.u64();
      uint32_t n = r.u32();
      p.writes.reserve(std::min<uint32_t>(n, 4096));
      for (uint32_t i = 0; i < n; i++) {
        WriteEntry e;
        e.key = r.str();
        e.tombstone = r.u8() != 0;
        e.value = r.str();
        p.writes.push_back(std::move(e));
      }
      return p;
    }
    case MsgKind::PrepareReply:
      return PrepareReply{decode_vote(r)};
    case MsgKind::Commit: {
      Commit p;
      p.txn_id = r.u64();
      p.commit_ts = r.u64();
      return p;
    }
    case MsgKind::CommitReply:
      return CommitReply{};
    case MsgKind::Abort:
      return Abort{r.u64()};
    case MsgKind::AbortReply:
      return AbortReply{};
    case MsgKind::CommitDone:
      return CommitDone{r.u64()};
    case MsgKind::CommitDoneReply:
      return CommitDoneReply{};
    case MsgKind::ErrorReply: {
      ErrorReply p;
      uint8_t c = r.u8();
      if (c < 1 || c > 5) throw ByteReader::Error{r.pos() - 1, "bad error code"};
      p.code = static_cast<ErrCode>(c);
      p.detail = r.str();
      return p;
    }
  }
  throw ByteReader::Error{0, "unknown kind"};
}

}  // namespace

Bytes encode(const Message& msg) {
  ByteWriter body;
  body.u8(static_cast<uint8_t>(msg.kind()));
  body.u64(msg.request_id);
  std::visit(PayloadWriter{body}, msg.payload);
  if (body.size() + 4 > kMaxFrameLen) throw EncodeError("frame exceeds 16 MiB");

  ByteWriter out;
  out.u32(static_cast<uint32_t>(body.size()));
  Bytes b = body.take();
  out.raw(b);
  return out.take();
}

FrameHeader read_frame_header(BytesView prefix4) {
  FrameHeader h;
  if (prefix4.size() < 4) {
    h.error = {0, "truncated frame: length prefix"};
    return h;
  }
  uint32_t n = 0;
  for (int i = 0; i < 4; i++) n = (n << 8) | static_cast<uint8_t>(prefix4[i]);
  if (n + 4 > kMaxFrameLen) {
    h.error = {0, "frame exceeds 16 MiB"};
    return h;
  }
  if (n < 9) {
    h.error = {0, "frame too short for kind and request id"};
    return h;
  }
  h.ok = true;
  h.body_len = n;
  return h;
}

DecodeResult decode_body(BytesView body) {
  DecodeResult res;
  ByteReader r(body);
  try {
    uint8_t code = r.u8();
    if (!is_known_kind(code)) {
      res.error = {r.pos() - 1, "unknown kind"};
      return res;
    }
    MsgKind kind = static_cast<MsgKind>(code);
    res.msg.request_id = r.u64();
    res.msg.payload = decode_payload(kind, r);
    if (r.remaining() != 0) {
      res.error = {r.pos(), "trailing garbage within frame"};
      return res;
    }
    res.ok = true;
    return res;
  } catch (const ByteReader::Error& e) {
    res.error = {e.offset, e.reason};
    return res;
  }
}

DecodeResult decode(BytesView frame) {
  DecodeResult res;
  FrameHeader h = read_frame_header(frame);
  if (!h.ok) {
    res.error = h.error;
    return res;
  }
  if (frame.size() < 4 + static_cast<std::size_t>(h.body_len)) {
    res.error = {frame.size(), "truncated frame: body"};
    return res;
  }
  if (frame.size() > 4 + static_cast<std::size_t>(h.body_len)) {
    res.error = {4 + static_cast<std::size_t>(h.body_len),
                 "trailing garbage after frame"};
    return res;
  }
  res = decode_body(frame.substr(4));
  if (!res.ok) res.error.offset += 4;
  return res;
}

}  // namespace kvsql::wire
