#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "kvsql/common/bytes.h"

namespace kvsql::wire {

using ServerId = uint32_t;

enum class MsgKind : uint8_t {
  TsGet = 0x01,
  Read = 0x02,
  Scan = 0x03,
  Prepare = 0x04,
  Commit = 0x05,
  Abort = 0x06,
  CommitDone = 0x07,
  TsReply = 0x81,
  ReadReply = 0x82,
  ScanReply = 0x83,
  PrepareReply = 0x84,
  CommitReply = 0x85,
  AbortReply = 0x86,
  CommitDoneReply = 0x87,
  ErrorReply = 0xE0,
};

bool is_known_kind(uint8_t code);
const char* kind_name(MsgKind k);

// Timestamp purpose: a snapshot request may be held back by the oracle
// until older in-flight commits have fully applied; a commit request is
// issued immediately and registered as in-flight.
enum class TsPurpose : uint8_t { Snapshot = 0, Commit = 1 };

enum class ReadStatus : uint8_t { Found = 0, NotFound = 1, Tombstone = 2 };

enum class Vote : uint8_t { Ok = 0, Conflict = 1, Locked = 2 };

enum class ErrCode : uint8_t {
  NotOwner = 1,
  UnknownTxn = 2,
  DuplicatePrepare = 3,
  BadRequest = 4,
  NotOracle = 5,
};

struct TsGet {
  TsPurpose purpose = TsPurpose::Snapshot;
  bool operator==(const TsGet&) const = default;
};
struct TsReply {
  uint64_t ts = 0;
  bool operator==(const TsReply&) const = default;
};
struct Read {
  Bytes key;
  uint64_t snapshot_ts = 0;
  bool operator==(const Read&) const = default;
};
struct ReadReply {
  ReadStatus status = ReadStatus::NotFound;
  uint64_t ts = 0;
  Bytes value;
  bool operator==(const ReadReply&) const = default;
};
struct Scan {
  Bytes start;
  Bytes end;
  uint64_t snapshot_ts = 0;
  uint32_t limit = 0;
  bool operator==(const Scan&) const = default;
};
struct ScanEntry {
  Bytes key;
  uint64_t ts = 0;
  Bytes value;
  bool operator==(const ScanEntry&) const = default;
};
struct ScanReply {
  std::vector<ScanEntry> entries;
  bool operator==(const ScanReply&) const = default;
};
struct WriteEntry {
  Bytes key;
  bool tombstone = false;
  Bytes value;  // empty when tombstone
  bool operator==(const WriteEntry&) const = default;
};
struct Prepare {
  uint64_t txn_id = 0;
  uint64_t snapshot_ts = 0;
  std::vector<WriteEntry> writes;
  bool operator==(const Prepare&) const = default;
};
struct PrepareReply {
  Vote vote = Vote::Ok;
  bool operator==(const PrepareReply&) const = default;
};
struct Commit {
  uint64_t txn_id = 0;
  uint64_t commit_ts = 0;
  bool operator==(const Commit&) const = default;
};
struct CommitReply {
  bool operator==(const CommitReply&) const = default;
};
struct Abort {
  uint64_t txn_id = 0;
  bool operator==(const Abort&) const = default;
};
struct AbortReply {
  bool operator==(const AbortReply&) const = default;
};
struct CommitDone {
  uint64_t commit_ts = 0;
  bool operator==(const CommitDone&) const = default;
};
struct CommitDoneReply {
  bool operator==(const CommitDoneReply&) const = default;
};
struct ErrorReply {
  ErrCode code = ErrCode::BadRequest;
  std::string detail;
  bool operator==(const ErrorReply&) const = default;
};

using Payload =
    std::variant<TsGet, TsReply, Read, ReadReply, Scan, ScanReply, Prepare,
                 PrepareReply, Commit, CommitReply, Abort, AbortReply,
                 CommitDone, CommitDoneReply, ErrorReply>;

struct Message {
  uint64_t request_id = 0;
  Payload payload;

  MsgKind kind() const;
  bool operator==(const Message&) const = default;
};

MsgKind kind_of(const Payload& p);

}  // namespace kvsql::wire
