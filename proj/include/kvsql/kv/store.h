#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "kvsql/kv/types.h"
#include "kvsql/wire/message.h"

namespace kvsql::kv {

struct ProtocolError : std::runtime_error {
  wire::ErrCode code;
  ProtocolError(wire::ErrCode c, const std::string& what)
      : std::runtime_error(what), code(c) {}
};

struct ReadResult {
  wire::ReadStatus status = wire::ReadStatus::NotFound;
  Timestamp ts = 0;
  Bytes value;

  bool found() const { return status == wire::ReadStatus::Found; }
};

struct ScanItem {
  Bytes key;
  Timestamp ts = 0;
  Bytes value;
};

// Staged write awaiting the second commit phase. Exists only between a
// successful PREPARE and the matching COMMIT/ABORT.
struct PreparedLock {
  uint64_t txn_id = 0;
  Timestamp snapshot_ts = 0;
  std::optional<Bytes> staged;  // nullopt = tombstone
  std::chrono::steady_clock::time_point lease_expiry;
};

struct VersionChain {
  std::vector<Version> versions;  // sorted by ts descending
  std::optional<PreparedLock> lock;
};

// Multi-version store for the keys this server owns. Readers resolve
// against committed versions only; prepared-but-uncommitted data is
// invisible and reads never wait on a lock.
class Store {
 public:
  explicit Store(std::chrono::milliseconds lock_lease =
                     std::chrono::milliseconds(30000))
      : lock_lease_(lock_lease) {}

  ReadResult read(BytesView key, Timestamp snapshot_ts) const;

  // Keys in [start, end), each resolved per read semantics, ascending,
  // at most limit entries.
  std::vector<ScanItem> scan(BytesView start, BytesView end,
                             Timestamp snapshot_ts, uint32_t limit) const;

  // All-or-nothing: either every key gets a lock and the vote is Ok, or
  // nothing is staged. A committed version newer than snapshot_ts wins
  // over the preparing transaction (first committer wins); a live lock
  // by another transaction yields Locked. A lease-expired lock is
  // unilaterally aborted.
  wire::Vote prepare(uint64_t txn_id, Timestamp snapshot_ts,
                     const std::vector<wire::WriteEntry>& writes);

  // Applies every staged write at commit_ts and releases the locks.
  // Replays of an already-applied commit ack without change; a commit
  // for a transaction never prepared here throws UnknownTxn.
  // on_apply, when set, is called once per applied record while the
  // commit is still atomic with respect to other mutations.
  using ApplyHook =
      std::function<void(BytesView key, Timestamp ts,
                         const std::optional<Bytes>& value)>;
  void commit(uint64_t txn_id, Timestamp commit_ts,
              const ApplyHook& on_apply = nullptr);

  // Releases txn_id's locks and discards staged data. Unknown txn is a
  // no-op; always acks.
  void abort(uint64_t txn_id);

  // Keeps, per chain, the newest version at or below the watermark plus
  // everything above it; drops chains whose sole survivor is a tombstone
  // at or below the watermark. Returns number of versions removed.
  size_t gc(Timestamp watermark);

  // Installs a committed version directly; used by log replay before the
  // server goes live ("before" is the caller's responsibility).
  void install(const Bytes& key, Timestamp ts, std::optional<Bytes> value);

  size_t key_count() const;

 private:
  wire::Vote prepare_locked(uint64_t txn_id, Timestamp snapshot_ts,
                            const std::vector<wire::WriteEntry>& writes);
  void abort_locked_txn(uint64_t txn_id);  // caller holds mu_ exclusively

  mutable std::shared_mutex mu_;
  std::map<Bytes, VersionChain> chains_;
  // txn id -> keys it holds locks on
  std::unordered_map<uint64_t, std::vector<Bytes>> prepared_;
  // txn id -> commit ts, for replay detection
  std::unordered_map<uint64_t, Timestamp> committed_;
  std::chrono::milliseconds lock_lease_;
};

}  // namespace kvsql::kv
