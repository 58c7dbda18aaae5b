#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <random>

#include "kvsql/kv/owner.h"
#include "kvsql/kv/store.h"
#include "kvsql/kv/types.h"
#include "kvsql/txn/history.h"
#include "kvsql/wire/transport.h"

namespace kvsql::txn {

struct TxnError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Commit lost the first-committer-wins race (or found a live lock);
// retry with a fresh snapshot.
struct ConflictAbort : TxnError {
  wire::Vote vote;
  explicit ConflictAbort(wire::Vote v)
      : TxnError(v == wire::Vote::Locked
                     ? "aborted: key locked by concurrent transaction"
                     : "aborted: conflicting commit after snapshot"),
        vote(v) {}
};

enum class TxnStatus { Active, Committed, Aborted };

struct CommitResult {
  bool committed = false;
  kv::Timestamp commit_ts = 0;   // when committed
  std::string abort_reason;      // when aborted
};

// Deterministic 64-bit id stream (splitmix64); the default stream seeds
// from the OS so ids are unique across processes, tests inject a seed.
class TxnIdGen {
 public:
  TxnIdGen();
  explicit TxnIdGen(uint64_t seed) : state_(seed) {}
  uint64_t next();

 private:
  std::atomic<uint64_t> state_;
};

class Txn;

// Client-side transaction factory: one per process (or per worker task
// under the deterministic loopback). Cheap to copy around via shared
// pointers; safe for many concurrent transactions.
class TxnClient {
 public:
  TxnClient(wire::TransportPtr transport, wire::ServerId oracle_server = 0)
      : transport_(std::move(transport)), oracle_(oracle_server) {}

  void set_history(HistorySinkPtr sink) { history_ = std::move(sink); }
  void set_id_gen(std::shared_ptr<TxnIdGen> gen) { ids_ = std::move(gen); }

  Txn begin();

  // Server-local raw scan at an explicit snapshot; tooling only, no
  // write-buffer overlay.
  std::vector<kv::ScanItem> raw_scan(wire::ServerId server, const Bytes& start,
                                     const Bytes& end, kv::Timestamp snap,
                                     uint32_t limit);

  wire::Transport& transport() { return *transport_; }
  size_t n_servers() const { return transport_->cluster_size(); }

 private:
  friend class Txn;
  kv::Timestamp ts_get(wire::TsPurpose purpose);
  void commit_done(kv::Timestamp commit_ts);
  void emit(const HistoryEvent& e) {
    if (history_) history_->emit(e);
  }

  wire::TransportPtr transport_;
  wire::ServerId oracle_;
  HistorySinkPtr history_;
  std::shared_ptr<TxnIdGen> ids_ = std::make_shared<TxnIdGen>();
};

// Single-owner transaction context: snapshot timestamp plus a buffered
// write set. Writes stay client-side until commit; abort is free.
class Txn {
 public:
  static constexpr size_t kMaxWriteSet = 10000;

  uint64_t id() const { return id_; }
  kv::Timestamp snapshot_ts() const { return snapshot_ts_; }
  TxnStatus status() const { return status_; }
  size_t write_set_size() const { return buffer_.size(); }

  // Buffered value wins over the store (read-your-writes).
  std::optional<Bytes> get(const Bytes& key);
  void put(const Bytes& key, Bytes value);
  void del(const Bytes& key);

  // Two-phase commit over the write set's owner servers, ascending id.
  // Read-only transactions commit locally at the snapshot and never
  // abort. Throws ConflictAbort on a losing vote (status: aborted).
  CommitResult commit();
  void abort();

  ~Txn();

  Txn(Txn&& other) noexcept;
  Txn& operator=(Txn&& other) noexcept;
  Txn(const Txn&) = delete;
  Txn& operator=(const Txn&) = delete;

 private:
  friend class TxnClient;
  Txn(TxnClient* client, uint64_t id, kv::Timestamp snapshot);

  void require_active(const char* op) const;
  void send_aborts(const std::vector<wire::ServerId>& participants);

  TxnClient* client_;
  uint64_t id_;
  kv::Timestamp snapshot_ts_;
  TxnStatus status_ = TxnStatus::Active;
  // nullopt = tombstone
  std::map<Bytes, std::optional<Bytes>> buffer_;
};

}  // namespace kvsql::txn
