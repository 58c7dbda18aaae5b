#include "kvsql/txn/txn.h"

#include <algorithm>
#include <thread>

namespace kvsql::txn {

namespace {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

TxnIdGen::TxnIdGen() {
  std::random_device rd;
  state_ = (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

uint64_t TxnIdGen::next() {
  uint64_t s = state_.fetch_add(0x9e3779b97f4a7c15ull);
  uint64_t z = s + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z ? z : 1;  // 0 is reserved
}

kv::Timestamp TxnClient::ts_get(wire::TsPurpose purpose) {
  wire::Message reply =
      transport_->request(oracle_, wire::Message{0, wire::TsGet{purpose}});
  if (const auto* r = std::get_if<wire::TsReply>(&reply.payload))
    return r->ts;
  if (const auto* e = std::get_if<wire::ErrorReply>(&reply.payload))
    throw TxnError("oracle error: " + e->detail);
  throw TxnError("unexpected reply to TS_GET");
}

void TxnClient::commit_done(kv::Timestamp commit_ts) {
  wire::Message reply = transport_->request(
      oracle_, wire::Message{0, wire::CommitDone{commit_ts}});
  if (!std::holds_alternative<wire::CommitDoneReply>(reply.payload))
    throw TxnError("unexpected reply to COMMIT_DONE");
}

Txn TxnClient::begin() {
  kv::Timestamp snap = ts_get(wire::TsPurpose::Snapshot);
  uint64_t id = ids_->next();
  emit({EventKind::Begin, id, {}, snap});
  return Txn(this, id, snap);
}

std::vector<kv::ScanItem> TxnClient::raw_scan(wire::ServerId server,
                                              const Bytes& start,
                                              const Bytes& end,
                                              kv::Timestamp snap,
                                              uint32_t limit) {
  wire::Message reply = transport_->request(
      server, wire::Message{0, wire::Scan{start, end, snap, limit}});
  if (const auto* r = std::get_if<wire::ScanReply>(&reply.payload)) {
    std::vector<kv::ScanItem> out;
    out.reserve(r->entries.size());
    for (const auto& e : r->entries) out.push_back({e.key, e.ts, e.value});
    return out;
  }
  if (const auto* e = std::get_if<wire::ErrorReply>(&reply.payload))
    throw TxnError("scan error: " + e->detail);
  throw TxnError("unexpected reply to SCAN");
}

Txn::Txn(TxnClient* client, uint64_t id, kv::Timestamp snapshot)
    : client_(client), id_(id), snapshot_ts_(snapshot) {}

Txn::Txn(Txn&& other) noexcept
    : client_(other.client_),
      id_(other.id_),
      snapshot_ts_(other.snapshot_ts_),
      status_(other.status_),
      buffer_(std::move(other.buffer_)) {
  other.client_ = nullptr;
}

Txn& Txn::operator=(Txn&& other) noexcept {
  if (this != &other) {
    if (client_ && status_ == TxnStatus::Active) {
      status_ = TxnStatus::Aborted;
      client_->emit({EventKind::Abort, id_, {}, 0});
    }
    client_ = other.client_;
    id_ = other.id_;
    snapshot_ts_ = other.snapshot_ts_;
    status_ = other.status_;
    buffer_ = std::move(other.buffer_);
    other.client_ = nullptr;
  }
  return *this;
}

Txn::~Txn() {
  // Dropping an active context aborts it; nothing is staged server-side
  // before commit, so this is purely local.
  if (client_ && status_ == TxnStatus::Active) {
    status_ = TxnStatus::Aborted;
    client_->emit({EventKind::Abort, id_, {}, 0});
  }
}

void Txn::require_active(const char* op) const {
  if (status_ != TxnStatus::Active)
    throw TxnError(std::string(op) + " on inactive transaction");
}

std::optional<Bytes> Txn::get(const Bytes& key) {
  require_active("get");
  auto it = buffer_.find(key);
  if (it != buffer_.end()) {
    HistoryEvent e{EventKind::Read, id_, key, snapshot_ts_};
    if (it->second) {
      e.has_value = true;
      e.value = *it->second;
    }
    client_->emit(e);
    return it->second;  // nullopt = our own tombstone
  }

  wire::ServerId owner =
      kv::owner_of(key, static_cast<uint32_t>(client_->n_servers()));
  wire::Message reply = client_->transport().request(
      owner, wire::Message{0, wire::Read{key, snapshot_ts_}});
  if (const auto* e = std::get_if<wire::ErrorReply>(&reply.payload))
    throw TxnError("read error: " + e->detail);
  const auto* r = std::get_if<wire::ReadReply>(&reply.payload);
  if (!r) throw TxnError("unexpected reply to READ");

  HistoryEvent ev{EventKind::Read, id_, key, snapshot_ts_};
  std::optional<Bytes> out;
  if (r->status == wire::ReadStatus::Found) {
    ev.has_value = true;
    ev.value = r->value;
    out = r->value;
  }
  client_->emit(ev);
  return out;
}

void Txn::put(const Bytes& key, Bytes value) {
  require_active("put");
  if (key.empty() || key.size() > kMaxKeyLen) throw TxnError("bad key length");
  if (value.size() > kMaxValueLen) throw TxnError("value too large");
  if (buffer_.size() >= kMaxWriteSet && !buffer_.count(key))
    throw TxnError("write set exceeds 10000 entries");
  HistoryEvent e{EventKind::Write, id_, key, snapshot_ts_};
  e.has_value = true;
  e.value = value;
  client_->emit(e);
  buffer_[key] = std::move(value);
}

void Txn::del(const Bytes& key) {
  require_active("delete");
  if (key.empty() || key.size() > kMaxKeyLen) throw TxnError("bad key length");
  if (buffer_.size() >= kMaxWriteSet && !buffer_.count(key))
    throw TxnError("write set exceeds 10000 entries");
  HistoryEvent e{EventKind::Write, id_, key, snapshot_ts_};
  e.tombstone = true;
  client_->emit(e);
  buffer_[key] = std::nullopt;
}

void Txn::send_aborts(const std::vector<wire::ServerId>& participants) {
  for (wire::ServerId s : participants) {
    try {
      client_->transport().request(s, wire::Message{0, wire::Abort{id_}});
    } catch (const wire::TransportError&) {
      // Best effort; an unreachable participant drops the locks when the
      // lease expires.
    }
  }
}

CommitResult Txn::commit() {
  require_active("commit");

  if (buffer_.empty()) {
    // Read-only: nothing to stage, commit at the snapshot itself.
    status_ = TxnStatus::Committed;
    client_->emit({EventKind::Commit, id_, {}, snapshot_ts_});
    return {true, snapshot_ts_, {}};
  }

  // Group the write set by owner, ascending server id (buffer_ is
  // key-ordered, the map regroups deterministically).
  std::map<wire::ServerId, std::vector<wire::WriteEntry>> by_server;
  for (const auto& [key, val] : buffer_) {
    wire::WriteEntry w;
    w.key = key;
    w.tombstone = !val.has_value();
    if (val) w.value = *val;
    by_server[kv::owner_of(key, static_cast<uint32_t>(client_->n_servers()))]
        .push_back(std::move(w));
  }
  std::vector<wire::ServerId> participants;
  participants.reserve(by_server.size());
  for (const auto& [sid, _] : by_server) participants.push_back(sid);

  // Phase one.
  for (const auto& [sid, writes] : by_server) {
    wire::Vote vote;
    try {
      wire::Message reply = client_->transport().request(
          sid, wire::Message{0, wire::Prepare{id_, snapshot_ts_, writes}});
      if (const auto* e = std::get_if<wire::ErrorReply>(&reply.payload)) {
        send_aborts(participants);
        status_ = TxnStatus::Aborted;
        client_->emit({EventKind::Abort, id_, {}, 0});
        throw TxnError("prepare error: " + e->detail);
      }
      const auto* r = std::get_if<wire::PrepareReply>(&reply.payload);
      if (!r) throw TxnError("unexpected reply to PREPARE");
      vote = r->vote;
    } catch (const wire::TransportError& te) {
      send_aborts(participants);
      status_ = TxnStatus::Aborted;
      client_->emit({EventKind::Abort, id_, {}, 0});
      throw TxnError(std::string("transport failure during prepare: ") +
                     te.what());
    }
    if (vote != wire::Vote::Ok) {
      send_aborts(participants);
      status_ = TxnStatus::Aborted;
      client_->emit({EventKind::Abort, id_, {}, 0});
      throw ConflictAbort(vote);
    }
  }

  // All voted ok; fetch the commit timestamp. Failure here still aborts
  // cleanly: no commit message has been sent.
  kv::Timestamp commit_ts;
  try {
    commit_ts = client_->ts_get(wire::TsPurpose::Commit);
  } catch (const std::exception& e) {
    send_aborts(participants);
    status_ = TxnStatus::Aborted;
    client_->emit({EventKind::Abort, id_, {}, 0});
    throw TxnError(std::string("commit timestamp unavailable: ") + e.what());
  }

  // Commit point passed: every participant must apply. Commit is
  // idempotent, so retry until acked.
  for (wire::ServerId sid : participants) {
    for (int attempt = 0;; attempt++) {
      try {
        wire::Message reply = client_->transport().request(
            sid, wire::Message{0, wire::Commit{id_, commit_ts}});
        if (const auto* e = std::get_if<wire::ErrorReply>(&reply.payload))
          throw TxnError("commit refused: " + e->detail);
        if (!std::holds_alternative<wire::CommitReply>(reply.payload))
          throw TxnError("unexpected reply to COMMIT");
        break;
      } catch (const wire::TransportError&) {
        if (attempt >= 100)
          throw TxnError(
              "commit outcome is durable but a participant stayed "
              "unreachable");
        std::this_thread::sleep_for(std::chrono::milliseconds(
            std::min(1000, 10 * (attempt + 1))));
      }
    }
  }
  // The transaction is committed regardless of what happens to the
  // oracle notification; an undelivered one is cleaned up by the
  // in-flight lease.
  for (int attempt = 0; attempt < 5; attempt++) {
    try {
      client_->commit_done(commit_ts);
      break;
    } catch (const std::exception&) {
      if (attempt == 4) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(10 * (attempt + 1)));
    }
  }

  status_ = TxnStatus::Committed;
  client_->emit({EventKind::Commit, id_, {}, commit_ts});
  return {true, commit_ts, {}};
}

void Txn::abort() {
  require_active("abort");
  buffer_.clear();
  status_ = TxnStatus::Aborted;
  client_->emit({EventKind::Abort, id_, {}, 0});
}

}  // namespace kvsql::txn
