#include "kvsql/kv/store.h"

#include <algorithm>

namespace kvsql::kv {

namespace {

// versions are sorted by ts descending; returns the first with ts <= at.
const Version* visible_at(const std::vector<Version>& versions, Timestamp at) {
  for (const auto& v : versions) {
    if (v.ts <= at) return &v;
  }
  return nullptr;
}

ReadResult resolve(const VersionChain& chain, Timestamp snapshot_ts) {
  ReadResult r;
  const Version* v = visible_at(chain.versions, snapshot_ts);
  if (!v) {
    r.status = wire::ReadStatus::NotFound;
    return r;
  }
  if (v->tombstone()) {
    r.status = wire::ReadStatus::Tombstone;
    r.ts = v->ts;
    return r;
  }
  r.status = wire::ReadStatus::Found;
  r.ts = v->ts;
  r.value = *v->value;
  return r;
}

}  // namespace

ReadResult Store::read(BytesView key, Timestamp snapshot_ts) const {
  std::shared_lock lk(mu_);
  auto it = chains_.find(Bytes(key));
  if (it == chains_.end()) return {};
  return resolve(it->second, snapshot_ts);
}

std::vector<ScanItem> Store::scan(BytesView start, BytesView end,
                                  Timestamp snapshot_ts,
                                  uint32_t limit) const {
  std::vector<ScanItem> out;
  std::shared_lock lk(mu_);
  auto it = chains_.lower_bound(Bytes(start));
  for (; it != chains_.end() && out.size() < limit; ++it) {
    if (it->first >= Bytes(end)) break;
    ReadResult r = resolve(it->second, snapshot_ts);
    if (!r.found()) continue;
    out.push_back({it->first, r.ts, std::move(r.value)});
  }
  return out;
}

wire::Vote Store::prepare(uint64_t txn_id, Timestamp snapshot_ts,
                          const std::vector<wire::WriteEntry>& writes) {
  std::unique_lock lk(mu_);
  return prepare_locked(txn_id, snapshot_ts, writes);
}

wire::Vote Store::prepare_locked(uint64_t txn_id, Timestamp snapshot_ts,
                                 const std::vector<wire::WriteEntry>& writes) {
  if (prepared_.count(txn_id) || committed_.count(txn_id))
    throw ProtocolError(wire::ErrCode::DuplicatePrepare,
                        "txn already prepared on this server");

  auto now = std::chrono::steady_clock::now();
  // Validation pass: nothing is staged unless every key passes.
  for (const auto& w : writes) {
    auto it = chains_.find(w.key);
    if (it == chains_.end()) continue;
    if (it->second.lock && it->second.lock->lease_expiry <= now) {
      // The coordinator of that txn is presumed dead; drop its locks.
      abort_locked_txn(it->second.lock->txn_id);
      it = chains_.find(w.key);
      if (it == chains_.end()) continue;
    }
    const VersionChain& chain = it->second;
    if (!chain.versions.empty() && chain.versions.front().ts > snapshot_ts)
      return wire::Vote::Conflict;
    if (chain.lock && chain.lock->txn_id != txn_id)
      return wire::Vote::Locked;
  }

  std::vector<Bytes> keys;
  keys.reserve(writes.size());
  for (const auto& w : writes) {
    VersionChain& chain = chains_[w.key];
    PreparedLock lock;
    lock.txn_id = txn_id;
    lock.snapshot_ts = snapshot_ts;
    lock.staged = w.tombstone ? std::nullopt : std::make_optional(w.value);
    lock.lease_expiry = now + lock_lease_;
    chain.lock = std::move(lock);
    keys.push_back(w.key);
  }
  prepared_[txn_id] = std::move(keys);
  return wire::Vote::Ok;
}

void Store::commit(uint64_t txn_id, Timestamp commit_ts,
                   const ApplyHook& on_apply) {
  std::unique_lock lk(mu_);
  auto it = prepared_.find(txn_id);
  if (it == prepared_.end()) {
    auto done = committed_.find(txn_id);
    if (done != committed_.end() && done->second == commit_ts) return;
    throw ProtocolError(wire::ErrCode::UnknownTxn,
                        "commit for txn not prepared here");
  }
  for (const auto& key : it->second) {
    VersionChain& chain = chains_[key];
    if (!chain.lock || chain.lock->txn_id != txn_id) continue;
    Version v{commit_ts, std::move(chain.lock->staged)};
    chain.lock.reset();
    auto pos = std::lower_bound(
        chain.versions.begin(), chain.versions.end(), commit_ts,
        [](const Version& a, Timestamp t) { return a.ts > t; });
    if (on_apply) on_apply(key, commit_ts, v.value);
    chain.versions.insert(pos, std::move(v));
  }
  prepared_.erase(it);
  committed_[txn_id] = commit_ts;
}

void Store::abort(uint64_t txn_id) {
  std::unique_lock lk(mu_);
  abort_locked_txn(txn_id);
}

void Store::abort_locked_txn(uint64_t txn_id) {
  auto it = prepared_.find(txn_id);
  if (it == prepared_.end()) return;
  for (const auto& key : it->second) {
    auto cit = chains_.find(key);
    if (cit == chains_.end()) continue;
    VersionChain& chain = cit->second;
    if (chain.lock && chain.lock->txn_id == txn_id) chain.lock.reset();
    if (chain.versions.empty() && !chain.lock) chains_.erase(cit);
  }
  prepared_.erase(it);
}

size_t Store::gc(Timestamp watermark) {
  std::unique_lock lk(mu_);
  size_t removed = 0;
  for (auto it = chains_.begin(); it != chains_.end();) {
    VersionChain& chain = it->second;
    auto& vs = chain.versions;
    // First index with ts <= watermark (descending order): keep it,
    // drop everything after.
    size_t keep_end = vs.size();
    for (size_t i = 0; i < vs.size(); i++) {
      if (vs[i].ts <= watermark) {
        keep_end = i + 1;
        break;
      }
    }
    removed += vs.size() - keep_end;
    vs.resize(keep_end);
    bool sole_dead_tombstone = vs.size() == 1 && vs[0].tombstone() &&
                               vs[0].ts <= watermark && !chain.lock;
    if (sole_dead_tombstone) {
      removed += 1;
      it = chains_.erase(it);
    } else if (vs.empty() && !chain.lock) {
      it = chains_.erase(it);
    } else {
      ++it;
    }
  }
  return removed;
}

void Store::install(const Bytes& key, Timestamp ts,
                    std::optional<Bytes> value) {
  std::unique_lock lk(mu_);
  VersionChain& chain = chains_[key];
  Version v{ts, std::move(value)};
  auto pos = std::lower_bound(
      chain.versions.begin(), chain.versions.end(), ts,
      [](const Version& a, Timestamp t) { return a.ts > t; });
  chain.versions.insert(pos, std::move(v));
}

size_t Store::key_count() const {
  std::shared_lock lk(mu_);
  return chains_.size();
}

}  // namespace kvsql::kv
