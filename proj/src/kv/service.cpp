#include "kvsql/kv/service.h"

#include <filesystem>

#include "kvsql/kv/owner.h"

namespace kvsql::kv {

namespace fs = std::filesystem;

KvService::KvService(ServiceConfig cfg)
    : cfg_(std::move(cfg)), store_(cfg_.lock_lease) {
  if (!cfg_.data_dir.empty()) {
    fs::create_directories(cfg_.data_dir);
    std::string wal_path = cfg_.data_dir + "/commits.log";
    replayed_ = Wal::replay(wal_path, [this](Bytes key, Timestamp ts,
                                             std::optional<Bytes> value) {
      store_.install(key, ts, std::move(value));
    });
    wal_ = std::make_unique<Wal>(wal_path, cfg_.sync);
  }
  if (cfg_.oracle) {
    std::string path = cfg_.data_dir.empty()
                           ? std::string()
                           : cfg_.data_dir + "/oracle.hw";
    oracle_.emplace(path);
  }
}

void KvService::reply_error(uint64_t req_id, wire::ErrCode code,
                            std::string detail, const ReplyFn& reply) {
  wire::Message m;
  m.request_id = req_id;
  m.payload = wire::ErrorReply{code, std::move(detail)};
  reply(std::move(m));
}

void KvService::handle(const wire::Message& req, ReplyFn reply) {
  const uint64_t rid = req.request_id;

  try {
    if (const auto* p = std::get_if<wire::TsGet>(&req.payload)) {
      if (!oracle_) {
        reply_error(rid, wire::ErrCode::NotOracle,
                    "this server does not host the oracle", reply);
        return;
      }
      oracle_->issue(p->purpose, [rid, reply](Timestamp ts) {
        reply(wire::Message{rid, wire::TsReply{ts}});
      });
      return;
    }

    if (const auto* p = std::get_if<wire::CommitDone>(&req.payload)) {
      if (!oracle_) {
        reply_error(rid, wire::ErrCode::NotOracle,
                    "this server does not host the oracle", reply);
        return;
      }
      oracle_->done(p->commit_ts);
      reply(wire::Message{rid, wire::CommitDoneReply{}});
      return;
    }

    if (const auto* p = std::get_if<wire::Read>(&req.payload)) {
      if (owner_of(p->key, cfg_.n_servers) != cfg_.server_id) {
        reply_error(rid, wire::ErrCode::NotOwner, "key not owned here", reply);
        return;
      }
      ReadResult r = store_.read(p->key, p->snapshot_ts);
      reply(wire::Message{rid,
                          wire::ReadReply{r.status, r.ts, std::move(r.value)}});
      return;
    }

    if (const auto* p = std::get_if<wire::Scan>(&req.payload)) {
      if (p->start > p->end) {
        reply_error(rid, wire::ErrCode::BadRequest, "scan start > end", reply);
        return;
      }
      auto items = store_.scan(p->start, p->end, p->snapshot_ts, p->limit);
      wire::ScanReply out;
      out.entries.reserve(items.size());
      for (auto& it : items)
        out.entries.push_back({std::move(it.key), it.ts, std::move(it.value)});
      reply(wire::Message{rid, std::move(out)});
      return;
    }

    if (const auto* p = std::get_if<wire::Prepare>(&req.payload)) {
      for (const auto& w : p->writes) {
        if (owner_of(w.key, cfg_.n_servers) != cfg_.server_id) {
          reply_error(rid, wire::ErrCode::NotOwner, "write key not owned here",
                      reply);
          return;
        }
      }
      wire::Vote v = store_.prepare(p->txn_id, p->snapshot_ts, p->writes);
      reply(wire::Message{rid, wire::PrepareReply{v}});
      return;
    }

    if (const auto* p = std::get_if<wire::Commit>(&req.payload)) {
      Store::ApplyHook hook;
      if (wal_) {
        hook = [this](BytesView key, Timestamp ts,
                      const std::optional<Bytes>& value) {
          wal_->append(key, ts, value);
        };
      }
      store_.commit(p->txn_id, p->commit_ts, hook);
      if (wal_) wal_->commit_barrier();
      reply(wire::Message{rid, wire::CommitReply{}});
      return;
    }

    if (const auto* p = std::get_if<wire::Abort>(&req.payload)) {
      store_.abort(p->txn_id);
      reply(wire::Message{rid, wire::AbortReply{}});
      return;
    }

    reply_error(rid, wire::ErrCode::BadRequest,
                "request kind not servable", reply);
  } catch (const ProtocolError& e) {
    reply_error(rid, e.code, e.what(), reply);
  }
}

}  // namespace kvsql::kv
