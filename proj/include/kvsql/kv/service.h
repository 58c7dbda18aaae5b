#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "kvsql/kv/oracle.h"
#include "kvsql/kv/store.h"
#include "kvsql/kv/wal.h"
#include "kvsql/wire/message.h"

namespace kvsql::kv {

struct ServiceConfig {
  wire::ServerId server_id = 0;
  uint32_t n_servers = 1;
  bool oracle = false;         // host the timestamp oracle (server 0)
  std::string data_dir;        // empty = volatile (tests)
  bool sync = true;            // fdatasync per commit
  std::chrono::milliseconds lock_lease{30000};
};

// One storage server's request dispatcher, transport-agnostic. Replies
// go through a callback so a handler may defer (snapshot timestamps wait
// for in-flight commits); every request produces exactly one reply.
class KvService {
 public:
  using ReplyFn = std::function<void(wire::Message)>;

  explicit KvService(ServiceConfig cfg);

  void handle(const wire::Message& req, ReplyFn reply);

  Store& store() { return store_; }
  const ServiceConfig& config() const { return cfg_; }

  // Records replayed from the log at startup.
  size_t replayed() const { return replayed_; }

 private:
  void reply_error(uint64_t req_id, wire::ErrCode code, std::string detail,
                   const ReplyFn& reply);

  ServiceConfig cfg_;
  Store store_;
  std::optional<TsOracle> oracle_;
  std::unique_ptr<Wal> wal_;
  size_t replayed_ = 0;
};

}  // namespace kvsql::kv
