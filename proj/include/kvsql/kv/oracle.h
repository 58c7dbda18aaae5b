#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "kvsql/kv/types.h"
#include "kvsql/wire/message.h"

namespace kvsql::kv {

// Timestamp oracle, hosted on server 0. Issues strictly increasing
// values, durable across restart via a high-water mark persisted in
// blocks (restart resumes past the last persisted block).
//
// Snapshot issuance is gated on commit stability: a commit timestamp is
// registered as in-flight until the coordinator reports the commit
// fully applied (COMMIT_DONE). A snapshot reply is held back until no
// smaller commit timestamp is still in flight, so a reader at snapshot
// S always observes every commit with ts <= S without ever waiting on
// a per-key lock. Replies are delivered through a callback, which may
// fire after issue() returns.
class TsOracle {
 public:
  using ReplyFn = std::function<void(Timestamp)>;

  TsOracle(const std::string& persist_path, uint64_t block = 1000,
           std::chrono::milliseconds inflight_lease =
               std::chrono::milliseconds(30000));

  // Issues the next timestamp. Commit requests reply immediately and
  // are registered in-flight; snapshot requests may defer the reply.
  void issue(wire::TsPurpose purpose, ReplyFn reply);

  // Retires an in-flight commit timestamp and releases any snapshot
  // replies it was blocking. Unknown values are ignored (idempotent).
  void done(Timestamp commit_ts);

  uint64_t last_issued() const;

 private:
  struct Waiter {
    Timestamp ts;
    ReplyFn reply;
  };

  void persist_locked(uint64_t hw);
  void release_ready_locked(std::vector<Waiter>& out);

  mutable std::mutex mu_;
  std::string path_;
  uint64_t block_;
  uint64_t next_ = 1;
  uint64_t persisted_hw_ = 0;
  std::chrono::milliseconds lease_;
  // commit ts -> lease expiry
  std::map<Timestamp, std::chrono::steady_clock::time_point> in_flight_;
  std::vector<Waiter> waiters_;  // sorted by ts (issue order)
};

}  // namespace kvsql::kv
