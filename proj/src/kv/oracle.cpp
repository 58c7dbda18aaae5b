#include "kvsql/kv/oracle.h"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <system_error>

namespace kvsql::kv {

TsOracle::TsOracle(const std::string& persist_path, uint64_t block,
                   std::chrono::milliseconds inflight_lease)
    : path_(persist_path), block_(block), lease_(inflight_lease) {
  std::ifstream in(path_);
  if (in) {
    uint64_t hw = 0;
    if (in >> hw) {
      persisted_hw_ = hw;
      next_ = hw + 1;
    }
  }
}

void TsOracle::persist_locked(uint64_t hw) {
  std::string tmp = path_ + ".tmp";
  int fd = ::open(tmp.c_str(), O_CREAT | O_TRUNC | O_WRONLY, 0644);
  if (fd < 0)
    throw std::system_error(errno, std::generic_category(),
                            "open oracle state: " + tmp);
  char buf[32];
  int n = std::snprintf(buf, sizeof buf, "%llu\n",
                        static_cast<unsigned long long>(hw));
  if (::write(fd, buf, static_cast<size_t>(n)) != n ||
      ::fdatasync(fd) != 0) {
    int err = errno;
    ::close(fd);
    throw std::system_error(err, std::generic_category(), "write oracle state");
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path_.c_str()) != 0)
    throw std::system_error(errno, std::generic_category(),
                            "rename oracle state");
  persisted_hw_ = hw;
}

void TsOracle::release_ready_locked(std::vector<Waiter>& out) {
  auto now = std::chrono::steady_clock::now();
  while (!in_flight_.empty() && in_flight_.begin()->second <= now)
    in_flight_.erase(in_flight_.begin());
  Timestamp gate =
      in_flight_.empty() ? UINT64_MAX : in_flight_.begin()->first;
  size_t i = 0;
  while (i < waiters_.size() && waiters_[i].ts < gate) i++;
  out.assign(std::make_move_iterator(waiters_.begin()),
             std::make_move_iterator(waiters_.begin() + i));
  waiters_.erase(waiters_.begin(), waiters_.begin() + i);
}

void TsOracle::issue(wire::TsPurpose purpose, ReplyFn reply) {
  std::vector<Waiter> ready;
  Timestamp ts;
  bool deferred = false;
  {
    std::lock_guard lk(mu_);
    ts = next_++;
    if (ts > persisted_hw_)
      persist_locked(((ts - 1) / block_ + 1) * block_);
    if (purpose == wire::TsPurpose::Commit) {
      in_flight_.emplace(ts, std::chrono::steady_clock::now() + lease_);
    } else {
      // Snapshot: hold the reply until older in-flight commits land.
      release_ready_locked(ready);  // also prunes expired leases
      if (!in_flight_.empty() && in_flight_.begin()->first < ts) {
        waiters_.push_back({ts, std::move(reply)});
        deferred = true;
      }
    }
  }
  for (auto& w : ready) w.reply(w.ts);
  if (!deferred) reply(ts);
}

void TsOracle::done(Timestamp commit_ts) {
  std::vector<Waiter> ready;
  {
    std::lock_guard lk(mu_);
    in_flight_.erase(commit_ts);
    release_ready_locked(ready);
  }
  for (auto& w : ready) w.reply(w.ts);
}

uint64_t TsOracle::last_issued() const {
  std::lock_guard lk(mu_);
  return next_ - 1;
}

}  // namespace kvsql::kv
