#pragma once

#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>

#include "kvsql/wire/codec.h"
#include "kvsql/wire/transport.h"

namespace kvsql::wire {

// Stream-socket client transport: one connection per (handle, server),
// opened lazily. Requests are pipelined on the connection and replies
// are matched by request id, so concurrent tasks may share the handle.
class SocketTransport : public Transport {
 public:
  explicit SocketTransport(ClusterConfig cluster,
                           std::chrono::milliseconds timeout = kDefaultTimeout);
  ~SocketTransport() override;

  Message request(ServerId dest, Message msg) override;
  size_t cluster_size() const override { return cluster_.size(); }

 private:
  struct Conn {
    int fd = -1;
    std::mutex write_mu;
    std::thread reader;
    std::mutex mu;
    std::unordered_map<uint64_t, std::shared_ptr<struct Waiter>> waiters;
    std::atomic<bool> dead{false};
  };

  std::shared_ptr<Conn> get_conn(ServerId dest);
  void reader_loop(ServerId dest, std::shared_ptr<Conn> conn);
  void fail_conn(Conn& conn, const std::string& why);

  ClusterConfig cluster_;
  std::chrono::milliseconds timeout_;
  std::atomic<uint64_t> next_id_{1};
  std::mutex conns_mu_;
  std::vector<std::shared_ptr<Conn>> conns_;
};

// Blocking helpers shared with the server side.
int connect_to(const std::string& host, uint16_t port);
bool read_exact(int fd, char* buf, size_t n);
bool write_all(int fd, const char* buf, size_t n);

}  // namespace kvsql::wire
