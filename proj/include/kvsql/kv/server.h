#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "kvsql/kv/service.h"

namespace kvsql::kv {

// Socket front end for one KvService: an accept loop plus one thread
// per connection reading frames in order and dispatching them. Reply
// writes are serialized per connection; a deferred reply may be written
// from another connection's handler thread.
class SocketServer {
 public:
  SocketServer(std::string listen_host, uint16_t port, ServiceConfig cfg);
  ~SocketServer();

  // Binds and starts accepting. Throws on bind failure (port in use).
  void start();
  void stop();

  uint16_t port() const { return port_; }
  KvService& service() { return svc_; }

 private:
  struct ConnState;
  void accept_loop();
  void conn_loop(std::shared_ptr<ConnState> cs);

  std::string host_;
  uint16_t port_;
  KvService svc_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex conns_mu_;
  std::vector<std::shared_ptr<ConnState>> conns_;
};

}  // namespace kvsql::kv
