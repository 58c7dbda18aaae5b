#include "kvsql/kv/server.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <system_error>

#include "kvsql/wire/codec.h"
#include "kvsql/wire/socket.h"

namespace kvsql::kv {

struct SocketServer::ConnState {
  int fd = -1;
  std::mutex write_mu;
  std::thread worker;
  std::atomic<bool> closed{false};
};

SocketServer::SocketServer(std::string listen_host, uint16_t port,
                           ServiceConfig cfg)
    : host_(std::move(listen_host)), port_(port), svc_(std::move(cfg)) {}

SocketServer::~SocketServer() { stop(); }

void SocketServer::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0)
    throw std::system_error(errno, std::generic_category(), "socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port_);
  if (host_ == "0.0.0.0" || host_.empty())
    addr.sin_addr.s_addr = INADDR_ANY;
  else if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1)
    throw std::runtime_error("bad listen address: " + host_);

  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    int err = errno;
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::system_error(err, std::generic_category(),
                            "bind " + host_ + ":" + std::to_string(port_));
  }
  if (::listen(listen_fd_, 128) != 0)
    throw std::system_error(errno, std::generic_category(), "listen");

  if (port_ == 0) {
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
  }
  acceptor_ = std::thread([this] { accept_loop(); });
}

void SocketServer::stop() {
  if (stopping_.exchange(true)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
  }
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::shared_ptr<ConnState>> conns;
  {
    std::lock_guard lk(conns_mu_);
    conns.swap(conns_);
  }
  for (auto& c : conns) {
    ::shutdown(c->fd, SHUT_RDWR);
    {
      // Waits out any in-flight reply write before the fd goes away.
      std::lock_guard wl(c->write_mu);
      c->closed = true;
    }
    if (c->worker.joinable()) c->worker.join();
    ::close(c->fd);
  }
}

void SocketServer::accept_loop() {
  for (;;) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_) return;
      if (errno == EINTR) continue;
      return;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto cs = std::make_shared<ConnState>();
    cs->fd = fd;
    cs->worker = std::thread([this, cs] { conn_loop(cs); });
    std::lock_guard lk(conns_mu_);
    conns_.push_back(cs);
  }
}

void SocketServer::conn_loop(std::shared_ptr<ConnState> cs) {
  for (;;) {
    char prefix[4];
    if (!wire::read_exact(cs->fd, prefix, 4)) return;
    wire::FrameHeader h = wire::read_frame_header(BytesView(prefix, 4));
    uint64_t rid = 0;
    wire::Message req;
    bool ok = h.ok;
    if (ok) {
      Bytes body(h.body_len, '\0');
      if (!wire::read_exact(cs->fd, body.data(), body.size())) return;
      wire::DecodeResult res = wire::decode_body(body);
      if (res.ok) {
        req = std::move(res.msg);
        rid = req.request_id;
      } else {
        ok = false;
      }
    }
    auto send = [this, cs](const wire::Message& m) {
      Bytes frame = wire::encode(m);
      std::lock_guard lk(cs->write_mu);
      if (!cs->closed)
        wire::write_all(cs->fd, frame.data(), frame.size());
    };
    if (!ok) {
      // Undecodable request: report and drop the connection, since the
      // stream offset can no longer be trusted.
      wire::Message err{rid, wire::ErrorReply{wire::ErrCode::BadRequest,
                                              "undecodable request frame"}};
      send(err);
      return;
    }
    svc_.handle(req, [send](wire::Message reply) { send(reply); });
  }
}

}  // namespace kvsql::kv
