#include "kvsql/wire/socket.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

namespace kvsql::wire {

struct Waiter {
  std::mutex mu;
  std::condition_variable cv;
  bool done = false;
  std::optional<Message> reply;
  std::string error;
};

int connect_to(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  std::string port_s = std::to_string(port);
  int rc = ::getaddrinfo(host.c_str(), port_s.c_str(), &hints, &res);
  if (rc != 0 || !res) return -1;
  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd >= 0) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  return fd;
}

bool read_exact(int fd, char* buf, size_t n) {
  while (n > 0) {
    ssize_t r = ::read(fd, buf, n);
    if (r == 0) return false;
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    buf += r;
    n -= static_cast<size_t>(r);
  }
  return true;
}

bool write_all(int fd, const char* buf, size_t n) {
  while (n > 0) {
    ssize_t r = ::write(fd, buf, n);
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    buf += r;
    n -= static_cast<size_t>(r);
  }
  return true;
}

SocketTransport::SocketTransport(ClusterConfig cluster,
                                 std::chrono::milliseconds timeout)
    : cluster_(std::move(cluster)), timeout_(timeout) {
  conns_.resize(cluster_.size());
}

SocketTransport::~SocketTransport() {
  std::lock_guard lk(conns_mu_);
  for (auto& c : conns_) {
    if (!c) continue;
    c->dead = true;
    ::shutdown(c->fd, SHUT_RDWR);
    if (c->reader.joinable()) c->reader.join();
    ::close(c->fd);
  }
}

std::shared_ptr<SocketTransport::Conn> SocketTransport::get_conn(
    ServerId dest) {
  std::lock_guard lk(conns_mu_);
  if (dest >= conns_.size())
    throw TransportError("destination not in cluster membership");
  auto& slot = conns_[dest];
  if (slot && !slot->dead) return slot;
  if (slot) {
    ::shutdown(slot->fd, SHUT_RDWR);
    if (slot->reader.joinable()) slot->reader.join();
    ::close(slot->fd);
    slot.reset();
  }
  const auto& ep = cluster_.servers[dest];
  int fd = connect_to(ep.host, ep.port);
  if (fd < 0)
    throw TransportError("connect to server " + std::to_string(dest) +
                         " (" + ep.host + ":" + std::to_string(ep.port) +
                         ") failed");
  auto conn = std::make_shared<Conn>();
  conn->fd = fd;
  conn->reader = std::thread([this, dest, conn] { reader_loop(dest, conn); });
  slot = conn;
  return conn;
}

void SocketTransport::fail_conn(Conn& conn, const std::string& why) {
  conn.dead = true;
  std::lock_guard lk(conn.mu);
  for (auto& [id, w] : conn.waiters) {
    std::lock_guard wl(w->mu);
    w->error = why;
    w->done = true;
    w->cv.notify_all();
  }
  conn.waiters.clear();
}

void SocketTransport::reader_loop(ServerId dest, std::shared_ptr<Conn> conn) {
  (void)dest;
  for (;;) {
    char prefix[4];
    if (!read_exact(conn->fd, prefix, 4)) {
      fail_conn(*conn, "connection closed or reset");
      return;
    }
    FrameHeader h = read_frame_header(BytesView(prefix, 4));
    if (!h.ok) {
      fail_conn(*conn, "bad reply frame: " + h.error.reason);
      return;
    }
    Bytes body(h.body_len, '\0');
    if (!read_exact(conn->fd, body.data(), body.size())) {
      fail_conn(*conn, "connection closed mid-frame");
      return;
    }
    DecodeResult res = decode_body(body);
    if (!res.ok) {
      fail_conn(*conn, "reply decode error at offset " +
                           std::to_string(res.error.offset) + ": " +
                           res.error.reason);
      return;
    }
    std::shared_ptr<Waiter> w;
    {
      std::lock_guard lk(conn->mu);
      auto it = conn->waiters.find(res.msg.request_id);
      if (it != conn->waiters.end()) {
        w = it->second;
        conn->waiters.erase(it);
      }
    }
    // A reply nobody waits for (e.g. after a timeout) is dropped.
    if (w) {
      std::lock_guard wl(w->mu);
      w->reply = std::move(res.msg);
      w->done = true;
      w->cv.notify_all();
    }
  }
}

Message SocketTransport::request(ServerId dest, Message msg) {
  auto conn = get_conn(dest);
  msg.request_id = next_id_.fetch_add(1, std::memory_order_relaxed);
  Bytes frame = encode(msg);

  auto waiter = std::make_shared<Waiter>();
  {
    std::lock_guard lk(conn->mu);
    conn->waiters.emplace(msg.request_id, waiter);
  }
  {
    // Serialized writes keep per-connection send order.
    std::lock_guard lk(conn->write_mu);
    if (conn->dead || !write_all(conn->fd, frame.data(), frame.size())) {
      std::lock_guard cl(conn->mu);
      conn->waiters.erase(msg.request_id);
      conn->dead = true;
      throw TransportError("send to server " + std::to_string(dest) +
                           " failed");
    }
  }

  std::unique_lock wl(waiter->mu);
  if (!waiter->cv.wait_for(wl, timeout_, [&] { return waiter->done; })) {
    std::lock_guard lk(conn->mu);
    conn->waiters.erase(msg.request_id);
    throw TransportError("request to server " + std::to_string(dest) +
                         " timed out");
  }
  if (!waiter->error.empty()) throw TransportError(waiter->error);
  return std::move(*waiter->reply);
}

}  // namespace kvsql::wire
