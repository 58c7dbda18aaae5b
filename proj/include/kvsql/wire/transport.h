#pragma once

#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kvsql/wire/message.h"

namespace kvsql::wire {

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cluster membership: ordered host:port list, index = ServerId.
struct ClusterConfig {
  struct Endpoint {
    std::string host;
    uint16_t port = 0;
  };
  std::vector<Endpoint> servers;

  size_t size() const { return servers.size(); }

  static ClusterConfig parse(const std::string& text);
  static ClusterConfig load(const std::string& path);
  std::string to_text() const;
};

// A transport handle may be shared across concurrent client tasks.
// request() assigns the request id, sends, and returns the matching
// reply; requests from one handle to one server keep their send order.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual Message request(ServerId dest, Message msg) = 0;
  virtual size_t cluster_size() const = 0;
};

using TransportPtr = std::shared_ptr<Transport>;

constexpr std::chrono::milliseconds kDefaultTimeout{5000};

}  // namespace kvsql::wire
