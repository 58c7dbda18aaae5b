#include "kvsql/wire/transport.h"

#include <fstream>
#include <sstream>

namespace kvsql::wire {

ClusterConfig ClusterConfig::parse(const std::string& text) {
  ClusterConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    if (line[0] == '#') continue;
    size_t colon = line.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == line.size())
      throw TransportError("bad cluster line (want host:port): " + line);
    Endpoint ep;
    ep.host = line.substr(0, colon);
    ep.port = static_cast<uint16_t>(std::stoul(line.substr(colon + 1)));
    cfg.servers.push_back(std::move(ep));
  }
  if (cfg.servers.empty()) throw TransportError("empty cluster config");
  return cfg;
}

ClusterConfig ClusterConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TransportError("cannot open cluster file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ClusterConfig::to_text() const {
  std::string out;
  for (const auto& ep : servers) {
    out += ep.host;
    out += ':';
    out += std::to_string(ep.port);
    out += '\n';
  }
  return out;
}

}  // namespace kvsql::wire
