#include "kvsql/kv/owner.h"

#include <cassert>

namespace kvsql::kv {

bool node_key_hint(BytesView key, uint16_t& hint) {
  if (key.size() != kNodeKeyLen || key[0] != kNodeKeyTag) return false;
  hint = static_cast<uint16_t>((static_cast<uint8_t>(key[5]) << 8) |
                               static_cast<uint8_t>(key[6]));
  return true;
}

wire::ServerId owner_of(BytesView key, uint32_t n_servers) {
  assert(n_servers >= 1);
  uint16_t hint = 0;
  if (node_key_hint(key, hint)) return hint % n_servers;
  return static_cast<wire::ServerId>(fnv1a64(key) % n_servers);
}

}  // namespace kvsql::kv
