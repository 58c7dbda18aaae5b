#pragma once

#include <cstdint>

#include "kvsql/common/bytes.h"
#include "kvsql/wire/message.h"

namespace kvsql::kv {

// Tree-node keys carry an explicit 16-bit server hint so the tree layer
// controls node placement; every other key is placed by hash.
//
// Node key layout (13 bytes): 'N' | tree id (4, BE) | hint (2, BE) |
// local counter (6, BE).
constexpr char kNodeKeyTag = 'N';
constexpr std::size_t kNodeKeyLen = 13;

// Returns true and fills hint when the key follows the node layout.
bool node_key_hint(BytesView key, uint16_t& hint);

// Deterministic key placement: hinted keys go to hint mod n, everything
// else to fnv1a64(key) mod n.
wire::ServerId owner_of(BytesView key, uint32_t n_servers);

}  // namespace kvsql::kv
