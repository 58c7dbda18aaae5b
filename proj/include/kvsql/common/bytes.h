#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace kvsql {

// Keys and values are opaque byte strings. std::string compares with
// memcmp semantics, which gives the unsigned lexicographic order the
// storage layer requires.
using Bytes = std::string;
using BytesView = std::string_view;

constexpr std::size_t kMaxKeyLen = 4096;
constexpr std::size_t kMaxValueLen = 1 << 20;

std::string to_hex(BytesView b);

// Returns false on odd length or non-hex characters.
bool from_hex(std::string_view hex, Bytes& out);

uint64_t fnv1a64(BytesView b);

}  // namespace kvsql
