#pragma once

#include <cstdint>
#include <optional>

#include "kvsql/common/bytes.h"

namespace kvsql::kv {

// Logical commit/snapshot clock value. 0 is reserved as "before all
// transactions"; the oracle starts issuing at 1.
using Timestamp = uint64_t;
constexpr Timestamp kTsZero = 0;

// nullopt value = tombstone. A tombstone is distinguishable from every
// value, including the empty one.
struct Version {
  Timestamp ts = 0;
  std::optional<Bytes> value;

  bool tombstone() const { return !value.has_value(); }
  bool operator==(const Version&) const = default;
};

}  // namespace kvsql::kv
