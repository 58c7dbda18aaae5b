#pragma once

#include <cstdio>
#include <functional>
#include <mutex>
#include <optional>
#include <string>

#include "kvsql/kv/types.h"

namespace kvsql::kv {

// Append-only log of committed (key, ts, value) records, replayed at
// startup. Record layout: kind byte ('P' put / 'D' delete), then the
// wire primitive encodings: key (4-byte length prefix + bytes),
// ts (8 bytes big-endian), and for puts the value (length-prefixed).
//
// sync=true issues fdatasync after each commit batch; with sync=false
// records still reach the kernel before the commit is acked, which
// survives a killed process but not a host crash.
class Wal {
 public:
  Wal(const std::string& path, bool sync);
  ~Wal();

  Wal(const Wal&) = delete;
  Wal& operator=(const Wal&) = delete;

  // Thread-safe; a commit appends its records then issues one barrier.
  void append(BytesView key, Timestamp ts, const std::optional<Bytes>& value);
  // Flushes (and syncs, if configured) everything appended so far.
  void commit_barrier();

  // Replays an existing log through the callback; stops cleanly at a
  // torn tail. Returns records applied.
  using ReplayFn =
      std::function<void(Bytes key, Timestamp ts, std::optional<Bytes> value)>;
  static size_t replay(const std::string& path, const ReplayFn& fn);

 private:
  std::string path_;
  bool sync_;
  int fd_ = -1;
  std::mutex mu_;
  std::string buf_;
};

}  // namespace kvsql::kv
