#pragma once

#include <cstdio>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kvsql/common/bytes.h"
#include "kvsql/kv/types.h"

namespace kvsql::txn {

// One line per event, tab-separated: event-kind, txn-id, key-hex, ts,
// value. The value column is '-' for none/not-found, 'T' for a
// tombstone, or 'V' followed by the hex bytes; read and write events
// carry it so the checker can validate what each read observed.
enum class EventKind { Begin, Read, Write, Commit, Abort };

struct HistoryEvent {
  EventKind kind = EventKind::Begin;
  uint64_t txn_id = 0;
  Bytes key;                          // empty for begin/commit/abort
  kv::Timestamp ts = 0;               // begin: snapshot; commit: commit ts
  bool has_value = false;             // read: found; write: non-tombstone
  bool tombstone = false;             // write: delete marker
  Bytes value;

  HistoryEvent() = default;
  HistoryEvent(EventKind k, uint64_t txn, Bytes key_arg = {},
               kv::Timestamp ts_arg = 0)
      : kind(k), txn_id(txn), key(std::move(key_arg)), ts(ts_arg) {}
};

std::string format_event(const HistoryEvent& e);
// Returns false on malformed line.
bool parse_event(const std::string& line, HistoryEvent& out);

const char* event_kind_name(EventKind k);

// Totally-ordered sink; implementations must be safe for concurrent
// emitters.
class HistorySink {
 public:
  virtual ~HistorySink() = default;
  virtual void emit(const HistoryEvent& e) = 0;
};

using HistorySinkPtr = std::shared_ptr<HistorySink>;

class MemoryHistorySink : public HistorySink {
 public:
  void emit(const HistoryEvent& e) override {
    std::lock_guard lk(mu_);
    events_.push_back(e);
  }
  std::vector<HistoryEvent> take() {
    std::lock_guard lk(mu_);
    return std::move(events_);
  }
  std::vector<HistoryEvent> snapshot() const {
    std::lock_guard lk(mu_);
    return events_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<HistoryEvent> events_;
};

class FileHistorySink : public HistorySink {
 public:
  explicit FileHistorySink(const std::string& path);
  ~FileHistorySink() override;
  void emit(const HistoryEvent& e) override;
  void flush();

 private:
  std::mutex mu_;
  std::FILE* f_;
};

std::vector<HistoryEvent> load_history(const std::string& path);

}  // namespace kvsql::txn
