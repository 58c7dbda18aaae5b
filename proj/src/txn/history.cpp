#include "kvsql/txn/history.h"

#include <cinttypes>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kvsql::txn {

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::Begin: return "begin";
    case EventKind::Read: return "read";
    case EventKind::Write: return "write";
    case EventKind::Commit: return "commit";
    case EventKind::Abort: return "abort";
  }
  return "?";
}

std::string format_event(const HistoryEvent& e) {
  std::string out = event_kind_name(e.kind);
  out += '\t';
  out += std::to_string(e.txn_id);
  out += '\t';
  out += e.key.empty() ? "-" : to_hex(e.key);
  out += '\t';
  out += std::to_string(e.ts);
  out += '\t';
  if (e.tombstone)
    out += 'T';
  else if (e.has_value)
    out += 'V' + to_hex(e.value);
  else
    out += '-';
  return out;
}

bool parse_event(const std::string& line, HistoryEvent& out) {
  std::vector<std::string> cols;
  size_t start = 0;
  for (;;) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (cols.size() != 5) return false;

  out = HistoryEvent{};
  if (cols[0] == "begin") out.kind = EventKind::Begin;
  else if (cols[0] == "read") out.kind = EventKind::Read;
  else if (cols[0] == "write") out.kind = EventKind::Write;
  else if (cols[0] == "commit") out.kind = EventKind::Commit;
  else if (cols[0] == "abort") out.kind = EventKind::Abort;
  else return false;

  try {
    out.txn_id = std::stoull(cols[1]);
    out.ts = std::stoull(cols[3]);
  } catch (...) {
    return false;
  }
  if (cols[2] != "-" && !from_hex(cols[2], out.key)) return false;

  const std::string& v = cols[4];
  if (v == "-") {
    out.has_value = false;
  } else if (v == "T") {
    out.tombstone = true;
  } else if (!v.empty() && v[0] == 'V') {
    out.has_value = true;
    if (!from_hex(std::string_view(v).substr(1), out.value)) return false;
  } else {
    return false;
  }
  return true;
}

FileHistorySink::FileHistorySink(const std::string& path) {
  f_ = std::fopen(path.c_str(), "w");
  if (!f_) throw std::runtime_error("cannot open history file: " + path);
}

FileHistorySink::~FileHistorySink() {
  if (f_) std::fclose(f_);
}

void FileHistorySink::emit(const HistoryEvent& e) {
  std::string line = format_event(e);
  line += '\n';
  std::lock_guard lk(mu_);
  std::fwrite(line.data(), 1, line.size(), f_);
}

void FileHistorySink::flush() {
  std::lock_guard lk(mu_);
  std::fflush(f_);
}

std::vector<HistoryEvent> load_history(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open history file: " + path);
  std::vector<HistoryEvent> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty()) continue;
    HistoryEvent e;
    if (!parse_event(line, e))
      throw std::runtime_error("bad history line " + std::to_string(lineno));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace kvsql::txn
