#include "kvsql/kv/wal.h"

#include <fcntl.h>
#include <unistd.h>

#include <cstring>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <system_error>

namespace kvsql::kv {

namespace {

void put_u32(std::string& buf, uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) buf.push_back(static_cast<char>(v >> s));
}

void put_u64(std::string& buf, uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) buf.push_back(static_cast<char>(v >> s));
}

bool get_u32(const std::string& d, size_t& pos, uint32_t& v) {
  if (d.size() - pos < 4) return false;
  v = 0;
  for (int i = 0; i < 4; i++) v = (v << 8) | static_cast<uint8_t>(d[pos++]);
  return true;
}

bool get_u64(const std::string& d, size_t& pos, uint64_t& v) {
  if (d.size() - pos < 8) return false;
  v = 0;
  for (int i = 0; i < 8; i++) v = (v << 8) | static_cast<uint8_t>(d[pos++]);
  return true;
}

}  // namespace

Wal::Wal(const std::string& path, bool sync) : path_(path), sync_(sync) {
  fd_ = ::open(path.c_str(), O_CREAT | O_WRONLY | O_APPEND, 0644);
  if (fd_ < 0)
    throw std::system_error(errno, std::generic_category(),
                            "open wal: " + path);
}

Wal::~Wal() {
  if (fd_ >= 0) ::close(fd_);
}

void Wal::append(BytesView key, Timestamp ts,
                 const std::optional<Bytes>& value) {
  std::lock_guard lk(mu_);
  buf_.push_back(value ? 'P' : 'D');
  put_u32(buf_, static_cast<uint32_t>(key.size()));
  buf_.append(key);
  put_u64(buf_, ts);
  if (value) {
    put_u32(buf_, static_cast<uint32_t>(value->size()));
    buf_.append(*value);
  }
}

void Wal::commit_barrier() {
  std::lock_guard lk(mu_);
  if (!buf_.empty()) {
    const char* p = buf_.data();
    size_t left = buf_.size();
    while (left > 0) {
      ssize_t n = ::write(fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw std::system_error(errno, std::generic_category(), "wal write");
      }
      p += n;
      left -= static_cast<size_t>(n);
    }
    buf_.clear();
  }
  if (sync_ && ::fdatasync(fd_) != 0)
    throw std::system_error(errno, std::generic_category(), "wal fdatasync");
}

size_t Wal::replay(const std::string& path, const ReplayFn& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  size_t pos = 0, applied = 0;
  while (pos < data.size()) {
    size_t start = pos;
    char kind = data[pos++];
    if (kind != 'P' && kind != 'D') break;  // torn or corrupt tail
    uint32_t klen;
    if (!get_u32(data, pos, klen) || data.size() - pos < klen) break;
    Bytes key = data.substr(pos, klen);
    pos += klen;
    uint64_t ts;
    if (!get_u64(data, pos, ts)) break;
    std::optional<Bytes> value;
    if (kind == 'P') {
      uint32_t vlen;
      if (!get_u32(data, pos, vlen) || data.size() - pos < vlen) break;
      value = data.substr(pos, vlen);
      pos += vlen;
    }
    fn(std::move(key), ts, std::move(value));
    applied++;
    (void)start;
  }
  return applied;
}

}  // namespace kvsql::kv
