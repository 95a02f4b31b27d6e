#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "freqcross/error.hpp"

namespace freqcross {

// Little-endian binary writer/reader for the model and checkpoint formats.
// The writer accumulates into memory so a trailing CRC can cover everything.

class ByteWriter {
 public:
  void raw(const void* data, size_t n) {
    const char* p = static_cast<const char*>(data);
    buffer_.insert(buffer_.end(), p, p + n);
  }
  void u8(uint8_t v) { raw(&v, 1); }
  void u16(uint16_t v) { raw(&v, 2); }
  void u32(uint32_t v) { raw(&v, 4); }
  void u64(uint64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) { raw(s.data(), s.size()); }

  const std::string& buffer() const { return buffer_; }
  std::string& buffer() { return buffer_; }

 private:
  std::string buffer_;
};

class ByteReader {
 public:
  ByteReader(const void* data, size_t size)
      : data_(static_cast<const char*>(data)), size_(size) {}
  explicit ByteReader(const std::string& s) : ByteReader(s.data(), s.size()) {}

  // What the reader is currently parsing, used to name the offending record
  // in CorruptFile errors.
  void set_context(const std::string& ctx) { context_ = ctx; }

  void raw(void* out, size_t n) {
    if (pos_ + n > size_) {
      fail(ErrorKind::CorruptFile,
           "truncated while reading " + (context_.empty() ? "header" : context_));
    }
    std::memcpy(out, data_ + pos_, n);
    pos_ += n;
  }
  uint8_t u8() { uint8_t v; raw(&v, 1); return v; }
  uint16_t u16() { uint16_t v; raw(&v, 2); return v; }
  uint32_t u32() { uint32_t v; raw(&v, 4); return v; }
  uint64_t u64() { uint64_t v; raw(&v, 8); return v; }
  double f64() { double v; raw(&v, 8); return v; }
  std::string str(size_t n) {
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }

  size_t pos() const { return pos_; }
  size_t remaining() const { return size_ - pos_; }

 private:
  const char* data_;
  size_t size_;
  size_t pos_ = 0;
  std::string context_;
};

// Whole-file helpers. Read failures map to IoFailure.
std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

}  // namespace freqcross
