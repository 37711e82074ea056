#pragma once

// Versioned, length-prefixed little-endian records wrapped in gzip. Every
// persisted artifact (training sets, stats, network weights, language models,
// compiled grammars) uses this container:
//
//   magic "PTRC" | u32 format version | string kind | payload...
//
// Strings are u64 length + bytes; doubles are their IEEE-754 bit patterns.

#include <zlib.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "patrec/error.hpp"

namespace patrec {

inline constexpr std::string_view kContainerMagic = "PTRC";
inline constexpr std::uint32_t kContainerVersion = 1;

class BinaryWriter {
 public:
  explicit BinaryWriter(std::string_view kind) {
    buf_.append(kContainerMagic);
    u32(kContainerVersion);
    str(kind);
  }

  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i64(std::int64_t v) { put(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void str(std::string_view s) {
    u64(s.size());
    buf_.append(s);
  }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    for (double d : v) f64(d);
  }

  [[nodiscard]] const std::string& bytes() const noexcept { return buf_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }

  std::string buf_;
};

class BinaryReader {
 public:
  /// Checks magic, version and kind.
  BinaryReader(std::string bytes, std::string_view expected_kind) : buf_(std::move(bytes)) {
    if (buf_.size() < kContainerMagic.size() || std::string_view(buf_).substr(0, 4) != kContainerMagic)
      throw FormatError("not a patrec data file (bad magic)");
    pos_ = 4;
    const auto version = u32();
    if (version != kContainerVersion)
      throw FormatError("unsupported data file version " + std::to_string(version) + " (expected " +
                        std::to_string(kContainerVersion) + ")");
    const auto kind = str();
    if (kind != expected_kind)
      throw FormatError("data file holds \"" + kind + "\", expected \"" + std::string(expected_kind) + "\"");
  }

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(get(8)); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string str() {
    const auto n = count(1);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> doubles() {
    const auto n = count(8);
    std::vector<double> v(n);
    for (auto& d : v) d = f64();
    return v;
  }
  /// Reads an element count and checks it against the bytes left.
  std::size_t count(std::size_t min_element_bytes) {
    const auto n = u64();
    if (min_element_bytes != 0 && n > (buf_.size() - pos_) / min_element_bytes)
      throw FormatError("corrupt data file (count exceeds remaining bytes)");
    return static_cast<std::size_t>(n);
  }

  [[nodiscard]] bool at_end() const noexcept { return pos_ == buf_.size(); }
  void expect_end() const {
    if (!at_end()) throw FormatError("corrupt data file (trailing bytes)");
  }

 private:
  std::uint64_t get(std::size_t n) {
    if (buf_.size() - pos_ < n) throw FormatError("corrupt data file (truncated)");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += n;
    return v;
  }

  std::string buf_;
  std::size_t pos_ = 0;
};

/// gzip-compresses `bytes` into `path`. The gzip header carries no
/// timestamp, so equal input gives byte-identical files.
inline void write_gzip_file(const std::filesystem::path& path, std::string_view bytes) {
  gzFile f = gzopen(path.string().c_str(), "wb");
  if (f == nullptr) throw IoError("cannot write \"" + path.string() + "\"");
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<unsigned>(std::min<std::size_t>(bytes.size() - off, 1u << 20));
    if (gzwrite(f, bytes.data() + off, chunk) != static_cast<int>(chunk)) {
      gzclose(f);
      throw IoError("write failed for \"" + path.string() + "\"");
    }
    off += chunk;
  }
  if (gzclose(f) != Z_OK) throw IoError("write failed for \"" + path.string() + "\"");
}

inline std::string read_gzip_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("\"" + path.string() + "\" does not exist");
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) throw IoError("cannot open \"" + path.string() + "\"");
  std::string out;
  std::array<char, 1 << 16> buf{};
  for (;;) {
    const int n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
    if (n < 0) {
      gzclose(f);
      throw FormatError("\"" + path.string() + "\" is not a valid gzip file");
    }
    if (n == 0) break;
    out.append(buf.data(), static_cast<std::size_t>(n));
  }
  gzclose(f);
  return out;
}

inline void write_container(const std::filesystem::path& path, const BinaryWriter& w) {
  write_gzip_file(path, w.bytes());
}

inline BinaryReader read_container(const std::filesystem::path& path, std::string_view kind) {
  return BinaryReader(read_gzip_file(path), kind);
}

}  // namespace patrec
