#pragma once

// Sample loading, generation and writing. Amplitudes are kept as doubles in
// [-1, 1]; 16-bit PCM word v maps to v / 32768, 8-bit unsigned byte v maps to
// (v - 128) / 128.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "patrec/error.hpp"

namespace patrec {

struct AudioFormat {
  int sample_rate = 8000;
  int bits_per_sample = 16;
  int channels = 1;

  void validate() const {
    if (sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
    if (bits_per_sample != 8 && bits_per_sample != 16)
      throw std::invalid_argument("bits per sample must be 8 or 16");
    if (channels != 1) throw std::invalid_argument("only mono samples are supported");
  }

  friend bool operator==(const AudioFormat&, const AudioFormat&) = default;
};

struct Sample {
  std::vector<double> amplitudes;
  AudioFormat format;

  [[nodiscard]] std::size_t size() const noexcept { return amplitudes.size(); }
  [[nodiscard]] bool empty() const noexcept { return amplitudes.empty(); }
};

enum class Endian { little, big };

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path.string() + "\"");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write \"" + path.string() + "\"");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for \"" + path.string() + "\"");
}

class ByteCursor {
 public:
  ByteCursor(const std::vector<unsigned char>& bytes, Endian endian)
      : bytes_(bytes), endian_(endian) {}

  [[nodiscard]] std::size_t pos() const noexcept { return pos_; }
  [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  void set_endian(Endian e) noexcept { endian_ = e; }

  std::string tag() {
    need(4);
    std::string t(reinterpret_cast<const char*>(&bytes_[pos_]), 4);
    pos_ += 4;
    return t;
  }

  std::uint32_t u32() { return static_cast<std::uint32_t>(uint_n(4)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(uint_n(2)); }

  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("unexpected end of WAV data");
  }

  std::uint64_t uint_n(std::size_t n) {
    need(n);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = endian_ == Endian::little ? pos_ + i : pos_ + n - 1 - i;
      v |= static_cast<std::uint64_t>(bytes_[idx]) << (8 * i);
    }
    pos_ += n;
    return v;
  }

  const std::vector<unsigned char>& bytes_;
  Endian endian_;
  std::size_t pos_ = 0;
};

inline void put_uint(std::string& out, std::uint32_t v, std::size_t n, Endian e) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t shift = e == Endian::little ? 8 * i : 8 * (n - 1 - i);
    out.push_back(static_cast<char>((v >> shift) & 0xFFu));
  }
}

}  // namespace detail

/// Amplitude of a signed 16-bit PCM word.
constexpr double pcm16_to_amplitude(std::int16_t v) noexcept { return v / 32768.0; }

/// Clips to [-1, 1] and rounds to the nearest 16-bit PCM word.
inline std::int16_t amplitude_to_pcm16(double a) noexcept {
  const double clipped = std::clamp(a, -1.0, 1.0);
  const double scaled = std::nearbyint(clipped * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

inline std::uint8_t amplitude_to_pcm8(double a) noexcept {
  const double clipped = std::clamp(a, -1.0, 1.0);
  const double scaled = std::nearbyint(clipped * 128.0) + 128.0;
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

/// Reads a mono PCM RIFF (little-endian) or RIFX (big-endian) file.
inline Sample load_wav(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  detail::ByteCursor cur(bytes, Endian::little);

  const std::string riff = cur.tag();
  if (riff == "RIFX") {
    cur.set_endian(Endian::big);
  } else if (riff != "RIFF") {
    throw FormatError("\"" + path.string() + "\" is not a RIFF/WAVE file");
  }
  cur.u32();  // riff size; unreliable in the wild
  if (cur.tag() != "WAVE") throw FormatError("\"" + path.string() + "\" is not a WAVE file");

  bool have_fmt = false;
  AudioFormat fmt;
  while (cur.remaining() >= 8) {
    const std::string id = cur.tag();
    const std::uint32_t size = cur.u32();
    if (id == "fmt ") {
      if (size < 16) throw FormatError("fmt chunk too small");
      const std::uint16_t tag = cur.u16();
      const std::uint16_t channels = cur.u16();
      const std::uint32_t rate = cur.u32();
      cur.u32();  // byte rate
      cur.u16();  // block align
      const std::uint16_t bits = cur.u16();
      cur.skip(size - 16 + (size & 1u));
      if (tag != 1) throw FormatError("unsupported WAV encoding " + std::to_string(tag) + " (PCM only)");
      if (channels != 1)
        throw FormatError("expected a mono sample, got " + std::to_string(channels) + " channels");
      if (bits != 8 && bits != 16)
        throw FormatError("unsupported bits per sample: " + std::to_string(bits));
      fmt.sample_rate = static_cast<int>(rate);
      fmt.bits_per_sample = bits;
      fmt.channels = 1;
      if (fmt.sample_rate <= 0) throw FormatError("invalid sample rate");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("data chunk precedes fmt chunk");
      if (cur.remaining() < size) throw FormatError("truncated data chunk");
      Sample s;
      s.format = fmt;
      const std::size_t start = cur.pos();
      if (fmt.bits_per_sample == 16) {
        const std::size_t n = size / 2;
        s.amplitudes.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
          s.amplitudes.push_back(pcm16_to_amplitude(static_cast<std::int16_t>(cur.u16())));
      } else {
        s.amplitudes.reserve(size);
        for (std::size_t i = 0; i < size; ++i)
          s.amplitudes.push_back((static_cast<int>(bytes[start + i]) - 128) / 128.0);
      }
      return s;
    } else {
      cur.skip(std::min<std::size_t>(size + (size & 1u), cur.remaining()));
    }
  }
  throw FormatError("\"" + path.string() + "\" has no data chunk");
}

/// Encodes the sample as canonical PCM WAV bytes. Out-of-range amplitudes are
/// clipped to [-1, 1] first.
inline std::string encode_wav(const Sample& sample, Endian endian = Endian::little) {
  sample.format.validate();
  const auto bytes_per = static_cast<std::uint32_t>(sample.format.bits_per_sample / 8);
  const auto data_size = static_cast<std::uint32_t>(sample.size() * bytes_per);
  std::string out;
  out.reserve(44 + data_size);
  out += endian == Endian::little ? "RIFF" : "RIFX";
  detail::put_uint(out, 36 + data_size, 4, endian);
  out += "WAVEfmt ";
  detail::put_uint(out, 16, 4, endian);
  detail::put_uint(out, 1, 2, endian);
  detail::put_uint(out, 1, 2, endian);
  const auto rate = static_cast<std::uint32_t>(sample.format.sample_rate);
  detail::put_uint(out, rate, 4, endian);
  detail::put_uint(out, rate * bytes_per, 4, endian);
  detail::put_uint(out, bytes_per, 2, endian);
  detail::put_uint(out, static_cast<std::uint32_t>(sample.format.bits_per_sample), 2, endian);
  out += "data";
  detail::put_uint(out, data_size, 4, endian);
  for (double a : sample.amplitudes) {
    if (bytes_per == 2) {
      detail::put_uint(out, static_cast<std::uint16_t>(amplitude_to_pcm16(a)), 2, endian);
    } else {
      out.push_back(static_cast<char>(amplitude_to_pcm8(a)));
    }
  }
  return out;
}

inline void write_wav(const Sample& sample, const std::filesystem::path& path,
                      Endian endian = Endian::little) {
  detail::write_file_bytes(path, encode_wav(sample, endian));
}

/// amplitudes[n] = sin(2*pi*freq*n/rate) for round(duration*rate) points.
inline Sample generate_sine(double freq, double duration, const AudioFormat& format = {}) {
  format.validate();
  if (!(freq > 0.0) || !(freq < format.sample_rate / 2.0))
    throw std::invalid_argument("sine frequency must lie strictly inside (0, sample_rate/2)");
  if (duration < 0.0) throw std::invalid_argument("negative duration");
  const auto n = static_cast<std::size_t>(std::llround(duration * format.sample_rate));
  Sample s;
  s.format = format;
  s.amplitudes.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    s.amplitudes[i] = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / format.sample_rate);
  return s;
}

/// Treats every byte of a file as one point: byte / 128 - 1.
inline Sample load_text(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  Sample s;
  s.amplitudes.reserve(bytes.size());
  for (unsigned char b : bytes) s.amplitudes.push_back(b / 128.0 - 1.0);
  return s;
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline void write_sample_text(const Sample& sample, const std::filesystem::path& path) {
  std::string text;
  for (double a : sample.amplitudes) {
    text += format_double(a);
    text += '\n';
  }
  detail::write_file_bytes(path, text);
}

/// Reads a one-amplitude-per-line dump back.
inline Sample read_sample_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open \"" + path.string() + "\"");
  Sample s;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size())
      throw FormatError("bad amplitude line: \"" + line + "\"");
    s.amplitudes.push_back(v);
  }
  return s;
}

}  // namespace patrec
