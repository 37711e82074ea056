#pragma once

// Visual dumps: PPM spectrograms and tab-delimited wave graphs.

#include <algorithm>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "patrec/audio_io.hpp"
#include "patrec/features.hpp"

namespace patrec {

inline constexpr std::size_t kSpectrogramWindow = 128;

/// Binary P6 image: one column per frame (time on x), one row per bin with
/// the lowest frequency at the bottom; gray = 255 * (1 - magnitude / max).
inline std::string encode_spectrogram(const std::vector<std::vector<double>>& frames) {
  if (frames.empty()) throw std::invalid_argument("spectrogram needs at least one frame");
  const std::size_t height = frames.front().size();
  if (height == 0) throw std::invalid_argument("spectrogram frames are empty");
  double max = 0.0;
  for (const auto& f : frames) {
    if (f.size() != height) throw std::invalid_argument("spectrogram frames differ in length");
    for (double m : f) max = std::max(max, m);
  }
  const std::size_t width = frames.size();
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + width * height * 3);
  for (std::size_t row = 0; row < height; ++row) {
    const std::size_t bin = height - 1 - row;
    for (const auto& f : frames) {
      const double level = max > 0.0 ? f[bin] / max : 0.0;
      const auto gray = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - level))));
      out.append(3, gray);
    }
  }
  return out;
}

inline void emit_spectrogram(const std::vector<std::vector<double>>& frames, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_spectrogram(frames));
}

/// 128-point Hamming frames at half-window steps.
inline void emit_spectrogram(const Sample& s, const std::filesystem::path& path) {
  emit_spectrogram(fft_frames(s.amplitudes, kSpectrogramWindow), path);
}

inline std::string encode_wave_graph(const Sample& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += std::to_string(i) + "\t" + format_double(s.amplitudes[i]) + "\n";
  return out;
}

inline void emit_wave_graph(const Sample& s, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_wave_graph(s));
}

}  // namespace patrec
