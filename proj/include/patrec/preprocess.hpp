#pragma once

// Amplitude-domain cleanup and FFT overlap-add filtering.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "patrec/audio_io.hpp"
#include "patrec/fft.hpp"

namespace patrec {

enum class PreprocessMethod {
  raw,
  normalize,
  low_pass,
  high_pass,
  band_pass,
  band_stop,
  boost,
  high_pass_boost,
  endpoint,
};

struct PreprocessConfig {
  PreprocessMethod method = PreprocessMethod::normalize;
  bool remove_silence = false;
  double silence_threshold = 0.01;
  bool noise = false;  // noise subtraction has no algorithm; never applied
  bool endpoint_edges = true;
  bool endpoint_runs = true;
  std::size_t filter_window = 1024;

  void validate() const {
    if (!(silence_threshold > 0.0 && silence_threshold < 1.0))
      throw std::invalid_argument("silence threshold must lie in (0, 1)");
    if (!is_power_of_two(filter_window) || filter_window < 2)
      throw std::invalid_argument("filter window must be a power of two >= 2");
  }
};

inline constexpr double kLowPassCutoffHz = 2853.0;
inline constexpr double kBandLowHz = 1000.0;
inline constexpr double kBandHighHz = 2853.0;
inline constexpr double kBoostOnsetHz = 1000.0;
inline constexpr double kBoostGain = 5.0 * std::numbers::pi;

/// Peaks at or below this are treated as silence by normalize().
inline constexpr double kNearZeroPeak = 1e-12;

inline double peak_amplitude(std::span<const double> xs) noexcept {
  double peak = 0.0;
  for (double x : xs) peak = std::max(peak, std::abs(x));
  return peak;
}

inline Sample normalize(const Sample& s) {
  const double peak = peak_amplitude(s.amplitudes);
  if (peak <= kNearZeroPeak) return s;
  Sample out = s;
  for (double& a : out.amplitudes) a /= peak;
  return out;
}

/// Keeps the points with |a| >= threshold, in order.
inline Sample remove_silence(const Sample& s, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("silence threshold must lie in (0, 1)");
  Sample out;
  out.format = s.format;
  for (double a : s.amplitudes)
    if (std::abs(a) >= threshold) out.amplitudes.push_back(a);
  return out;
}

/// Reduces a sample to its strict local extrema; `edges` adds the first and
/// last points, `runs` adds every member of a run of equal values.
inline Sample endpoint(const Sample& s, bool edges = true, bool runs = true) {
  const auto& a = s.amplitudes;
  const std::size_t n = a.size();
  Sample out;
  out.format = s.format;
  for (std::size_t i = 0; i < n; ++i) {
    bool keep = false;
    if (i > 0 && i + 1 < n) {
      keep = (a[i] > a[i - 1] && a[i] > a[i + 1]) || (a[i] < a[i - 1] && a[i] < a[i + 1]);
    }
    if (edges && (i == 0 || i + 1 == n)) keep = true;
    if (runs && ((i > 0 && a[i] == a[i - 1]) || (i + 1 < n && a[i] == a[i + 1]))) keep = true;
    if (keep) out.amplitudes.push_back(a[i]);
  }
  return out;
}

/// floor(hz * window / sample_rate)
inline std::size_t cutoff_bin(double hz, std::size_t window, int sample_rate) {
  if (sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
  const double bin = std::floor(hz * static_cast<double>(window) / sample_rate);
  return bin <= 0.0 ? 0 : static_cast<std::size_t>(bin);
}

using FrequencyResponse = std::vector<double>;

inline FrequencyResponse unity_response(std::size_t window) { return FrequencyResponse(window / 2, 1.0); }

inline FrequencyResponse low_pass_response(std::size_t window, int rate, double cutoff_hz = kLowPassCutoffHz) {
  FrequencyResponse r(window / 2, 0.0);
  const std::size_t cb = cutoff_bin(cutoff_hz, window, rate);
  for (std::size_t k = 0; k < r.size() && k < cb; ++k) r[k] = 1.0;
  return r;
}

inline FrequencyResponse high_pass_response(std::size_t window, int rate, double cutoff_hz = kLowPassCutoffHz) {
  FrequencyResponse r(window / 2, 0.0);
  for (std::size_t k = cutoff_bin(cutoff_hz, window, rate); k < r.size(); ++k) r[k] = 1.0;
  return r;
}

/// Passes bins in [bin(low), bin(high)] inclusive.
inline FrequencyResponse band_pass_response(std::size_t window, int rate, double low_hz = kBandLowHz,
                                            double high_hz = kBandHighHz) {
  FrequencyResponse r(window / 2, 0.0);
  const std::size_t lo = cutoff_bin(low_hz, window, rate);
  const std::size_t hi = cutoff_bin(high_hz, window, rate);
  for (std::size_t k = lo; k <= hi && k < r.size(); ++k) r[k] = 1.0;
  return r;
}

inline FrequencyResponse band_stop_response(std::size_t window, int rate, double low_hz = kBandLowHz,
                                            double high_hz = kBandHighHz) {
  FrequencyResponse r = band_pass_response(window, rate, low_hz, high_hz);
  for (double& g : r) g = 1.0 - g;
  return r;
}

inline FrequencyResponse boost_response(std::size_t window, int rate) {
  FrequencyResponse r(window / 2, 1.0);
  for (std::size_t k = cutoff_bin(kBoostOnsetHz, window, rate); k < r.size(); ++k) r[k] = kBoostGain;
  return r;
}

/// Mean of hamming(i) + hamming(i + window/2) over a half window; the gain a
/// unity response picks up from two sqrt-Hamming passes at 50% overlap.
inline double overlap_gain(std::size_t window) {
  const std::size_t hop = window / 2;
  double sum = 0.0;
  for (std::size_t i = 0; i < hop; ++i) sum += hamming(i, window) + hamming(i + hop, window);
  return sum / static_cast<double>(hop);
}

/// Overlap-add FFT filter. Frames of `window` points advance by window/2,
/// starting half a window before the signal so every point is covered twice.
/// Each frame is tapered by sqrt(Hamming), transformed, scaled bin-wise by
/// `response` (mirrored onto the negative frequencies), inverted, tapered
/// again and summed. The sum is divided by overlap_gain(window).
inline Sample fft_filter(const Sample& s, std::span<const double> response, std::size_t window) {
  if (!is_power_of_two(window) || window < 2)
    throw std::invalid_argument("filter window must be a power of two >= 2");
  if (response.size() != window / 2)
    throw std::invalid_argument("frequency response must have window/2 gains");
  for (double g : response)
    if (!(g >= 0.0)) throw std::invalid_argument("frequency response gains must be non-negative");

  const std::size_t hop = window / 2;
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  std::vector<double> taper(window);
  for (std::size_t i = 0; i < window; ++i) taper[i] = std::sqrt(hamming(i, window));
  const double gain = overlap_gain(window);

  Sample out;
  out.format = s.format;
  out.amplitudes.assign(s.size(), 0.0);
  std::vector<double> re(window), im(window);

  for (std::ptrdiff_t start = -static_cast<std::ptrdiff_t>(hop); start < n;
       start += static_cast<std::ptrdiff_t>(hop)) {
    for (std::size_t i = 0; i < window; ++i) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(i);
      re[i] = (idx >= 0 && idx < n) ? s.amplitudes[static_cast<std::size_t>(idx)] * taper[i] : 0.0;
      im[i] = 0.0;
    }
    fft(re, im);
    for (std::size_t k = 0; k < hop; ++k) {
      re[k] *= response[k];
      im[k] *= response[k];
      if (k > 0) {
        re[window - k] *= response[k];
        im[window - k] *= response[k];
      }
    }
    re[hop] *= response[hop - 1];
    im[hop] *= response[hop - 1];
    inverse_fft(re, im);
    for (std::size_t i = 0; i < window; ++i) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(i);
      if (idx >= 0 && idx < n) out.amplitudes[static_cast<std::size_t>(idx)] += re[i] * taper[i];
    }
  }
  for (double& a : out.amplitudes) a /= gain;
  return out;
}

inline Sample low_pass(const Sample& s, std::size_t window = 1024) {
  return fft_filter(s, low_pass_response(window, s.format.sample_rate), window);
}

inline Sample high_pass(const Sample& s, std::size_t window = 1024) {
  return fft_filter(s, high_pass_response(window, s.format.sample_rate), window);
}

inline Sample band_pass(const Sample& s, std::size_t window = 1024) {
  return fft_filter(s, band_pass_response(window, s.format.sample_rate), window);
}

inline Sample band_stop(const Sample& s, std::size_t window = 1024) {
  return fft_filter(s, band_stop_response(window, s.format.sample_rate), window);
}

/// Boosts bins from ~1000 Hz up by 5*pi, then rescales the whole signal so
/// its peak equals the input's peak.
inline Sample high_freq_boost(const Sample& s, std::size_t window = 1024) {
  const double peak_in = peak_amplitude(s.amplitudes);
  Sample out = fft_filter(s, boost_response(window, s.format.sample_rate), window);
  const double peak_out = peak_amplitude(out.amplitudes);
  if (peak_out > 0.0 && peak_in > 0.0) {
    const double scale = peak_in / peak_out;
    for (double& a : out.amplitudes) a *= scale;
  }
  return out;
}

/// Normalization (skipped for raw), optional silence removal, then the
/// configured filter.
inline Sample preprocess(const PreprocessConfig& config, const Sample& s) {
  config.validate();
  if (config.method == PreprocessMethod::raw) return s;

  Sample x = normalize(s);
  if (config.remove_silence) x = remove_silence(x, config.silence_threshold);

  const std::size_t w = config.filter_window;
  switch (config.method) {
    case PreprocessMethod::raw:
    case PreprocessMethod::normalize:
      return x;
    case PreprocessMethod::low_pass:
      return low_pass(x, w);
    case PreprocessMethod::high_pass:
      return high_pass(x, w);
    case PreprocessMethod::band_pass:
      return band_pass(x, w);
    case PreprocessMethod::band_stop:
      return band_stop(x, w);
    case PreprocessMethod::boost:
      return high_freq_boost(x, w);
    case PreprocessMethod::high_pass_boost:
      return high_freq_boost(high_pass(x, w), w);
    case PreprocessMethod::endpoint:
      return endpoint(x, config.endpoint_edges, config.endpoint_runs);
  }
  throw std::invalid_argument("unknown preprocessing method");
}

/// second(first(s))
inline Sample chain(const PreprocessConfig& first, const PreprocessConfig& second, const Sample& s) {
  return preprocess(second, preprocess(first, s));
}

/// Non-fatal notes about a configuration, e.g. inert flags.
inline std::vector<std::string> preprocess_warnings(const PreprocessConfig& config) {
  std::vector<std::string> w;
  if (config.noise) w.emplace_back("noise removal is not implemented; flag ignored");
  return w;
}

inline std::string_view to_string(PreprocessMethod m) {
  switch (m) {
    case PreprocessMethod::raw: return "raw";
    case PreprocessMethod::normalize: return "norm";
    case PreprocessMethod::low_pass: return "low";
    case PreprocessMethod::high_pass: return "high";
    case PreprocessMethod::band_pass: return "band";
    case PreprocessMethod::band_stop: return "bandstop";
    case PreprocessMethod::boost: return "boost";
    case PreprocessMethod::high_pass_boost: return "highpassboost";
    case PreprocessMethod::endpoint: return "endp";
  }
  return "unknown";
}

}  // namespace patrec
