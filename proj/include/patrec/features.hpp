#pragma once

// Feature extraction: averaged FFT magnitudes, averaged LPC coefficients,
// min/max amplitudes, concatenating aggregation and a random baseline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "patrec/audio_io.hpp"
#include "patrec/error.hpp"
#include "patrec/fft.hpp"

namespace patrec {

enum class FeatureMethod { fft, lpc, minmax, random, aggregate };

inline std::string_view to_string(FeatureMethod m) {
  switch (m) {
    case FeatureMethod::fft: return "fft";
    case FeatureMethod::lpc: return "lpc";
    case FeatureMethod::minmax: return "minmax";
    case FeatureMethod::random: return "randfe";
    case FeatureMethod::aggregate: return "aggr";
  }
  return "unknown";
}

struct FeatureConfig {
  std::size_t fft_window = 1024;
  std::size_t lpc_order = 20;
  std::size_t lpc_window = 128;
  std::size_t minmax_n_mins = 50;
  std::size_t minmax_x_maxes = 50;
  std::vector<FeatureMethod> aggregate_list{FeatureMethod::fft, FeatureMethod::lpc};
  std::size_t random_window = 256;
  std::uint64_t seed = 0;

  void validate() const {
    if (!is_power_of_two(fft_window) || fft_window < 2)
      throw std::invalid_argument("fft window must be a power of two >= 2");
    if (lpc_order < 1) throw std::invalid_argument("lpc order must be >= 1");
    if (lpc_order >= lpc_window) throw std::invalid_argument("lpc order must be smaller than the lpc window");
    if (random_window < 1) throw std::invalid_argument("random window must be >= 1");
  }
};

struct FeatureVector {
  std::vector<double> values;
  FeatureMethod method = FeatureMethod::fft;
  std::string params_digest;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

inline std::string params_digest(FeatureMethod m, const FeatureConfig& c) {
  switch (m) {
    case FeatureMethod::fft: return "fft/w" + std::to_string(c.fft_window);
    case FeatureMethod::lpc: return "lpc/p" + std::to_string(c.lpc_order) + "/w" + std::to_string(c.lpc_window);
    case FeatureMethod::minmax:
      return "minmax/n" + std::to_string(c.minmax_n_mins) + "/x" + std::to_string(c.minmax_x_maxes);
    case FeatureMethod::random: return "randfe/w" + std::to_string(c.random_window);
    case FeatureMethod::aggregate: {
      std::string d = "aggr";
      for (auto sub : c.aggregate_list) d += "/" + std::string(to_string(sub));
      return d;
    }
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// FFT features

/// Start offsets of the complete frames of `window` points at 50% overlap.
inline std::vector<std::size_t> frame_starts(std::size_t n, std::size_t window) {
  std::vector<std::size_t> starts;
  const std::size_t hop = std::max<std::size_t>(window / 2, 1);
  for (std::size_t s = 0; s + window <= n; s += hop) starts.push_back(s);
  return starts;
}

/// Hamming-windowed magnitude spectra (first window/2 bins) of every complete
/// half-overlapped frame. A sample shorter than one window yields a single
/// zero-padded frame.
inline std::vector<std::vector<double>> fft_frames(std::span<const double> x, std::size_t window) {
  if (!is_power_of_two(window) || window < 2) throw std::invalid_argument("fft window must be a power of two >= 2");
  auto starts = frame_starts(x.size(), window);
  if (starts.empty()) starts.push_back(0);
  const auto w = hamming_window(window);
  std::vector<std::vector<double>> frames;
  frames.reserve(starts.size());
  std::vector<double> re(window), im(window);
  for (std::size_t start : starts) {
    for (std::size_t i = 0; i < window; ++i) {
      re[i] = start + i < x.size() ? x[start + i] * w[i] : 0.0;
      im[i] = 0.0;
    }
    fft(re, im);
    std::vector<double> mag(window / 2);
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::hypot(re[k], im[k]);
    frames.push_back(std::move(mag));
  }
  return frames;
}

inline FeatureVector extract_fft(const Sample& s, const FeatureConfig& cfg = {}) {
  cfg.validate();
  if (s.empty()) throw std::invalid_argument("cannot extract FFT features from an empty sample");
  const auto frames = fft_frames(s.amplitudes, cfg.fft_window);
  FeatureVector fv;
  fv.method = FeatureMethod::fft;
  fv.params_digest = params_digest(FeatureMethod::fft, cfg);
  fv.values.assign(cfg.fft_window / 2, 0.0);
  for (const auto& f : frames)
    for (std::size_t k = 0; k < f.size(); ++k) fv.values[k] += f[k];
  for (double& v : fv.values) v /= static_cast<double>(frames.size());
  return fv;
}

// ---------------------------------------------------------------------------
// LPC

/// R(k) = sum_{m=k}^{n-1} x(m) x(m-k)
inline double autocorrelation(std::span<const double> x, std::size_t k) {
  if (k >= x.size()) throw std::invalid_argument("autocorrelation lag out of range");
  double r = 0.0;
  for (std::size_t m = k; m < x.size(); ++m) r += x[m] * x[m - k];
  return r;
}

struct LpcResult {
  std::vector<double> coefficients;  // a(1..p); x(n) ~ sum_k a(k) x(n-k)
  double error = 0.0;                // E_p
  std::vector<double> residuals;     // E_0..E_p
};

/// Levinson-Durbin recursion over the autocorrelation of `x`.
inline LpcResult lpc_coefficients(std::span<const double> x, std::size_t p) {
  if (p < 1) throw std::invalid_argument("lpc order must be >= 1");
  if (p >= x.size()) throw std::invalid_argument("lpc order must be smaller than the window");
  std::vector<double> r(p + 1);
  for (std::size_t k = 0; k <= p; ++k) r[k] = autocorrelation(x, k);
  if (r[0] == 0.0) throw Error("lpc: zero-energy window (R(0) == 0)");

  std::vector<double> a(p + 1, 0.0), prev(p + 1, 0.0);
  LpcResult res;
  res.residuals.reserve(p + 1);
  double e = r[0];
  res.residuals.push_back(e);
  for (std::size_t m = 1; m <= p; ++m) {
    if (!(e > 0.0)) throw Error("lpc: prediction error reached zero at order " + std::to_string(m - 1));
    double acc = r[m];
    for (std::size_t k = 1; k < m; ++k) acc -= a[k] * r[m - k];
    const double km = acc / e;
    prev = a;
    a[m] = km;
    for (std::size_t k = 1; k < m; ++k) a[k] = prev[k] - km * prev[m - k];
    e *= (1.0 - km * km);
    res.residuals.push_back(e);
  }
  res.coefficients.assign(a.begin() + 1, a.end());
  res.error = e;
  return res;
}

/// Mean LPC coefficient vector over Hamming-windowed half-overlapped frames.
/// Frames whose recursion degenerates (silent frames) are left out of the mean.
inline FeatureVector extract_lpc(const Sample& s, const FeatureConfig& cfg = {}) {
  cfg.validate();
  if (s.size() < cfg.lpc_window)
    throw std::invalid_argument("sample shorter than one LPC window (" + std::to_string(cfg.lpc_window) + ")");
  const auto w = hamming_window(cfg.lpc_window);
  std::vector<double> frame(cfg.lpc_window);
  std::vector<double> sum(cfg.lpc_order, 0.0);
  std::size_t used = 0;
  for (std::size_t start : frame_starts(s.size(), cfg.lpc_window)) {
    for (std::size_t i = 0; i < cfg.lpc_window; ++i) frame[i] = s.amplitudes[start + i] * w[i];
    try {
      const auto lpc = lpc_coefficients(frame, cfg.lpc_order);
      for (std::size_t k = 0; k < cfg.lpc_order; ++k) sum[k] += lpc.coefficients[k];
      ++used;
    } catch (const Error&) {
      continue;
    }
  }
  if (used == 0) throw Error("lpc: every frame has zero energy");
  FeatureVector fv;
  fv.method = FeatureMethod::lpc;
  fv.params_digest = params_digest(FeatureMethod::lpc, cfg);
  fv.values = std::move(sum);
  for (double& v : fv.values) v /= static_cast<double>(used);
  return fv;
}

// ---------------------------------------------------------------------------
// Min/max amplitudes

/// The n smallest then the x largest amplitudes, each ascending. A sample
/// with fewer than n + x points is padded with copies of its middle (sorted)
/// element first.
inline FeatureVector extract_minmax(const Sample& s, std::size_t n_mins, std::size_t x_maxes) {
  if (n_mins + x_maxes < 1) throw std::invalid_argument("minmax needs at least one min or max");
  if (s.empty()) throw std::invalid_argument("cannot extract min/max amplitudes from an empty sample");
  std::vector<double> sorted = s.amplitudes;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t want = n_mins + x_maxes;
  if (sorted.size() < want) {
    const double middle = sorted[sorted.size() / 2];
    sorted.insert(sorted.end(), want - sorted.size(), middle);
    std::sort(sorted.begin(), sorted.end());
  }
  FeatureVector fv;
  fv.method = FeatureMethod::minmax;
  fv.values.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n_mins));
  fv.values.insert(fv.values.end(), sorted.end() - static_cast<std::ptrdiff_t>(x_maxes), sorted.end());
  return fv;
}

inline FeatureVector extract_minmax(const Sample& s, const FeatureConfig& cfg = {}) {
  auto fv = extract_minmax(s, cfg.minmax_n_mins, cfg.minmax_x_maxes);
  fv.params_digest = params_digest(FeatureMethod::minmax, cfg);
  return fv;
}

// ---------------------------------------------------------------------------
// Random features

/// Box-Muller normal deviates over a 64-bit Mersenne Twister.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(theta);
    has_spare_ = true;
    return radius * std::cos(theta);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Each window of random_window points is scaled by one Gaussian draw and
/// accumulated into a window-length vector.
inline FeatureVector extract_random(const Sample& s, const FeatureConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  GaussianSource gauss(seed);
  FeatureVector fv;
  fv.method = FeatureMethod::random;
  fv.params_digest = params_digest(FeatureMethod::random, cfg);
  fv.values.assign(cfg.random_window, 0.0);
  for (std::size_t start = 0; start < s.size(); start += cfg.random_window) {
    const double g = gauss.next();
    for (std::size_t i = 0; i < cfg.random_window && start + i < s.size(); ++i)
      fv.values[i] += g * s.amplitudes[start + i];
  }
  return fv;
}

// ---------------------------------------------------------------------------
// Dispatch and aggregation

inline FeatureVector extract_aggregate(const Sample& s, const FeatureConfig& cfg);

inline FeatureVector extract(FeatureMethod m, const Sample& s, const FeatureConfig& cfg = {}) {
  switch (m) {
    case FeatureMethod::fft: return extract_fft(s, cfg);
    case FeatureMethod::lpc: return extract_lpc(s, cfg);
    case FeatureMethod::minmax: return extract_minmax(s, cfg);
    case FeatureMethod::random: return extract_random(s, cfg, cfg.seed);
    case FeatureMethod::aggregate: return extract_aggregate(s, cfg);
  }
  throw std::invalid_argument("unknown feature extraction method");
}

/// Runs every listed extractor with default settings on its own copy of the
/// sample, concurrently, and concatenates the results in list order.
inline FeatureVector extract_aggregate(const Sample& s, const FeatureConfig& cfg) {
  if (cfg.aggregate_list.empty()) throw std::invalid_argument("aggregate list is empty");
  for (auto m : cfg.aggregate_list)
    if (m == FeatureMethod::aggregate) throw std::invalid_argument("aggregates cannot nest");

  std::vector<std::future<FeatureVector>> parts;
  parts.reserve(cfg.aggregate_list.size());
  for (auto m : cfg.aggregate_list) {
    FeatureConfig defaults;
    defaults.seed = cfg.seed;
    parts.push_back(std::async(std::launch::async, [m, copy = s, defaults] { return extract(m, copy, defaults); }));
  }
  FeatureVector fv;
  fv.method = FeatureMethod::aggregate;
  fv.params_digest = params_digest(FeatureMethod::aggregate, cfg);
  // get() in declaration order; the first failure propagates.
  for (auto& part : parts) {
    const auto sub = part.get();
    fv.values.insert(fv.values.end(), sub.values.begin(), sub.values.end());
  }
  return fv;
}

}  // namespace patrec
