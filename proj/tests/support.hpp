#pragma once

// Test-only helpers: scratch directories, reference transforms, RNG shortcuts.

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("patrec-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// O(n^2) textbook DFT, X(k) = sum x(n) e^{-2 pi i k n / N}.
inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

inline std::vector<double> uniform_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline double rms(const std::vector<double>& xs, std::size_t from = 0, std::size_t to = 0) {
  if (to == 0) to = xs.size();
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += xs[i] * xs[i];
  return std::sqrt(s / static_cast<double>(to - from));
}

// One "speaker": a fixed pair of tones. `variant` shifts the phases and the
// mix a little so the training takes differ; `noise` adds uniform noise of
// that peak amplitude.
struct Voice {
  double f1, f2;
};

inline std::vector<Voice> synthetic_voices() { return {{220, 1250}, {330, 1900}, {470, 2600}, {610, 3300}}; }

inline std::vector<double> voice_take(const Voice& v, int variant, double noise, std::uint64_t seed,
                                      int rate = 8000, double seconds = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto n = static_cast<std::size_t>(rate * seconds);
  const double p1 = 0.3 * variant, p2 = 0.7 * variant, w2 = 0.35 + 0.02 * variant;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    x[i] = 0.55 * std::sin(2 * std::numbers::pi * v.f1 * t + p1) + w2 * std::sin(2 * std::numbers::pi * v.f2 * t + p2);
    if (noise > 0.0) x[i] += noise * u(rng);
  }
  return x;
}

}  // namespace testsupport
