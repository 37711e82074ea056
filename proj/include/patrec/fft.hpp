#pragma once

// Radix-2 decimation-in-time FFT and the Hamming window shared by the
// preprocessing filters and the feature extractors.

#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace patrec {

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && std::has_single_bit(n); }

/// 0.54 - 0.46 cos(2 pi n / (l - 1)), symmetric in n <-> l-1-n.
inline double hamming(std::size_t n, std::size_t l) {
  if (l < 2) throw std::invalid_argument("hamming window needs at least 2 points");
  if (n >= l) throw std::invalid_argument("hamming index out of range");
  return 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(l - 1));
}

inline std::vector<double> hamming_window(std::size_t l) {
  std::vector<double> w(l);
  for (std::size_t n = 0; n < l; ++n) w[n] = hamming(n, l);
  return w;
}

/// In-place complex FFT over separate real/imaginary arrays. The forward
/// transform is unscaled; `inverse` conjugates the twiddles and divides by N.
inline void fft(std::span<double> re, std::span<double> im, bool inverse = false) {
  const std::size_t n = re.size();
  if (im.size() != n) throw std::invalid_argument("fft: real and imaginary parts differ in length");
  if (!is_power_of_two(n)) throw std::invalid_argument("fft: length must be a power of two");

  // Bit-reversal shuffle.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }

  // Butterflies. Twiddles are computed directly per stage to avoid the
  // drift of the incremental-rotation recurrence.
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const double step = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t k = 0; k < half; ++k) {
      const double wr = std::cos(step * static_cast<double>(k));
      const double wi = std::sin(step * static_cast<double>(k));
      for (std::size_t start = 0; start < n; start += len) {
        const std::size_t a = start + k;
        const std::size_t b = a + half;
        const double tr = wr * re[b] - wi * im[b];
        const double ti = wr * im[b] + wi * re[b];
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      re[i] *= scale;
      im[i] *= scale;
    }
  }
}

inline void inverse_fft(std::span<double> re, std::span<double> im) { fft(re, im, true); }

}  // namespace patrec
