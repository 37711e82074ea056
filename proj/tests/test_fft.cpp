#include <gtest/gtest.h>

#include <complex>
#include <random>

#include "patrec/fft.hpp"
#include "support.hpp"

using namespace patrec;

namespace {

double max_abs(const std::vector<std::complex<double>>& v) {
  double m = 0.0;
  for (const auto& c : v) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace

TEST(Fft, MatchesNaiveDftForEveryPowerOfTwo) {
  std::mt19937_64 rng(42);
  for (std::size_t n = 2; n <= 2048; n *= 2) {
    auto re = testsupport::uniform_vector(rng, n);
    auto im = testsupport::uniform_vector(rng, n);
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = {re[i], im[i]};
    const auto ref = testsupport::naive_dft(x);
    fft(re, im);
    const double scale = max_abs(ref);
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(std::complex<double>(re[k], im[k]) - ref[k]));
    EXPECT_LE(worst / scale, 1e-9) << "n=" << n;
  }
}

TEST(Fft, ParsevalAndRoundTrip) {
  std::mt19937_64 rng(5);
  for (std::size_t n = 2; n <= 2048; n *= 2) {
    auto re = testsupport::uniform_vector(rng, n);
    auto im = testsupport::uniform_vector(rng, n);
    const auto re0 = re, im0 = im;
    double energy_t = 0.0;
    for (std::size_t i = 0; i < n; ++i) energy_t += re[i] * re[i] + im[i] * im[i];
    fft(re, im);
    double energy_f = 0.0;
    for (std::size_t i = 0; i < n; ++i) energy_f += re[i] * re[i] + im[i] * im[i];
    EXPECT_NEAR(energy_f / static_cast<double>(n), energy_t, 1e-9 * energy_t) << "n=" << n;
    inverse_fft(re, im);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_NEAR(re[i], re0[i], 1e-9);
      ASSERT_NEAR(im[i], im0[i], 1e-9);
    }
  }
}

TEST(Fft, RejectsBadLengths) {
  std::vector<double> re(6), im(6);
  EXPECT_THROW(fft(re, im), std::invalid_argument);
  std::vector<double> a(8), b(4);
  EXPECT_THROW(fft(a, b), std::invalid_argument);
  std::vector<double> one{3.0}, zero{0.0};
  fft(one, zero);
  EXPECT_EQ(one[0], 3.0);
}

TEST(Hamming, ShapeAndSymmetry) {
  const auto w = hamming_window(64);
  EXPECT_NEAR(w.front(), 0.08, 1e-15);
  EXPECT_NEAR(w.back(), 0.08, 1e-15);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], w[w.size() - 1 - i], 1e-12);
  EXPECT_THROW(hamming(0, 1), std::invalid_argument);
  EXPECT_THROW(hamming(5, 5), std::invalid_argument);
  EXPECT_TRUE(is_power_of_two(1024));
  EXPECT_FALSE(is_power_of_two(0));
  EXPECT_FALSE(is_power_of_two(12));
}
