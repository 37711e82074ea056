#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <random>

#include "patrec/features.hpp"
#include "support.hpp"

using namespace patrec;

namespace {

Sample of(std::vector<double> xs) {
  Sample s;
  s.amplitudes = std::move(xs);
  return s;
}

// Coefficients from a dense solve of sum_k a_k R(|i-k|) = R(i), i = 1..p.
std::vector<double> toeplitz_solve(const std::vector<double>& x, std::size_t p) {
  std::vector<double> r(p + 1, 0.0);
  for (std::size_t k = 0; k <= p; ++k)
    for (std::size_t m = k; m < x.size(); ++m) r[k] += x[m] * x[m - k];
  Eigen::MatrixXd a(p, p);
  Eigen::VectorXd b(p);
  for (std::size_t i = 0; i < p; ++i) {
    b(static_cast<Eigen::Index>(i)) = r[i + 1];
    for (std::size_t j = 0; j < p; ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[i > j ? i - j : j - i];
  }
  const Eigen::VectorXd sol = a.fullPivLu().solve(b);
  return {sol.data(), sol.data() + sol.size()};
}

}  // namespace

TEST(Hamming, SmallExamples) {
  EXPECT_NEAR(hamming(0, 3), 0.08, 1e-15);
  EXPECT_NEAR(hamming(1, 3), 1.0, 1e-15);
  EXPECT_NEAR(hamming(2, 3), 0.08, 1e-15);
}

TEST(Fft, TrivialSpectra) {
  std::vector<double> re(16, 0.0), im(16, 0.0);
  fft(re, im);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(std::hypot(re[i], im[i]), 0.0);
  re.assign(16, 0.0);
  re[0] = 1.0;
  im.assign(16, 0.0);
  fft(re, im);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(std::hypot(re[i], im[i]), 1.0, 1e-15);
}

TEST(ExtractFft, LengthAndZeroSample) {
  const auto z = extract_fft(of(std::vector<double>(3000, 0.0)));
  EXPECT_EQ(z.size(), 512u);
  for (double v : z.values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(extract_fft(Sample{}), std::invalid_argument);
  FeatureConfig small;
  small.fft_window = 64;
  EXPECT_EQ(extract_fft(of({0.1, 0.2, 0.3}), small).size(), 32u);
  EXPECT_EQ(extract_fft(of(std::vector<double>(5000, 0.3))).size(), 512u);
}

TEST(ExtractFft, SineBinIsArgmax) {
  for (std::size_t k : {10u, 64u, 200u, 400u}) {
    const double hz = static_cast<double>(k) * 8000.0 / 1024.0;
    const auto fv = extract_fft(generate_sine(hz, 1.0));
    const auto it = std::max_element(fv.values.begin(), fv.values.end());
    EXPECT_EQ(static_cast<std::size_t>(it - fv.values.begin()), k);
  }
}

TEST(ExtractFft, SingleFrameMatchesNaiveDft) {
  std::mt19937_64 rng(21);
  const auto x = testsupport::uniform_vector(rng, 256);
  FeatureConfig c;
  c.fft_window = 256;
  const auto fv = extract_fft(of(x), c);
  std::vector<std::complex<double>> w(256);
  for (std::size_t i = 0; i < 256; ++i) w[i] = x[i] * (0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / 255.0));
  const auto ref = testsupport::naive_dft(w);
  for (std::size_t k = 0; k < 128; ++k) EXPECT_NEAR(fv.values[k], std::abs(ref[k]), 1e-9 * std::abs(ref[k]) + 1e-12);
}

TEST(Autocorrelation, Examples) {
  const std::vector<double> a{1, 0, 0}, b{1, 1};
  EXPECT_EQ(autocorrelation(a, 0), 1.0);
  EXPECT_EQ(autocorrelation(b, 1), 1.0);
  EXPECT_THROW(autocorrelation(b, 2), std::invalid_argument);
  std::mt19937_64 rng(3);
  const auto x = testsupport::uniform_vector(rng, 50);
  for (std::size_t k = 0; k < x.size(); ++k) {
    double ref = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < x.size(); ++j)
        if (i == j + k) ref += x[i] * x[j];
    EXPECT_NEAR(autocorrelation(x, k), ref, 1e-12);
  }
}

TEST(Lpc, ImpulseGivesZeroCoefficients) {
  std::vector<double> x(32, 0.0);
  x[0] = 2.0;
  const auto r = lpc_coefficients(x, 8);
  for (double a : r.coefficients) EXPECT_EQ(a, 0.0);
  EXPECT_EQ(r.error, 4.0);
  EXPECT_THROW(lpc_coefficients(std::vector<double>(32, 0.0), 4), Error);
  EXPECT_THROW(lpc_coefficients(x, 32), std::invalid_argument);
  EXPECT_THROW(lpc_coefficients(x, 0), std::invalid_argument);
}

TEST(Lpc, MatchesDenseToeplitzSolve) {
  std::mt19937_64 rng(17);
  for (std::size_t p = 1; p <= 20; ++p) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto x = testsupport::uniform_vector(rng, 128);
      const auto got = lpc_coefficients(x, p);
      const auto want = toeplitz_solve(x, p);
      ASSERT_EQ(got.coefficients.size(), p);
      for (std::size_t k = 0; k < p; ++k) EXPECT_NEAR(got.coefficients[k], want[k], 1e-6) << "p=" << p;
      for (std::size_t m = 1; m < got.residuals.size(); ++m) {
        EXPECT_LE(got.residuals[m], got.residuals[m - 1] * (1 + 1e-12));
        EXPECT_GE(got.residuals[m], 0.0);
      }
    }
  }
}

TEST(Lpc, RecoversAr1) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> eps(0.0, 1.0);
  std::vector<double> x(10000);
  double prev = 0.0;
  for (double& v : x) prev = v = 0.5 * prev + eps(rng);
  EXPECT_NEAR(lpc_coefficients(x, 1).coefficients[0], 0.5, 0.05);
}

TEST(ExtractLpc, LengthSingleFrameAndErrors) {
  std::mt19937_64 rng(5);
  const auto x = testsupport::uniform_vector(rng, 128);
  const auto fv = extract_lpc(of(x));
  ASSERT_EQ(fv.size(), 20u);
  std::vector<double> w(128);
  for (std::size_t i = 0; i < 128; ++i) w[i] = x[i] * hamming(i, 128);
  const auto direct = lpc_coefficients(w, 20).coefficients;
  for (std::size_t k = 0; k < 20; ++k) EXPECT_DOUBLE_EQ(fv.values[k], direct[k]);

  EXPECT_EQ(extract_lpc(of(testsupport::uniform_vector(rng, 4000))).size(), 20u);
  EXPECT_THROW(extract_lpc(of(std::vector<double>(1000, 0.0))), Error);
  EXPECT_THROW(extract_lpc(of(std::vector<double>(100, 0.5))), std::invalid_argument);
}

TEST(ExtractMinmax, Examples) {
  EXPECT_EQ(extract_minmax(of({3, 1, 2}), 1, 1).values, (std::vector<double>{1, 3}));
  EXPECT_EQ(extract_minmax(of({5}), 2, 2).values, (std::vector<double>{5, 5, 5, 5}));
  EXPECT_THROW(extract_minmax(Sample{}, 1, 1), std::invalid_argument);
  EXPECT_THROW(extract_minmax(of({1}), 0, 0), std::invalid_argument);
}

TEST(ExtractMinmax, MatchesSortAndSlice) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = testsupport::uniform_vector(rng, 150 + trial);
    const auto fv = extract_minmax(of(x), 50, 50);
    auto sorted = x;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> want(sorted.begin(), sorted.begin() + 50);
    want.insert(want.end(), sorted.end() - 50, sorted.end());
    EXPECT_EQ(fv.values, want);
    EXPECT_TRUE(std::is_sorted(fv.values.begin(), fv.values.begin() + 50));
    EXPECT_TRUE(std::is_sorted(fv.values.begin() + 50, fv.values.end()));
    EXPECT_LE(fv.values[49], fv.values[50]);
  }
}

TEST(ExtractRandom, Determinism) {
  std::mt19937_64 rng(2);
  const Sample s = of(testsupport::uniform_vector(rng, 2000));
  FeatureConfig c;
  const auto a = extract_random(s, c, 1), b = extract_random(s, c, 1), d = extract_random(s, c, 2);
  EXPECT_EQ(a.size(), 256u);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, d.values);
  for (double v : extract_random(of(std::vector<double>(600, 0.0)), c, 5).values) EXPECT_EQ(v, 0.0);
}

TEST(GaussianSource, Moments) {
  GaussianSource g(123);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = g.next();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(ExtractAggregate, ConcatenatesInOrder) {
  std::mt19937_64 rng(31);
  const Sample s = of(testsupport::uniform_vector(rng, 4000));
  FeatureConfig c;
  const auto agg = extract_aggregate(s, c);
  ASSERT_EQ(agg.size(), 532u);
  const auto f = extract_fft(s), l = extract_lpc(s);
  EXPECT_TRUE(std::equal(f.values.begin(), f.values.end(), agg.values.begin()));
  EXPECT_TRUE(std::equal(l.values.begin(), l.values.end(), agg.values.begin() + 512));

  c.aggregate_list = {FeatureMethod::lpc, FeatureMethod::fft};
  const auto rev = extract_aggregate(s, c);
  EXPECT_TRUE(std::equal(l.values.begin(), l.values.end(), rev.values.begin()));
  EXPECT_TRUE(std::equal(f.values.begin(), f.values.end(), rev.values.begin() + 20));

  c.aggregate_list = {FeatureMethod::fft};
  EXPECT_EQ(extract_aggregate(s, c).values, f.values);

  c.aggregate_list = {};
  EXPECT_THROW(extract_aggregate(s, c), std::invalid_argument);
  c.aggregate_list = {FeatureMethod::fft, FeatureMethod::lpc};
  EXPECT_THROW(extract_aggregate(of({0.1, 0.2}), c), std::invalid_argument);  // lpc needs a full window
}

TEST(Features, LengthsAreFixedPerConfig) {
  std::mt19937_64 rng(44);
  for (std::size_t n : {200u, 1500u, 9000u}) {
    const Sample s = of(testsupport::uniform_vector(rng, n));
    EXPECT_EQ(extract(FeatureMethod::fft, s).size(), 512u);
    EXPECT_EQ(extract(FeatureMethod::lpc, s).size(), 20u);
    EXPECT_EQ(extract(FeatureMethod::minmax, s).size(), 100u);
    EXPECT_EQ(extract(FeatureMethod::random, s).size(), 256u);
  }
  FeatureConfig bad;
  bad.lpc_order = 128;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = {};
  bad.fft_window = 1000;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_EQ(to_string(FeatureMethod::random), "randfe");
}
