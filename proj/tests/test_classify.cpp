#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "patrec/classify.hpp"
#include "support.hpp"

using namespace patrec;
using V = std::vector<double>;

TEST(Distances, Examples) {
  EXPECT_EQ(chebyshev_distance(V{0, 0}, V{3, 4}), 7.0);
  EXPECT_EQ(euclidean_distance(V{0, 0}, V{3, 4}), 5.0);
  EXPECT_EQ(euclidean_distance(V{1, 2}, V{1, 2}), 0.0);
  EXPECT_DOUBLE_EQ(euclidean_distance(V{1, 1}, V{2, 2}), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(minkowski_distance(V{0, 0}, V{3, 4}, 1.0), 7.0);
  EXPECT_DOUBLE_EQ(minkowski_distance(V{0, 0}, V{3, 4}, 2.0), 5.0);
  EXPECT_DOUBLE_EQ(minkowski_distance(V{0, 0}, V{3, 4}), std::pow(729.0 + 4096.0, 1.0 / 6.0));
  EXPECT_THROW(minkowski_distance(V{0}, V{1}, 0.5), std::invalid_argument);
  EXPECT_THROW(euclidean_distance(V{0}, V{1, 2}), std::invalid_argument);

  EXPECT_DOUBLE_EQ(diff_distance(V{1, 1, 1}, V{1, 1, 5}, 0.5, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(diff_distance(V{2, 2, 2, 2}, V{2, 2, 2, 2}), -4 * kDefaultDiffError);
  EXPECT_DOUBLE_EQ(diff_distance(V{0, 0}, V{1, -2}, 0.1, 3.0), 3.0 + 6.0);
  EXPECT_THROW(diff_distance(V{0}, V{0}, 0.0), std::invalid_argument);

  EXPECT_EQ(hamming_distance(V{1, 2, 3}, V{1, 2, 3}), 0.0);
  EXPECT_EQ(hamming_distance(V{1, 2, 3}, V{1, 0, 3}), 1.0);
  EXPECT_EQ(hamming_distance(V{0, 0}, V{1, 1}), 2.0);

  EXPECT_DOUBLE_EQ(cosine_similarity(V{1, 1}, V{2, 2}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(V{1, 0}, V{0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(V{1, 0}, V{-1, 0}), -1.0);
  EXPECT_THROW(cosine_similarity(V{0, 0}, V{1, 0}), std::invalid_argument);
}

TEST(Distances, MetricIdentities) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto x = testsupport::uniform_vector(rng, 512), y = testsupport::uniform_vector(rng, 512);
    const double l1 = chebyshev_distance(x, y), l2 = euclidean_distance(x, y);
    ASSERT_NEAR(minkowski_distance(x, y, 1.0), l1, 1e-12 * l1);
    ASSERT_NEAR(minkowski_distance(x, y, 2.0), l2, 1e-12 * l2);
    if (trial % 50 == 0) {
      ASSERT_NEAR(mahalanobis_distance(x, y), l2, 1e-12 * l2);
    }
  }
}

TEST(Distances, SymmetryAndPositivity) {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = testsupport::uniform_vector(rng, 16), y = testsupport::uniform_vector(rng, 16);
    for (auto m : {Metric::chebyshev, Metric::euclidean, Metric::minkowski, Metric::hamming}) {
      EXPECT_EQ(metric_score(m, x, y), metric_score(m, y, x));
      EXPECT_EQ(metric_score(m, x, x), 0.0);
      EXPECT_GE(metric_score(m, x, y), 0.0);
    }
  }
}

TEST(Mahalanobis, AgainstDenseSolve) {
  Matrix four = Matrix::identity(2);
  four(0, 0) = four(1, 1) = 4.0;
  EXPECT_DOUBLE_EQ(mahalanobis_distance(V{0, 0}, V{3, 4}, four), 2.5);
  EXPECT_EQ(mahalanobis_distance(V{1, 2}, V{1, 2}, four), 0.0);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::MatrixXd c = a * a.transpose() + Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    c = ((c + c.transpose()) * 0.5).eval();  // exactly symmetric
    Matrix cov{n, std::vector<double>(n * n)};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) cov(i, j) = c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const auto x = testsupport::uniform_vector(rng, n), y = testsupport::uniform_vector(rng, n);
    Eigen::VectorXd d(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) d(static_cast<Eigen::Index>(i)) = x[i] - y[i];
    const double want = std::sqrt(d.dot(c.ldlt().solve(d)));
    EXPECT_NEAR(mahalanobis_distance(x, y, cov), want, 1e-10 * want);
  }

  Matrix singular{2, {1, 1, 1, 1}};
  EXPECT_THROW(mahalanobis_distance(V{0, 0}, V{1, 1}, singular), std::invalid_argument);
  Matrix asym{2, {1, 0.5, 0, 1}};
  EXPECT_THROW(mahalanobis_distance(V{0, 0}, V{1, 1}, asym), std::invalid_argument);
}

TEST(ClassifyDistance, MatchesBruteForceArgmin) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<int, V> clusters;
    for (int id = 0; id < 5; ++id) clusters[id * 3 + 1] = testsupport::uniform_vector(rng, 8);
    const auto v = testsupport::uniform_vector(rng, 8);
    for (auto m : {Metric::chebyshev, Metric::euclidean, Metric::minkowski, Metric::mahalanobis, Metric::cosine}) {
      int best_id = -1;
      double best = 0.0;
      for (const auto& [id, mean] : clusters) {
        const double d = metric_score(m, v, mean);
        if (best_id < 0 || d < best) best = d, best_id = id;
      }
      const auto rs = classify_distance(v, clusters, m);
      EXPECT_EQ(rs.best().subject_id, best_id);
      EXPECT_EQ(rs.size(), 5u);
      for (std::size_t i = 1; i < rs.size(); ++i) EXPECT_LE(rs.results()[i - 1].score, rs.results()[i].score);
      ASSERT_TRUE(rs.second_closest_id().has_value());
    }
  }
}

TEST(ClassifyDistance, EdgeCases) {
  std::map<int, V> one{{7, {1, 2, 3}}};
  EXPECT_EQ(classify_distance(V{9, 9, 9}, one, Metric::diff).best().subject_id, 7);
  EXPECT_FALSE(classify_distance(V{9, 9, 9}, one, Metric::euclidean).second_closest_id());

  std::map<int, V> tie{{4, {1, 0}}, {2, {-1, 0}}, {9, {0, 5}}};
  const auto rs = classify_distance(V{0, 0}, tie, Metric::euclidean);
  EXPECT_EQ(rs.best().subject_id, 2);
  EXPECT_EQ(*rs.second_closest_id(), 4);

  std::map<int, V> exact{{1, {1, 1}}, {2, {3, 3}}};
  const auto hit = classify_distance(V{3, 3}, exact, Metric::chebyshev);
  EXPECT_EQ(hit.best().subject_id, 2);
  EXPECT_EQ(hit.best().score, 0.0);

  EXPECT_THROW(classify_distance(V{1}, {}, Metric::euclidean), std::invalid_argument);
  try {
    classify_distance(V{1, 2}, {{5, {1, 2, 3}}}, Metric::euclidean);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("subject 5"), std::string::npos);
  }
}

TEST(ClassifyDistance, ArgminInvariantUnderRescaling) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::map<int, V> clusters, scaled;
    for (int id = 0; id < 6; ++id) {
      clusters[id] = testsupport::uniform_vector(rng, 10);
      scaled[id] = clusters[id];
      for (double& x : scaled[id]) x *= 2.5;
    }
    auto v = testsupport::uniform_vector(rng, 10);
    auto sv = v;
    for (double& x : sv) x *= 2.5;
    EXPECT_EQ(classify_distance(v, clusters, Metric::euclidean).best().subject_id,
              classify_distance(sv, scaled, Metric::euclidean).best().subject_id);
  }
}

TEST(ResultSet, RankedRejectsDisorder) {
  EXPECT_THROW(ResultSet::ranked({{1, 2.0}, {2, 1.0}}), std::invalid_argument);
  EXPECT_THROW((void)ResultSet{}.best(), std::logic_error);
}

TEST(NeuralNet, OutputSizing) {
  EXPECT_EQ(output_layer_size(2), 1u);
  EXPECT_EQ(output_layer_size(10), 4u);
  EXPECT_EQ(output_layer_size(33), 6u);
  EXPECT_EQ(output_bits_for_max_id(10), 4u);
  EXPECT_EQ(output_bits_for_max_id(0), 1u);
  EXPECT_EQ(encode_subject(5, 4), (V{0, 1, 0, 1}));
  EXPECT_THROW(encode_subject(16, 4), std::invalid_argument);
  EXPECT_THROW(encode_subject(-1, 4), std::invalid_argument);
}

TEST(NeuralNet, ForwardPass) {
  NeuralNet zero = NeuralNet::create({3, 2, 2}, 1);
  for (auto& l : zero.layers) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.thresholds.begin(), l.thresholds.end(), 0.0);
  }
  for (double o : nn_forward(zero, V{1, -2, 3})) EXPECT_EQ(o, 0.5);

  // 2-1 net: w = (1, 2), t = 0.5, c = 2 on input (1, 1): sigmoid(2 * 2.5)
  NeuralNet tiny = NeuralNet::create({2, 1}, 1, 2.0);
  tiny.layers[0].weights = {1.0, 2.0};
  tiny.layers[0].thresholds = {0.5};
  EXPECT_DOUBLE_EQ(nn_forward(tiny, V{1, 1})[0], 1.0 / (1.0 + std::exp(-5.0)));

  // Two layers, worked by hand.
  NeuralNet two = NeuralNet::create({2, 2, 1}, 1);
  two.layers[0].weights = {0.5, -1.0, 1.5, 0.25};
  two.layers[0].thresholds = {0.1, -0.2};
  two.layers[1].weights = {2.0, -3.0};
  two.layers[1].thresholds = {0.3};
  const double h0 = 1 / (1 + std::exp(-(0.5 * 0.2 - 1.0 * 0.4 - 0.1)));
  const double h1 = 1 / (1 + std::exp(-(1.5 * 0.2 + 0.25 * 0.4 + 0.2)));
  EXPECT_DOUBLE_EQ(nn_forward(two, V{0.2, 0.4})[0], 1 / (1 + std::exp(-(2.0 * h0 - 3.0 * h1 - 0.3))));

  NeuralNet steep = NeuralNet::create({1, 1}, 1, 200.0);
  steep.layers[0].weights = {1.0};
  steep.layers[0].thresholds = {0.0};
  EXPECT_GT(nn_forward(steep, V{0.5})[0], 1.0 - 1e-12);

  EXPECT_THROW(nn_forward(two, V{1}), std::invalid_argument);
  EXPECT_THROW(NeuralNet::create({3}, 1), std::invalid_argument);
}

TEST(NeuralNet, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2024);
  const double eps = 1e-5;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    NeuralNet net = NeuralNet::create({4, 3, 2}, seed, 1.0 + 0.1 * static_cast<double>(seed));
    const auto v = testsupport::uniform_vector(rng, 4);
    const auto target = testsupport::uniform_vector(rng, 2, 0.0, 1.0);
    const auto g = nn_gradient(net, v, target);
    auto check = [&](double& param, double analytic) {
      const double keep = param;
      param = keep + eps;
      const double up = nn_sample_error(net, v, target);
      param = keep - eps;
      const double down = nn_sample_error(net, v, target);
      param = keep;
      const double numeric = (up - down) / (2 * eps);
      const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-7});
      EXPECT_LE(std::abs(numeric - analytic) / denom, 1e-4) << "seed " << seed;
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      for (std::size_t k = 0; k < net.layers[l].weights.size(); ++k) check(net.layers[l].weights[k], g.weights[l][k]);
      for (std::size_t k = 0; k < net.layers[l].thresholds.size(); ++k)
        check(net.layers[l].thresholds[k], g.thresholds[l][k]);
    }
  }
}

TEST(NeuralNet, LearnsXor) {
  const std::vector<LabeledVector> xor_set{{{0, 0}, 0}, {{0, 1}, 1}, {{1, 0}, 1}, {{1, 1}, 0}};
  NeuralNet net = NeuralNet::create({2, 2, 1}, 3);
  net.training.alpha = 0.5;
  net.training.epochs = 5000;
  net.training.min_error = 0.01;
  const auto report = nn_train(net, xor_set);
  EXPECT_LE(report.epochs_run, 5000u);
  for (const auto& s : xor_set) EXPECT_EQ(nn_classify(net, s.features).best().subject_id, s.subject_id);
}

TEST(NeuralNet, ZeroLearningRateIsFixedPoint) {
  NeuralNet net = NeuralNet::create({3, 4, 2}, 8);
  const auto before = net.layers;
  net.training.alpha = 0.0;
  net.training.min_error = 0.0;
  net.training.epochs = 5;
  const std::vector<LabeledVector> data{{{0.1, 0.2, 0.3}, 1}, {{0.9, 0.1, 0.4}, 2}};
  EXPECT_EQ(nn_train(net, data).epochs_run, 5u);
  for (std::size_t l = 0; l < before.size(); ++l) {
    EXPECT_EQ(net.layers[l].weights, before[l].weights);
    EXPECT_EQ(net.layers[l].thresholds, before[l].thresholds);
  }
  const std::vector<LabeledVector> too_big{{{0.1, 0.2, 0.3}, 4}};
  EXPECT_THROW(nn_train(net, too_big), std::invalid_argument);
}

TEST(NeuralNet, ClassifyOutputs) {
  EXPECT_EQ(nn_classify(V{0.9, 0.1}).best().subject_id, 2);
  EXPECT_EQ(nn_classify(V{0.0, 0.0, 0.0}).best().subject_id, 0);
  const auto rs = nn_classify(V{0.51, 0.1});
  EXPECT_EQ(rs.best().subject_id, 2);
  EXPECT_EQ(*rs.second_closest_id(), 0);  // the weak first bit flips
  const auto rs2 = nn_classify(V{0.95, 0.49});
  EXPECT_EQ(rs2.best().subject_id, 2);
  EXPECT_EQ(*rs2.second_closest_id(), 3);
  EXPECT_LE(rs2.results()[0].score, rs2.results()[1].score);
}

TEST(ClassifyRandom, DeterministicAndUniform) {
  const std::vector<int> one{42};
  EXPECT_EQ(classify_random(one, 5).best().subject_id, 42);
  EXPECT_FALSE(classify_random(one, 5).second_closest_id());
  EXPECT_THROW(classify_random(std::vector<int>{}, 1), std::invalid_argument);

  const std::vector<int> ids{3, 5, 8, 13};
  EXPECT_EQ(classify_random(ids, 99).best().subject_id, classify_random(ids, 99).best().subject_id);

  const int draws = 10000;
  std::map<int, int> hits;
  for (int s = 0; s < draws; ++s) {
    const auto rs = classify_random(ids, static_cast<std::uint64_t>(s));
    ++hits[rs.best().subject_id];
    ASSERT_NE(rs.best().subject_id, *rs.second_closest_id());
  }
  const double sigma = std::sqrt(0.25 * 0.75 / draws);
  double chi2 = 0.0;
  for (int id : ids) {
    const double f = hits[id] / static_cast<double>(draws);
    EXPECT_NEAR(f, 0.25, 3 * sigma) << "id " << id;
    chi2 += std::pow(hits[id] - draws / 4.0, 2) / (draws / 4.0);
  }
  EXPECT_LT(chi2, 16.27);  // df = 3, p = 0.001
}

TEST(Metric, Names) {
  EXPECT_EQ(to_string(Metric::chebyshev), "cheb");
  EXPECT_EQ(to_string(Metric::mahalanobis), "mah");
  EXPECT_EQ(to_string(Metric::cosine), "cos");
}
