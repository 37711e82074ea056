#pragma once

// Distance classifiers over per-subject mean vectors, a feed-forward neural
// network with back-propagation, and a random baseline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "patrec/error.hpp"

namespace patrec {

namespace detail {

inline void require_same_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("vector length mismatch: " + std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Distances

/// Sum of |x_k - y_k|. Named after the CLI's -cheb option; the quantity is the
/// city-block (L1) distance, not the L-infinity one.
inline double chebyshev_distance(std::span<const double> x, std::span<const double> y) {
  detail::require_same_length(x, y);
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) d += std::abs(x[k] - y[k]);
  return d;
}

inline double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  detail::require_same_length(x, y);
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = x[k] - y[k];
    d += diff * diff;
  }
  return std::sqrt(d);
}

inline constexpr double kDefaultMinkowskiFactor = 6.0;

inline double minkowski_distance(std::span<const double> x, std::span<const double> y,
                                 double r = kDefaultMinkowskiFactor) {
  detail::require_same_length(x, y);
  if (!(r >= 1.0)) throw std::invalid_argument("minkowski factor must be >= 1");
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) d += std::pow(std::abs(x[k] - y[k]), r);
  return std::pow(d, 1.0 / r);
}

/// Dense row-major square matrix used for covariances.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> data;

  static Matrix identity(std::size_t n) {
    Matrix m{n, std::vector<double>(n * n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  double& operator()(std::size_t r, std::size_t c) { return data[r * n + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * n + c]; }
};

/// sqrt(d^T C^-1 d) with d = x - y, via a Cholesky factorization of C.
inline double mahalanobis_distance(std::span<const double> x, std::span<const double> y, const Matrix& cov) {
  detail::require_same_length(x, y);
  const std::size_t n = x.size();
  if (cov.n != n || cov.data.size() != n * n) throw std::invalid_argument("covariance size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (cov(i, j) != cov(j, i)) throw std::invalid_argument("covariance matrix is not symmetric");

  // C = L L^T, lower triangle stored in l.
  Matrix l{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t j = 0; j < n; ++j) {
    double diag = cov(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) throw std::invalid_argument("covariance matrix is singular or not positive-definite");
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = cov(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  // d^T C^-1 d = |L^-1 d|^2
  std::vector<double> z(n);
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i] - y[i];
    for (std::size_t k = 0; k < i; ++k) v -= l(i, k) * z[k];
    z[i] = v / l(i, i);
    q += z[i] * z[i];
  }
  return std::sqrt(q);
}

inline double mahalanobis_distance(std::span<const double> x, std::span<const double> y) {
  return mahalanobis_distance(x, y, Matrix::identity(x.size()));
}

inline constexpr double kDefaultDiffError = 0.0001;
inline constexpr double kDefaultDiffPenalty = 1.0;

/// Per element: |x_i - y_i| + p when the difference exceeds e, else a bonus
/// of -e. Can be negative.
inline double diff_distance(std::span<const double> x, std::span<const double> y, double e = kDefaultDiffError,
                            double p = kDefaultDiffPenalty) {
  detail::require_same_length(x, y);
  if (!(e > 0.0)) throw std::invalid_argument("diff distance error threshold must be positive");
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = std::abs(x[i] - y[i]);
    d += diff > e ? diff + p : -e;
  }
  return d;
}

/// Number of positions whose doubles differ exactly.
inline double hamming_distance(std::span<const double> x, std::span<const double> y) {
  detail::require_same_length(x, y);
  std::size_t d = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) ++d;
  return static_cast<double>(d);
}

inline double cosine_similarity(std::span<const double> x, std::span<const double> y) {
  detail::require_same_length(x, y);
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0.0 || ny == 0.0) throw std::invalid_argument("cosine similarity of a zero vector");
  return dot / (std::sqrt(nx) * std::sqrt(ny));
}

// ---------------------------------------------------------------------------
// Results

struct Result {
  int subject_id = 0;
  double score = 0.0;
};

/// Results sorted ascending by score (smaller is closer).
class ResultSet {
 public:
  ResultSet() = default;

  /// Sorts ascending by score, ties by smaller subject id.
  explicit ResultSet(std::vector<Result> results) : results_(std::move(results)) {
    std::stable_sort(results_.begin(), results_.end(), [](const Result& a, const Result& b) {
      if (a.score != b.score) return a.score < b.score;
      return a.subject_id < b.subject_id;
    });
  }

  /// Takes results already in rank order (non-decreasing scores).
  static ResultSet ranked(std::vector<Result> results) {
    for (std::size_t i = 1; i < results.size(); ++i)
      if (results[i].score < results[i - 1].score) throw std::invalid_argument("results are not in rank order");
    ResultSet set;
    set.results_ = std::move(results);
    return set;
  }

  [[nodiscard]] const std::vector<Result>& results() const noexcept { return results_; }
  [[nodiscard]] bool empty() const noexcept { return results_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return results_.size(); }

  [[nodiscard]] const Result& best() const {
    if (results_.empty()) throw std::logic_error("empty result set");
    return results_.front();
  }
  [[nodiscard]] std::optional<int> second_closest_id() const {
    if (results_.size() < 2) return std::nullopt;
    return results_[1].subject_id;
  }

 private:
  std::vector<Result> results_;
};

// ---------------------------------------------------------------------------
// Distance classification

enum class Metric { chebyshev, euclidean, minkowski, mahalanobis, diff, hamming, cosine };

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::chebyshev: return "cheb";
    case Metric::euclidean: return "eucl";
    case Metric::minkowski: return "mink";
    case Metric::mahalanobis: return "mah";
    case Metric::diff: return "diff";
    case Metric::hamming: return "hamming";
    case Metric::cosine: return "cos";
  }
  return "unknown";
}

struct MetricParams {
  double minkowski_r = kDefaultMinkowskiFactor;
  double diff_error = kDefaultDiffError;
  double diff_penalty = kDefaultDiffPenalty;
  std::optional<Matrix> covariance;  // identity when absent
};

/// Score used for ranking; cosine ranks by 1 - similarity.
inline double metric_score(Metric m, std::span<const double> x, std::span<const double> y,
                           const MetricParams& params = {}) {
  switch (m) {
    case Metric::chebyshev: return chebyshev_distance(x, y);
    case Metric::euclidean: return euclidean_distance(x, y);
    case Metric::minkowski: return minkowski_distance(x, y, params.minkowski_r);
    case Metric::mahalanobis:
      return params.covariance ? mahalanobis_distance(x, y, *params.covariance) : mahalanobis_distance(x, y);
    case Metric::diff: return diff_distance(x, y, params.diff_error, params.diff_penalty);
    case Metric::hamming: return hamming_distance(x, y);
    case Metric::cosine: return 1.0 - cosine_similarity(x, y);
  }
  throw std::invalid_argument("unknown metric");
}

inline ResultSet classify_distance(std::span<const double> v, const std::map<int, std::vector<double>>& clusters,
                                   Metric metric, const MetricParams& params = {}) {
  if (clusters.empty()) throw std::invalid_argument("no clusters to classify against");
  std::vector<Result> results;
  results.reserve(clusters.size());
  for (const auto& [id, mean] : clusters) {
    if (mean.size() != v.size())
      throw std::invalid_argument("cluster of subject " + std::to_string(id) + " has length " +
                                  std::to_string(mean.size()) + ", feature vector has " + std::to_string(v.size()));
    results.push_back({id, metric_score(metric, v, mean, params)});
  }
  return ResultSet(std::move(results));
}

// ---------------------------------------------------------------------------
// Neural network

/// Bits needed to label n distinct codes: ceil(log2 n), at least 1.
inline std::size_t output_layer_size(std::size_t n_codes) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n_codes) ++bits;
  return std::max<std::size_t>(bits, 1);
}

/// Output bits required to encode subject ids 0..max_id.
inline std::size_t output_bits_for_max_id(int max_id) {
  if (max_id < 0) throw std::invalid_argument("subject ids must be non-negative");
  return output_layer_size(static_cast<std::size_t>(max_id) + 1);
}

/// Most significant bit first.
inline std::vector<double> encode_subject(int id, std::size_t bits) {
  if (id < 0 || (bits < 63 && static_cast<std::uint64_t>(id) >= (std::uint64_t{1} << bits)))
    throw std::invalid_argument("subject id " + std::to_string(id) + " does not fit in " + std::to_string(bits) +
                                " output bits");
  std::vector<double> t(bits);
  for (std::size_t b = 0; b < bits; ++b) t[b] = ((static_cast<std::uint64_t>(id) >> (bits - 1 - b)) & 1u) ? 1.0 : 0.0;
  return t;
}

struct NeuralLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;     // outputs x inputs, row-major
  std::vector<double> thresholds;  // one per neuron

  double& w(std::size_t i, std::size_t j) { return weights[i * inputs + j]; }
  double w(std::size_t i, std::size_t j) const { return weights[i * inputs + j]; }
};

struct TrainingParams {
  double alpha = 0.5;   // learning rate
  double beta = 1.0;    // weight retention
  std::size_t epochs = 20;
  double min_error = 0.1;
};

struct NeuralNet {
  std::vector<NeuralLayer> layers;
  double c = 1.0;  // sigmoid steepness
  TrainingParams training;

  [[nodiscard]] std::size_t input_size() const { return layers.empty() ? 0 : layers.front().inputs; }
  [[nodiscard]] std::size_t output_size() const { return layers.empty() ? 0 : layers.back().outputs; }

  /// Layer sizes input..output; weights and thresholds uniform in [-0.5, 0.5].
  static NeuralNet create(const std::vector<std::size_t>& sizes, std::uint64_t seed, double c = 1.0) {
    if (sizes.size() < 2) throw std::invalid_argument("a network needs at least an input and an output layer");
    for (auto s : sizes)
      if (s == 0) throw std::invalid_argument("layer sizes must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    NeuralNet net;
    net.c = c;
    for (std::size_t l = 1; l < sizes.size(); ++l) {
      NeuralLayer layer{sizes[l - 1], sizes[l], std::vector<double>(sizes[l] * sizes[l - 1]),
                        std::vector<double>(sizes[l])};
      for (double& w : layer.weights) w = uni(rng);
      for (double& t : layer.thresholds) t = uni(rng);
      net.layers.push_back(std::move(layer));
    }
    return net;
  }
};

inline double sigmoid(double x, double c) { return 1.0 / (1.0 + std::exp(-c * x)); }

namespace detail {

/// Activations of every layer, input included.
inline std::vector<std::vector<double>> nn_activations(const NeuralNet& net, std::span<const double> v) {
  if (v.size() != net.input_size())
    throw std::invalid_argument("network expects " + std::to_string(net.input_size()) + " inputs, got " +
                                std::to_string(v.size()));
  std::vector<std::vector<double>> acts;
  acts.reserve(net.layers.size() + 1);
  acts.emplace_back(v.begin(), v.end());
  for (const auto& layer : net.layers) {
    const auto& in = acts.back();
    std::vector<double> out(layer.outputs);
    for (std::size_t i = 0; i < layer.outputs; ++i) {
      double sum = -layer.thresholds[i];
      for (std::size_t j = 0; j < layer.inputs; ++j) sum += layer.w(i, j) * in[j];
      out[i] = sigmoid(sum, net.c);
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

}  // namespace detail

/// out = sigmoid(sum w a - t; c), layer by layer.
inline std::vector<double> nn_forward(const NeuralNet& net, std::span<const double> v) {
  return std::move(detail::nn_activations(net, v).back());
}

/// Per-layer back-propagated deltas for E = 1/2 sum (target - out)^2.
/// dE/dw_ij = -delta_i a_j and dE/dt_i = delta_i.
struct NetDeltas {
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> deltas;  // one vector per layer
};

inline NetDeltas nn_deltas(const NeuralNet& net, std::span<const double> v, std::span<const double> target) {
  if (target.size() != net.output_size()) throw std::invalid_argument("target size differs from the output layer");
  NetDeltas d;
  d.activations = detail::nn_activations(net, v);
  d.deltas.resize(net.layers.size());
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& out = d.activations[l + 1];
    auto& delta = d.deltas[l];
    delta.assign(out.size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double fprime = net.c * out[i] * (1.0 - out[i]);
      double err = 0.0;
      if (l + 1 == net.layers.size()) {
        err = target[i] - out[i];
      } else {
        const auto& next = net.layers[l + 1];
        for (std::size_t k = 0; k < next.outputs; ++k) err += next.w(k, i) * d.deltas[l + 1][k];
      }
      delta[i] = err * fprime;
    }
  }
  return d;
}

/// Gradient of 1/2 sum (target - out)^2, laid out like the network.
struct NetGradient {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> thresholds;
};

inline NetGradient nn_gradient(const NeuralNet& net, std::span<const double> v, std::span<const double> target) {
  const auto d = nn_deltas(net, v, target);
  NetGradient g;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    std::vector<double> gw(layer.weights.size());
    for (std::size_t i = 0; i < layer.outputs; ++i)
      for (std::size_t j = 0; j < layer.inputs; ++j) gw[i * layer.inputs + j] = -d.deltas[l][i] * d.activations[l][j];
    g.weights.push_back(std::move(gw));
    g.thresholds.push_back(d.deltas[l]);
  }
  return g;
}

inline double nn_sample_error(const NeuralNet& net, std::span<const double> v, std::span<const double> target) {
  const auto out = nn_forward(net, v);
  double e = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) e += 0.5 * (target[i] - out[i]) * (target[i] - out[i]);
  return e;
}

struct LabeledVector {
  std::vector<double> features;
  int subject_id = 0;
};

struct TrainingReport {
  std::size_t epochs_run = 0;
  double final_error = 0.0;
};

/// Epoch back-propagation. Within an epoch every sample is evaluated with the
/// committed weights; updates w <- beta*w + alpha*a_j*delta_i go to a shadow
/// copy that is committed when the epoch ends. Stops after `epochs` or when
/// the mean sample error drops below `min_error`.
inline TrainingReport nn_train(NeuralNet& net, std::span<const LabeledVector> samples) {
  const auto bits = net.output_size();
  std::vector<std::vector<double>> targets;
  targets.reserve(samples.size());
  for (const auto& s : samples) targets.push_back(encode_subject(s.subject_id, bits));

  const auto& tp = net.training;
  TrainingReport report;
  auto mean_error = [&] {
    if (samples.empty()) return 0.0;
    double e = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) e += nn_sample_error(net, samples[s].features, targets[s]);
    return e / static_cast<double>(samples.size());
  };

  report.final_error = mean_error();
  for (std::size_t epoch = 0; epoch < tp.epochs && !samples.empty(); ++epoch) {
    if (report.final_error < tp.min_error) break;
    auto shadow = net.layers;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const auto d = nn_deltas(net, samples[s].features, targets[s]);
      for (std::size_t l = 0; l < shadow.size(); ++l) {
        auto& layer = shadow[l];
        for (std::size_t i = 0; i < layer.outputs; ++i) {
          for (std::size_t j = 0; j < layer.inputs; ++j)
            layer.w(i, j) = tp.beta * layer.w(i, j) + tp.alpha * d.activations[l][j] * d.deltas[l][i];
          // The threshold is a weight on a constant -1 input.
          layer.thresholds[i] = tp.beta * layer.thresholds[i] - tp.alpha * d.deltas[l][i];
        }
      }
    }
    net.layers = std::move(shadow);
    ++report.epochs_run;
    report.final_error = mean_error();
  }
  return report;
}

/// Thresholds each output at 0.5 into an id (MSB first). The runner-up flips
/// the least confident bit. Scores are Euclidean distances between the
/// outputs and each ideal bit pattern.
inline ResultSet nn_classify(std::span<const double> outputs) {
  if (outputs.empty()) throw std::invalid_argument("network produced no outputs");
  if (outputs.size() > 31) throw std::invalid_argument("too many output bits");
  int id = 0;
  std::size_t weakest = 0;
  for (std::size_t b = 0; b < outputs.size(); ++b) {
    id = (id << 1) | (outputs[b] >= 0.5 ? 1 : 0);
    if (std::abs(outputs[b] - 0.5) < std::abs(outputs[weakest] - 0.5)) weakest = b;
  }
  const int runner_up = id ^ (1 << (outputs.size() - 1 - weakest));
  auto score = [&](int code) {
    const auto pattern = encode_subject(code, outputs.size());
    double d = 0.0;
    for (std::size_t b = 0; b < outputs.size(); ++b) d += (outputs[b] - pattern[b]) * (outputs[b] - pattern[b]);
    return std::sqrt(d);
  };
  // The flipped pattern is never strictly closer, so this is already ranked.
  return ResultSet::ranked({{id, score(id)}, {runner_up, score(runner_up)}});
}

inline ResultSet nn_classify(const NeuralNet& net, std::span<const double> v) {
  return nn_classify(nn_forward(net, v));
}

// ---------------------------------------------------------------------------
// Random classification

/// Uniform pick among `ids`; the runner-up is a second uniform pick among the
/// remaining ids.
inline ResultSet classify_random(std::span<const int> ids, std::uint64_t seed) {
  if (ids.empty()) throw std::invalid_argument("no subject ids to pick from");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> first_pick(0, ids.size() - 1);
  const std::size_t first = first_pick(rng);
  std::vector<Result> rs{{ids[first], 0.0}};
  if (ids.size() > 1) {
    std::uniform_int_distribution<std::size_t> second_pick(0, ids.size() - 2);
    std::size_t second = second_pick(rng);
    if (second >= first) ++second;
    rs.push_back({ids[second], 1.0});
  }
  return ResultSet(std::move(rs));
}

}  // namespace patrec
