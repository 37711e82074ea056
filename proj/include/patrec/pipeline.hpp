#pragma once

// load -> preprocess -> extract -> classify, for training and recognition
// under a single configuration.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "patrec/audio_io.hpp"
#include "patrec/classify.hpp"
#include "patrec/emit.hpp"
#include "patrec/error.hpp"
#include "patrec/features.hpp"
#include "patrec/preprocess.hpp"
#include "patrec/storage.hpp"

namespace patrec {

enum class Loader { wav, text, sine };

enum class Classifier { chebyshev, euclidean, minkowski, mahalanobis, diff, hamming, cosine, neural_net, random };

inline std::string_view to_string(Classifier c) {
  switch (c) {
    case Classifier::chebyshev: return "cheb";
    case Classifier::euclidean: return "eucl";
    case Classifier::minkowski: return "mink";
    case Classifier::mahalanobis: return "mah";
    case Classifier::diff: return "diff";
    case Classifier::hamming: return "hamming";
    case Classifier::cosine: return "cos";
    case Classifier::neural_net: return "nn";
    case Classifier::random: return "randcl";
  }
  return "unknown";
}

inline std::optional<Metric> metric_of(Classifier c) {
  switch (c) {
    case Classifier::chebyshev: return Metric::chebyshev;
    case Classifier::euclidean: return Metric::euclidean;
    case Classifier::minkowski: return Metric::minkowski;
    case Classifier::mahalanobis: return Metric::mahalanobis;
    case Classifier::diff: return Metric::diff;
    case Classifier::hamming: return Metric::hamming;
    case Classifier::cosine: return Metric::cosine;
    case Classifier::neural_net:
    case Classifier::random: return std::nullopt;
  }
  return std::nullopt;
}

inline std::string_view to_string(Loader l) {
  switch (l) {
    case Loader::wav: return "wav";
    case Loader::text: return "text";
    case Loader::sine: return "sine";
  }
  return "unknown";
}

struct PipelineConfig {
  Loader loader = Loader::wav;
  PreprocessConfig prep;
  FeatureMethod feat = FeatureMethod::fft;
  FeatureConfig feat_cfg;
  Classifier classifier = Classifier::euclidean;
  MetricParams metric;
  std::size_t nn_hidden = 32;
  TrainingParams nn_training;
  double sine_frequency = 1000.0;  // sine loader ignores the file and synthesizes 1 s
  bool dump_spectrogram = false;
  bool dump_wave_graph = false;
  std::uint64_t seed = 0;
  std::filesystem::path workdir = ".";
  // A selected option that has no algorithm (e.g. "-f0"); rejected on use.
  std::optional<std::string> unimplemented;

  void validate() const {
    if (unimplemented) throw NotImplemented(*unimplemented);
    prep.validate();
    feat_cfg.validate();
    if (nn_hidden == 0) throw std::invalid_argument("hidden layer must have at least one neuron");
  }
};

/// An error tagged with the pipeline stage that raised it.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

namespace detail {

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const NotImplemented&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}

inline std::string prep_key(const PreprocessConfig& p) {
  std::string key(to_string(p.method));
  if (p.remove_silence) key += "+silence";
  return key;
}

inline std::string feat_key(const PipelineConfig& cfg) { return std::string(to_string(cfg.feat)); }

}  // namespace detail

inline std::filesystem::path training_set_path(const PipelineConfig& cfg) {
  return cfg.workdir / training_set_filename(detail::prep_key(cfg.prep), detail::feat_key(cfg), DumpFormat::gzip_binary);
}

inline std::filesystem::path nn_vectors_path(const PipelineConfig& cfg) {
  return cfg.workdir / ("nn-vectors." + detail::prep_key(cfg.prep) + "." + detail::feat_key(cfg) + ".bin");
}

inline std::filesystem::path nn_weights_path(const PipelineConfig& cfg) {
  return cfg.workdir / ("nn-weights." + detail::prep_key(cfg.prep) + "." + detail::feat_key(cfg) + ".h" +
                        std::to_string(cfg.nn_hidden) + ".bin");
}

inline Sample load_sample(const PipelineConfig& cfg, const std::filesystem::path& path) {
  return detail::in_stage("load", [&] {
    switch (cfg.loader) {
      case Loader::wav: return load_wav(path);
      case Loader::text: return load_text(path);
      case Loader::sine: return generate_sine(cfg.sine_frequency, 1.0);
    }
    throw std::invalid_argument("unknown loader");
  });
}

/// Loads, preprocesses and extracts; writes the optional dumps next to the
/// working directory as "<file>.ppm" / "<file>.tsv".
inline std::vector<double> feature_vector(const PipelineConfig& cfg, const std::filesystem::path& path) {
  cfg.validate();
  const Sample raw = load_sample(cfg, path);
  const Sample clean = detail::in_stage("preprocess", [&] { return preprocess(cfg.prep, raw); });
  if (cfg.dump_spectrogram)
    detail::in_stage("dump", [&] { emit_spectrogram(clean, cfg.workdir / (path.filename().string() + ".ppm")); });
  if (cfg.dump_wave_graph)
    detail::in_stage("dump", [&] { emit_wave_graph(clean, cfg.workdir / (path.filename().string() + ".tsv")); });
  return detail::in_stage("extract", [&] {
    FeatureConfig fc = cfg.feat_cfg;
    fc.seed = cfg.seed;
    return extract(cfg.feat, clean, fc).values;
  });
}

/// Accumulates samples for one configuration; finish() persists them. The
/// distance and random classifiers update per-subject mean clusters. The
/// network keeps every vector and retrains from scratch over all of them.
class Trainer {
 public:
  explicit Trainer(PipelineConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.classifier == Classifier::neural_net) {
      if (std::filesystem::exists(nn_vectors_path(cfg_)))
        vectors_ = detail::in_stage("train", [&] { return restore_labeled_vectors(nn_vectors_path(cfg_)); });
    } else if (std::filesystem::exists(training_set_path(cfg_))) {
      set_ = detail::in_stage("train", [&] { return restore_training_set(training_set_path(cfg_), DumpFormat::gzip_binary); });
    } else {
      set_.key.prep = detail::prep_key(cfg_.prep);
      set_.key.feat = detail::feat_key(cfg_);
    }
  }

  void add(const std::filesystem::path& path, int subject) {
    if (subject < 0) throw std::invalid_argument("subject ids must be non-negative");
    add_vector(feature_vector(cfg_, path), subject);
  }

  void add_vector(std::vector<double> v, int subject) {
    detail::in_stage("train", [&] {
      if (cfg_.classifier == Classifier::neural_net) {
        if (!vectors_.empty() && vectors_.front().features.size() != v.size())
          throw std::invalid_argument("feature length " + std::to_string(v.size()) + " differs from stored length " +
                                      std::to_string(vectors_.front().features.size()));
        vectors_.push_back({std::move(v), subject});
      } else {
        train_update_in_place(set_, subject, v);
      }
    });
    ++added_;
  }

  [[nodiscard]] std::size_t added() const noexcept { return added_; }
  [[nodiscard]] const TrainingSet& training_set() const noexcept { return set_; }

  /// Persists the session. Returns the network training report when one ran.
  std::optional<TrainingReport> finish() {
    return detail::in_stage("train", [&]() -> std::optional<TrainingReport> {
      if (cfg_.classifier != Classifier::neural_net) {
        dump_training_set(set_, training_set_path(cfg_), DumpFormat::gzip_binary);
        return std::nullopt;
      }
      if (vectors_.empty()) return std::nullopt;
      dump_labeled_vectors(vectors_, nn_vectors_path(cfg_));
      int max_id = 0;
      for (const auto& lv : vectors_) max_id = std::max(max_id, lv.subject_id);
      auto net = NeuralNet::create({vectors_.front().features.size(), cfg_.nn_hidden, output_bits_for_max_id(max_id)},
                                   cfg_.seed);
      net.training = cfg_.nn_training;
      const auto report = nn_train(net, vectors_);
      dump_net(net, nn_weights_path(cfg_));
      return report;
    });
  }

 private:
  PipelineConfig cfg_;
  TrainingSet set_;
  std::vector<LabeledVector> vectors_;
  std::size_t added_ = 0;
};

inline void train(const PipelineConfig& cfg, const std::filesystem::path& sample_path, int subject) {
  Trainer t(cfg);
  t.add(sample_path, subject);
  t.finish();
}

inline ResultSet classify_vector(const PipelineConfig& cfg, std::span<const double> v) {
  return detail::in_stage("classify", [&] {
    if (cfg.classifier == Classifier::neural_net) {
      if (!std::filesystem::exists(nn_weights_path(cfg)))
        throw Error("no trained network at \"" + nn_weights_path(cfg).string() + "\"; train first");
      const auto net = restore_net(nn_weights_path(cfg));
      if (net.input_size() != v.size())
        throw std::invalid_argument("feature length " + std::to_string(v.size()) + " does not match network input " +
                                    std::to_string(net.input_size()));
      return nn_classify(net, v);
    }
    if (!std::filesystem::exists(training_set_path(cfg)))
      throw Error("no training set at \"" + training_set_path(cfg).string() + "\"; train first");
    const auto ts = restore_training_set(training_set_path(cfg), DumpFormat::gzip_binary);
    if (ts.clusters.empty()) throw Error("training set is empty");
    if (ts.key.length != v.size())
      throw std::invalid_argument("feature length " + std::to_string(v.size()) + " does not match training set length " +
                                  std::to_string(ts.key.length));
    if (cfg.classifier == Classifier::random) {
      std::vector<int> ids;
      for (const auto& [id, c] : ts.clusters) ids.push_back(id);
      return classify_random(ids, cfg.seed);
    }
    return classify_distance(v, ts.means(), *metric_of(cfg.classifier), cfg.metric);
  });
}

inline ResultSet recognize(const PipelineConfig& cfg, const std::filesystem::path& sample_path) {
  return classify_vector(cfg, feature_vector(cfg, sample_path));
}

/// Canonical option string for a configuration, e.g. "-norm -fft -eucl ".
inline std::string canonical_config_string(const PipelineConfig& cfg) {
  std::string s;
  if (cfg.loader == Loader::text) s += "-text ";
  s += "-" + std::string(to_string(cfg.prep.method)) + " ";
  if (cfg.prep.remove_silence) s += "-silence ";
  s += "-" + std::string(to_string(cfg.feat)) + " ";
  s += "-" + std::string(to_string(cfg.classifier)) + " ";
  return s;
}

/// Tokens after the mode and its argument, each followed by a space. With no
/// such tokens the configuration's canonical string is used.
inline std::string config_string(const std::vector<std::string>& args, const PipelineConfig& cfg) {
  if (args.size() <= 2) return canonical_config_string(cfg);
  std::string s;
  for (std::size_t i = 2; i < args.size(); ++i) s += args[i] + " ";
  return s;
}

inline bool has_wav_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

/// Regular files with a ".wav" extension (any case), sorted by path.
inline std::vector<std::filesystem::path> wav_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("\"" + dir.string() + "\" is not a readable directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && has_wav_extension(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

struct BatchItem {
  std::filesystem::path file;
  std::optional<ResultSet> result;  // empty when the file failed
  std::optional<int> expected;
  std::string error;
  double elapsed_ms = 0.0;
};

struct BatchSummary {
  std::size_t processed = 0;
  std::size_t failed = 0;
  std::size_t with_expected = 0;
  std::size_t first_correct = 0;
  std::size_t second_correct = 0;
};

struct BatchOptions {
  std::ostream* log = nullptr;                          // per-file errors
  std::function<void(const BatchItem&)> on_item;        // after each file, once stats are recorded
  std::optional<int> expected_override;                 // replaces the testing-list lookup
};

/// Recognizes every ".wav" file in `dir`. Files with a known expected id
/// (from the testing lists) update both statistics databases: per-config
/// under `config_key`, per-speaker under the speaker's name. Per-file errors
/// are logged and the batch continues.
inline BatchSummary batch_recognize(const PipelineConfig& cfg, const std::filesystem::path& dir, const SpeakerDb& db,
                                    const std::string& config_key, StatsDb& per_config, StatsDb& per_speaker,
                                    const BatchOptions& opts = {}) {
  BatchSummary summary;
  std::ostream* log = opts.log;
  const auto& on_item = opts.on_item;
  for (const auto& file : wav_files(dir)) {
    BatchItem item;
    item.file = file;
    item.expected = opts.expected_override ? opts.expected_override : id_by_filename(db, file.string(), false);
    try {
      const auto t0 = std::chrono::steady_clock::now();
      item.result = recognize(cfg, file);
      item.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    } catch (const std::exception& e) {
      item.error = e.what();
      ++summary.failed;
      if (log != nullptr) *log << "error: " << file.string() << ": " << e.what() << "\n";
      if (on_item) on_item(item);
      continue;
    }
    ++summary.processed;
    if (item.expected) {
      const bool first = item.result->best().subject_id == *item.expected;
      const auto second_id = item.result->second_closest_id();
      const bool second = second_id && *second_id == *item.expected;
      record_identification(per_config, config_key, first, second);
      record_identification(per_speaker, db.name_of(*item.expected), first, second);
      ++summary.with_expected;
      if (first) ++summary.first_correct;
      if (first || second) ++summary.second_correct;
    }
    if (on_item) on_item(item);
  }
  return summary;
}

}  // namespace patrec
