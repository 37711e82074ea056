#pragma once

// Training sets (per-subject mean clusters), the speakers database,
// classification statistics and neural-network persistence.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "patrec/audio_io.hpp"
#include "patrec/binary_io.hpp"
#include "patrec/classify.hpp"
#include "patrec/error.hpp"

namespace patrec {

// ---------------------------------------------------------------------------
// Training sets

struct TrainingKey {
  std::string prep;
  std::string feat;
  std::size_t length = 0;  // 0 until the first vector arrives

  friend bool operator==(const TrainingKey&, const TrainingKey&) = default;
};

struct Cluster {
  std::vector<double> mean;
  std::size_t count = 0;

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct TrainingSet {
  TrainingKey key;
  std::map<int, Cluster> clusters;

  [[nodiscard]] std::map<int, std::vector<double>> means() const {
    std::map<int, std::vector<double>> m;
    for (const auto& [id, c] : clusters) m.emplace(id, c.mean);
    return m;
  }

  friend bool operator==(const TrainingSet&, const TrainingSet&) = default;
};

/// Folds `v` into the subject's running mean: (mean*count + v) / (count + 1).
inline void train_update_in_place(TrainingSet& ts, int subject, std::span<const double> v) {
  if (subject < 0) throw std::invalid_argument("subject ids must be non-negative");
  if (v.empty()) throw std::invalid_argument("empty feature vector");
  if (ts.key.length == 0) ts.key.length = v.size();
  if (v.size() != ts.key.length)
    throw std::invalid_argument("feature length " + std::to_string(v.size()) + " does not match training set length " +
                                std::to_string(ts.key.length));
  auto it = ts.clusters.find(subject);
  if (it == ts.clusters.end()) {
    ts.clusters.emplace(subject, Cluster{{v.begin(), v.end()}, 1});
    return;
  }
  Cluster& c = it->second;
  const auto count = static_cast<double>(c.count);
  for (std::size_t i = 0; i < v.size(); ++i) c.mean[i] = (c.mean[i] * count + v[i]) / (count + 1.0);
  ++c.count;
}

inline TrainingSet train_update(TrainingSet ts, int subject, std::span<const double> v) {
  train_update_in_place(ts, subject, v);
  return ts;
}

enum class DumpFormat { gzip_binary, csv };

inline std::string training_set_filename(std::string_view prep, std::string_view feat, DumpFormat fmt) {
  return "training-set." + std::string(prep) + "." + std::string(feat) + (fmt == DumpFormat::csv ? ".csv" : ".bin");
}

namespace detail {

/// Recovers (prep, feat) from "training-set.<prep>.<feat>.<ext>".
inline std::pair<std::string, std::string> key_from_filename(const std::filesystem::path& path) {
  const std::string stem = path.stem().string();  // training-set.<prep>.<feat>
  constexpr std::string_view prefix = "training-set.";
  if (stem.rfind(prefix, 0) != 0) return {};
  const std::string rest = stem.substr(prefix.size());
  const auto dot = rest.rfind('.');
  if (dot == std::string::npos) return {};
  return {rest.substr(0, dot), rest.substr(dot + 1)};
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace detail

inline void dump_training_set(const TrainingSet& ts, const std::filesystem::path& path, DumpFormat fmt) {
  if (fmt == DumpFormat::gzip_binary) {
    BinaryWriter w("training-set");
    w.str(ts.key.prep);
    w.str(ts.key.feat);
    w.u64(ts.key.length);
    w.u64(ts.clusters.size());
    for (const auto& [id, c] : ts.clusters) {
      w.i64(id);
      w.u64(c.count);
      w.doubles(c.mean);
    }
    write_container(path, w);
    return;
  }
  std::string text = "subject,count";
  for (std::size_t i = 0; i < ts.key.length; ++i) text += ",f" + std::to_string(i);
  text += '\n';
  for (const auto& [id, c] : ts.clusters) {
    text += std::to_string(id) + "," + std::to_string(c.count);
    for (double v : c.mean) text += "," + format_double(v);
    text += '\n';
  }
  detail::write_file_bytes(path, text);
}

inline TrainingSet restore_training_set(const std::filesystem::path& path, DumpFormat fmt) {
  TrainingSet ts;
  if (fmt == DumpFormat::gzip_binary) {
    auto r = read_container(path, "training-set");
    ts.key.prep = r.str();
    ts.key.feat = r.str();
    ts.key.length = static_cast<std::size_t>(r.u64());
    const auto n = r.count(24);
    for (std::size_t i = 0; i < n; ++i) {
      const auto id = static_cast<int>(r.i64());
      Cluster c;
      c.count = static_cast<std::size_t>(r.u64());
      c.mean = r.doubles();
      if (c.count == 0 || c.mean.size() != ts.key.length) throw FormatError("corrupt training set cluster");
      ts.clusters.emplace(id, std::move(c));
    }
    r.expect_end();
    return ts;
  }

  std::ifstream in(path);
  if (!in) throw IoError("cannot open \"" + path.string() + "\"");
  std::tie(ts.key.prep, ts.key.feat) = detail::key_from_filename(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("training set CSV has no header");
  const auto header = detail::split(detail::strip_cr(line), ',');
  if (header.size() < 2 || header[0] != "subject" || header[1] != "count")
    throw FormatError("training set CSV header must start with \"subject,count\"");
  ts.key.length = header.size() - 2;
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() != header.size()) throw FormatError("training set CSV row has the wrong number of fields");
    const auto id = detail::parse_number<int>(fields[0]);
    const auto count = detail::parse_number<std::size_t>(fields[1]);
    if (!id || !count || *count == 0) throw FormatError("bad training set CSV row: \"" + line + "\"");
    Cluster c;
    c.count = *count;
    for (std::size_t i = 2; i < fields.size(); ++i) {
      const auto v = detail::parse_number<double>(fields[i]);
      if (!v) throw FormatError("bad number \"" + fields[i] + "\" in training set CSV");
      c.mean.push_back(*v);
    }
    ts.clusters.emplace(*id, std::move(c));
  }
  return ts;
}

// ---------------------------------------------------------------------------
// Labeled vectors kept for network retraining

inline void dump_labeled_vectors(const std::vector<LabeledVector>& vs, const std::filesystem::path& path) {
  BinaryWriter w("labeled-vectors");
  w.u64(vs.size());
  for (const auto& v : vs) {
    w.i64(v.subject_id);
    w.doubles(v.features);
  }
  write_container(path, w);
}

inline std::vector<LabeledVector> restore_labeled_vectors(const std::filesystem::path& path) {
  auto r = read_container(path, "labeled-vectors");
  std::vector<LabeledVector> vs(r.count(16));
  for (auto& v : vs) {
    v.subject_id = static_cast<int>(r.i64());
    v.features = r.doubles();
  }
  r.expect_end();
  return vs;
}

// ---------------------------------------------------------------------------
// Neural network weights

inline void dump_net(const NeuralNet& net, const std::filesystem::path& path) {
  BinaryWriter w("neural-net");
  w.f64(net.c);
  w.f64(net.training.alpha);
  w.f64(net.training.beta);
  w.u64(net.training.epochs);
  w.f64(net.training.min_error);
  w.u64(net.layers.size());
  for (const auto& l : net.layers) {
    w.u64(l.inputs);
    w.u64(l.outputs);
    w.doubles(l.weights);
    w.doubles(l.thresholds);
  }
  write_container(path, w);
}

inline NeuralNet restore_net(const std::filesystem::path& path) {
  auto r = read_container(path, "neural-net");
  NeuralNet net;
  net.c = r.f64();
  net.training.alpha = r.f64();
  net.training.beta = r.f64();
  net.training.epochs = static_cast<std::size_t>(r.u64());
  net.training.min_error = r.f64();
  net.layers.resize(r.count(32));
  for (auto& l : net.layers) {
    l.inputs = static_cast<std::size_t>(r.u64());
    l.outputs = static_cast<std::size_t>(r.u64());
    l.weights = r.doubles();
    l.thresholds = r.doubles();
    if (l.weights.size() != l.inputs * l.outputs || l.thresholds.size() != l.outputs)
      throw FormatError("corrupt network layer");
  }
  for (std::size_t i = 1; i < net.layers.size(); ++i)
    if (net.layers[i].inputs != net.layers[i - 1].outputs) throw FormatError("corrupt network topology");
  r.expect_end();
  return net;
}

// ---------------------------------------------------------------------------
// Speakers database: "<id>,<name>,<train1|train2|...>,<test1|...>" per line

struct SpeakerEntry {
  std::string name;
  std::vector<std::string> training;
  std::vector<std::string> testing;

  friend bool operator==(const SpeakerEntry&, const SpeakerEntry&) = default;
};

struct SpeakerDb {
  std::map<int, SpeakerEntry> entries;

  /// The entry's name or "Unknown Speaker (<id>)".
  [[nodiscard]] std::string name_of(int id) const {
    const auto it = entries.find(id);
    return it == entries.end() ? "Unknown Speaker (" + std::to_string(id) + ")" : it->second.name;
  }
};

inline SpeakerDb parse_speaker_db_text(std::string_view text) {
  SpeakerDb db;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_cr(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() < 2 || fields.size() > 4)
      throw FormatError("speakers db line " + std::to_string(line_no) + ": expected 2 to 4 comma-separated fields, got " +
                        std::to_string(fields.size()));
    const auto id = detail::parse_number<int>(fields[0]);
    if (!id) throw FormatError("speakers db line " + std::to_string(line_no) + ": non-integer id \"" + fields[0] + "\"");
    auto files = [](const std::string& f) {
      std::vector<std::string> out;
      if (f.empty()) return out;
      for (auto& name : detail::split(f, '|'))
        if (!name.empty()) out.push_back(std::move(name));
      return out;
    };
    SpeakerEntry e{fields[1], fields.size() > 2 ? files(fields[2]) : std::vector<std::string>{},
                   fields.size() > 3 ? files(fields[3]) : std::vector<std::string>{}};
    if (!db.entries.emplace(*id, std::move(e)).second)
      throw FormatError("speakers db line " + std::to_string(line_no) + ": duplicate id " + std::to_string(*id));
  }
  return db;
}

inline SpeakerDb parse_speaker_db(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("error opening speaker DB: \"" + path.string() + "\"");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_speaker_db_text(ss.str());
}

/// Final path component, with either '/' or '\\' as separator.
inline std::string base_filename(std::string_view path) {
  const auto pos = path.find_last_of("/\\");
  return std::string(pos == std::string_view::npos ? path : path.substr(pos + 1));
}

inline std::optional<int> id_by_filename(const SpeakerDb& db, std::string_view path, bool training) {
  const std::string name = base_filename(path);
  for (const auto& [id, e] : db.entries) {
    const auto& files = training ? e.training : e.testing;
    if (std::find(files.begin(), files.end(), name) != files.end()) return id;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Classification statistics

struct GuessCounts {
  long long good = 0;
  long long bad = 0;

  [[nodiscard]] long long total() const noexcept { return good + bad; }
  /// 100 * good / (good + bad); 0 when empty.
  [[nodiscard]] double percent() const noexcept {
    return total() == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(total()) * 100.0;
  }
  friend bool operator==(const GuessCounts&, const GuessCounts&) = default;
};

struct StatsEntry {
  GuessCounts first;
  GuessCounts second;
  friend bool operator==(const StatsEntry&, const StatsEntry&) = default;
};

struct StatsDb {
  std::map<std::string, StatsEntry> per_key;
  friend bool operator==(const StatsDb&, const StatsDb&) = default;
};

inline void add_stats_in_place(StatsDb& db, const std::string& key, bool success, bool second_guess) {
  auto& entry = db.per_key[key];
  auto& counts = second_guess ? entry.second : entry.first;
  (success ? counts.good : counts.bad)++;
}

inline StatsDb add_stats(StatsDb db, const std::string& key, bool success, bool second_guess) {
  add_stats_in_place(db, key, success, second_guess);
  return db;
}

/// Records one identification: the first-guess counter takes `first_correct`,
/// the second-guess counter succeeds when either candidate was right.
inline void record_identification(StatsDb& db, const std::string& key, bool first_correct, bool second_correct) {
  add_stats_in_place(db, key, first_correct, false);
  add_stats_in_place(db, key, first_correct || second_correct, true);
}

/// Two-decimal rendering of a percentage, e.g. 2600/33 -> "78.79".
inline std::string format_percent(double pct) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", pct);
  return buf;
}

inline constexpr std::string_view kNoStatsNotice = "no statistics available. Did you run the recognizer yet?";

/// CSV "guess,run,config,good,bad,%": all first-guess rows, then all
/// second-guess rows, each ordered by descending first-guess percentage.
/// `best_only` yields just the top percentage.
inline std::string print_stats(const StatsDb& db, bool best_only = false) {
  if (db.per_key.empty()) return std::string(kNoStatsNotice) + "\n";
  std::vector<const std::pair<const std::string, StatsEntry>*> rows;
  for (const auto& kv : db.per_key) rows.push_back(&kv);
  std::stable_sort(rows.begin(), rows.end(),
                   [](auto* a, auto* b) { return a->second.first.percent() > b->second.first.percent(); });
  if (best_only) return format_percent(rows.front()->second.first.percent());

  std::string out = "guess,run,config,good,bad,%\n";
  for (int guess = 0; guess < 2; ++guess) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& counts = guess == 0 ? rows[i]->second.first : rows[i]->second.second;
      out += std::string(guess == 0 ? "1st" : "2nd") + "," + std::to_string(i + 1) + "," + rows[i]->first + "," +
             std::to_string(counts.good) + "," + std::to_string(counts.bad) + "," + format_percent(counts.percent()) +
             "\n";
    }
  }
  return out;
}

inline void dump_stats(const StatsDb& db, const std::filesystem::path& path) {
  BinaryWriter w("stats");
  w.u64(db.per_key.size());
  for (const auto& [key, e] : db.per_key) {
    w.str(key);
    w.i64(e.first.good);
    w.i64(e.first.bad);
    w.i64(e.second.good);
    w.i64(e.second.bad);
  }
  write_container(path, w);
}

struct RestoredStats {
  StatsDb db;
  bool existed = true;
};

/// A missing file yields a fresh, empty database with existed == false.
inline RestoredStats restore_stats(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {StatsDb{}, false};
  auto r = read_container(path, "stats");
  StatsDb db;
  const auto n = r.count(40);
  for (std::size_t i = 0; i < n; ++i) {
    auto key = r.str();
    StatsEntry e;
    e.first.good = r.i64();
    e.first.bad = r.i64();
    e.second.good = r.i64();
    e.second.bad = r.i64();
    if (e.first.good < 0 || e.first.bad < 0 || e.second.good < 0 || e.second.bad < 0)
      throw FormatError("corrupt stats file (negative count)");
    db.per_key.emplace(std::move(key), e);
  }
  r.expect_end();
  return {std::move(db), true};
}

}  // namespace patrec
