#pragma once

// speaker-ident: train on and identify speakers from WAV samples.

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "patrec/cli/common.hpp"
#include "patrec/pipeline.hpp"
#include "patrec/storage.hpp"

namespace patrec::cli {

enum class SpeakerMode { train, single_train, ident, batch_ident, stats, best_score, reset, version, help, gui };

enum class StatsScope { per_config, per_speaker, both };

struct SpeakerOptions {
  SpeakerMode mode = SpeakerMode::help;
  std::vector<std::string> flags;      // recognized option tokens, in order
  std::optional<std::string> target;   // file or directory
  std::optional<int> expected_id;
  StatsScope stats_scope = StatsScope::both;
  bool debug = false;
  PipelineConfig config;
};

inline constexpr std::string_view kSpeakerDbFile = "speakers.txt";
inline constexpr std::string_view kConfigStatsFile = "config.speakers.txt.stats";
inline constexpr std::string_view kSpeakerStatsFile = "speaker.speakers.txt.stats";

inline void speaker_ident_usage(std::ostream& os) {
  os << "Usage:\n"
        "  speaker-ident --train <samples-dir> [options]        -- train mode\n"
        "                --single-train <sample> [options]      -- add a single sample to the training set\n"
        "                --ident <sample> [options]             -- identification mode\n"
        "                --batch-ident <samples-dir> [options]  -- batch identification mode\n"
        "                --gui                                  -- graphical interface (not implemented)\n"
        "                --stats=[per-config|per-speaker|both]  -- display stats (default is both)\n"
        "                --best-score                           -- display best classification result\n"
        "                --reset                                -- reset stats\n"
        "                --version                              -- display version info\n"
        "                --help | -h                            -- display this help and exit\n"
        "\n"
        "Options (one or more of the following):\n"
        "\n"
        "Loaders:\n"
        "  -wav          - assume WAVE files loading (default)\n"
        "  -text         - assume loading of text samples\n"
        "\n"
        "Preprocessing:\n"
        "  -silence      - remove silence (can be combined with any of the below)\n"
        "  -noise        - remove noise (not implemented)\n"
        "  -raw          - no preprocessing\n"
        "  -norm         - use just normalization, no filtering (default)\n"
        "  -low          - use low-pass FFT filter\n"
        "  -high         - use high-pass FFT filter\n"
        "  -boost        - use high-frequency-boost FFT preprocessor\n"
        "  -highpassboost - use high-pass filter followed by high-frequency boost\n"
        "  -band         - use band-pass FFT filter\n"
        "  -bandstop     - use band-stop FFT filter\n"
        "  -endp         - use endpointing\n"
        "  -lowcfe       - use low-pass CFE filter (not implemented)\n"
        "  -highcfe      - use high-pass CFE filter (not implemented)\n"
        "  -bandcfe      - use band-pass CFE filter (not implemented)\n"
        "  -bandstopcfe  - use band-stop CFE filter (not implemented)\n"
        "\n"
        "Feature Extraction:\n"
        "  -lpc          - use LPC\n"
        "  -fft          - use FFT (default)\n"
        "  -minmax       - use Min/Max Amplitudes\n"
        "  -randfe       - use random feature extraction\n"
        "  -aggr         - use aggregated FFT+LPC feature extraction\n"
        "  -f0           - use F0 (not implemented)\n"
        "  -segm         - use Segmentation (not implemented)\n"
        "  -cepstral     - use Cepstral analysis (not implemented)\n"
        "\n"
        "Classification:\n"
        "  -nn           - use Neural Network\n"
        "  -cheb         - use Chebyshev (city-block) Distance\n"
        "  -eucl         - use Euclidean Distance (default)\n"
        "  -mink         - use Minkowski Distance\n"
        "  -mah          - use Mahalanobis Distance\n"
        "  -diff         - use Diff-Distance\n"
        "  -zipf         - use Zipf's Law-based classifier (not implemented)\n"
        "  -randcl       - use random classification\n"
        "  -markov       - use Hidden Markov Models (not implemented)\n"
        "  -hamming      - use Hamming Distance\n"
        "  -cos          - use Cosine Similarity Measure\n"
        "\n"
        "Misc:\n"
        "  -debug        - include verbose debug output\n"
        "  -spectrogram  - dump spectrogram image after preprocessing\n"
        "  -graph        - dump wave graph after preprocessing\n"
        "  <integer>     - expected speaker ID\n";
}

namespace detail {

inline const std::map<std::string_view, SpeakerMode>& speaker_modes() {
  static const std::map<std::string_view, SpeakerMode> m{
      {"--train", SpeakerMode::train},        {"--single-train", SpeakerMode::single_train},
      {"--ident", SpeakerMode::ident},        {"--batch-ident", SpeakerMode::batch_ident},
      {"--stats", SpeakerMode::stats},        {"--best-score", SpeakerMode::best_score},
      {"--reset", SpeakerMode::reset},        {"--version", SpeakerMode::version},
      {"--help", SpeakerMode::help},          {"-h", SpeakerMode::help},
      {"--gui", SpeakerMode::gui},
  };
  return m;
}

inline const std::map<std::string_view, PreprocessMethod>& prep_flags() {
  static const std::map<std::string_view, PreprocessMethod> m{
      {"-raw", PreprocessMethod::raw},          {"-norm", PreprocessMethod::normalize},
      {"-low", PreprocessMethod::low_pass},     {"-high", PreprocessMethod::high_pass},
      {"-band", PreprocessMethod::band_pass},   {"-bandstop", PreprocessMethod::band_stop},
      {"-boost", PreprocessMethod::boost},      {"-highpassboost", PreprocessMethod::high_pass_boost},
      {"-endp", PreprocessMethod::endpoint},
  };
  return m;
}

inline const std::map<std::string_view, FeatureMethod>& feature_flags() {
  static const std::map<std::string_view, FeatureMethod> m{
      {"-fft", FeatureMethod::fft},       {"-lpc", FeatureMethod::lpc},     {"-minmax", FeatureMethod::minmax},
      {"-randfe", FeatureMethod::random}, {"-aggr", FeatureMethod::aggregate},
  };
  return m;
}

inline const std::map<std::string_view, Classifier>& classifier_flags() {
  static const std::map<std::string_view, Classifier> m{
      {"-eucl", Classifier::euclidean}, {"-cheb", Classifier::chebyshev},  {"-mink", Classifier::minkowski},
      {"-mah", Classifier::mahalanobis}, {"-diff", Classifier::diff},      {"-hamming", Classifier::hamming},
      {"-cos", Classifier::cosine},      {"-nn", Classifier::neural_net},  {"-randcl", Classifier::random},
  };
  return m;
}

// Accepted so scripts written against the full option list still parse;
// any command that reaches the pipeline with one of these fails.
inline bool is_unimplemented_flag(std::string_view f) {
  static const std::set<std::string_view> s{"-noise", "-lowcfe", "-highcfe", "-bandcfe", "-bandstopcfe", "-f0",
                                            "-segm",  "-cepstral", "-zipf",  "-markov"};
  return s.count(f) != 0;
}

inline std::string_view group_of_unimplemented(std::string_view f) {
  if (f == "-f0" || f == "-segm" || f == "-cepstral") return "feature extraction";
  if (f == "-zipf" || f == "-markov") return "classification";
  return "preprocessing";
}

}  // namespace detail

/// Parses the mode (first token) and options. Unrecognized tokens become
/// the file/directory argument, then the expected speaker id; a third one
/// is an error. At most one method per group may be chosen.
inline SpeakerOptions parse_speaker_options(const std::vector<std::string>& args) {
  if (args.empty()) throw UsageError("No arguments have been specified.");
  SpeakerOptions o;
  std::string mode_tok = args[0];
  if (mode_tok.rfind("--stats=", 0) == 0) {
    const std::string scope = mode_tok.substr(8);
    if (scope == "per-config") o.stats_scope = StatsScope::per_config;
    else if (scope == "per-speaker") o.stats_scope = StatsScope::per_speaker;
    else if (scope == "both") o.stats_scope = StatsScope::both;
    else throw UsageError("unknown stats scope \"" + scope + "\"");
    mode_tok = "--stats";
  }
  const auto mit = detail::speaker_modes().find(mode_tok);
  if (mit == detail::speaker_modes().end()) throw UsageError("Unrecognized option: " + args[0]);
  o.mode = mit->second;

  std::optional<std::string> prep_flag, feat_flag, class_flag, loader_flag;
  auto pick = [](std::optional<std::string>& slot, const std::string& tok, const char* group) {
    if (slot && *slot != tok) throw UsageError(std::string("conflicting ") + group + " options " + *slot + " and " + tok);
    slot = tok;
  };
  std::vector<std::string> unknown;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& tok = args[i];
    if (detail::speaker_modes().count(tok) != 0 || tok.rfind("--stats=", 0) == 0)
      throw UsageError("only one mode may be given (" + args[0] + " and " + tok + ")");
    if (auto it = detail::prep_flags().find(tok); it != detail::prep_flags().end()) {
      pick(prep_flag, tok, "preprocessing");
      o.config.prep.method = it->second;
    } else if (auto ft = detail::feature_flags().find(tok); ft != detail::feature_flags().end()) {
      pick(feat_flag, tok, "feature extraction");
      o.config.feat = ft->second;
    } else if (auto ct = detail::classifier_flags().find(tok); ct != detail::classifier_flags().end()) {
      pick(class_flag, tok, "classification");
      o.config.classifier = ct->second;
    } else if (tok == "-wav" || tok == "-text") {
      pick(loader_flag, tok, "loader");
      o.config.loader = tok == "-wav" ? Loader::wav : Loader::text;
    } else if (tok == "-silence") {
      o.config.prep.remove_silence = true;
    } else if (detail::is_unimplemented_flag(tok)) {
      const auto group = detail::group_of_unimplemented(tok);
      if (group == "feature extraction") pick(feat_flag, tok, "feature extraction");
      else if (group == "classification") pick(class_flag, tok, "classification");
      else if (tok != "-noise") pick(prep_flag, tok, "preprocessing");
      if (!o.config.unimplemented) o.config.unimplemented = tok;
    } else if (tok == "-debug") {
      o.debug = true;
    } else if (tok == "-spectrogram") {
      o.config.dump_spectrogram = true;
    } else if (tok == "-graph") {
      o.config.dump_wave_graph = true;
    } else {
      unknown.push_back(tok);
      continue;
    }
    o.flags.push_back(tok);
  }
  if (unknown.size() > 2) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + u;
    throw UsageError("Unrecognized options found: [" + list + "]");
  }
  if (!unknown.empty()) o.target = unknown[0];
  if (unknown.size() == 2) {
    int id = 0;
    const auto& s = unknown[1];
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
    if (ec != std::errc{} || ptr != s.data() + s.size() || id < 0)
      throw UsageError("expected speaker ID must be a non-negative integer, got \"" + s + "\"");
    o.expected_id = id;
  }
  return o;
}

namespace detail {

inline std::string duration_string(double ms_total) {
  auto ms = static_cast<long long>(ms_total);
  const long long total = ms;
  const long long days = ms / 86'400'000;
  ms %= 86'400'000;
  const long long hours = ms / 3'600'000;
  ms %= 3'600'000;
  const long long minutes = ms / 60'000;
  ms %= 60'000;
  const long long seconds = ms / 1000;
  ms %= 1000;
  return std::to_string(days) + "d:" + std::to_string(hours) + "h:" + std::to_string(minutes) + "m:" +
         std::to_string(seconds) + "s:" + std::to_string(ms) + "ms:" + std::to_string(total) + "ms";
}

inline void print_ident_report(std::ostream& out, const std::string& file, const std::string& config,
                               double elapsed_ms, const ResultSet& result, std::optional<int> expected,
                               const SpeakerDb& db) {
  const int id = result.best().subject_id;
  const int second = result.second_closest_id().value_or(-1);
  out << "                 File: " << file << "\n"
      << "               Config: " << config << "\n"
      << "      Processing time: " << duration_string(elapsed_ms) << "\n"
      << "         Speaker's ID: " << id << "\n"
      << "   Speaker identified: " << db.name_of(id) << "\n";
  if (expected) {
    out << "Expected Speaker's ID: " << *expected << "\n"
        << "     Expected Speaker: " << db.name_of(*expected) << "\n";
  }
  out << "       Second Best ID: " << second << "\n"
      << "     Second Best Name: " << db.name_of(second) << "\n"
      << "            Date/time: " << now_string() << "\n"
      << "----------------------------8<------------------------------\n";
}

inline SpeakerDb load_speaker_db(const Io& io, bool required) {
  const auto path = io.workdir / kSpeakerDbFile;
  if (!std::filesystem::exists(path)) {
    if (required) throw IoError("speakers database \"" + path.string() + "\" not found");
    return {};
  }
  return parse_speaker_db(path);
}

inline StatsDb load_stats(const Io& io, std::string_view file) {
  auto restored = restore_stats(io.workdir / file);
  return std::move(restored.db);
}

}  // namespace detail

inline int speaker_ident_main(const std::vector<std::string>& args, Io io) {
  return run_guarded("speaker-ident", io, [&]() -> int {
    if (args.empty()) {
      io.err << "No arguments have been specified.\n";
      speaker_ident_usage(io.err);
      return kExitUsage;
    }
    SpeakerOptions o = parse_speaker_options(args);
    o.config.workdir = io.workdir;
    if (o.debug) {
      io.err << "Option set: ";
      for (const auto& f : o.flags) io.err << f << " ";
      io.err << (o.target ? "target=" + *o.target : "") << "\n";
    }
    const auto need_target = [&](const char* what) -> std::string {
      if (!o.target) throw UsageError(std::string(what) + " argument is missing");
      return *o.target;
    };

    switch (o.mode) {
      case SpeakerMode::help:
        speaker_ident_usage(io.out);
        return kExitOk;

      case SpeakerMode::version:
        io.out << "Text-Independent Speaker Identification Application, v." << kVersion << "\n";
        return kExitOk;

      case SpeakerMode::gui:
        throw NotImplemented("--gui");

      case SpeakerMode::reset:
        dump_stats(StatsDb{}, io.workdir / kConfigStatsFile);
        dump_stats(StatsDb{}, io.workdir / kSpeakerStatsFile);
        io.out << "speaker-ident: Statistics has been reset.\n";
        return kExitOk;

      case SpeakerMode::stats:
      case SpeakerMode::best_score: {
        const bool best = o.mode == SpeakerMode::best_score;
        if (o.stats_scope != StatsScope::per_speaker) {
          io.out << print_stats(detail::load_stats(io, kConfigStatsFile), best);
          if (best) io.out << "\n";
        }
        if (o.stats_scope != StatsScope::per_config) {
          io.out << print_stats(detail::load_stats(io, kSpeakerStatsFile), best);
          if (best) io.out << "\n";
        }
        return kExitOk;
      }

      case SpeakerMode::train: {
        const std::string dir = need_target("samples directory");
        const auto path = resolve(io, dir);
        if (!std::filesystem::is_directory(path)) {
          io.err << "Folder \"" << dir << "\" not found.\n";
          return kExitRuntime;
        }
        const SpeakerDb db = detail::load_speaker_db(io, true);
        Trainer trainer(o.config);
        for (const auto& file : wav_files(path)) {
          const auto id = id_by_filename(db, file.string(), true);
          if (!id) {
            io.out << "No speaker found for \"" << file.string() << "\" for training.\n";
            continue;
          }
          trainer.add(file, *id);
        }
        trainer.finish();
        io.out << "Done training on folder \"" << dir << "\".\n";
        return kExitOk;
      }

      case SpeakerMode::single_train: {
        const std::string file = need_target("sample file");
        const SpeakerDb db = detail::load_speaker_db(io, true);
        const auto id = id_by_filename(db, file, true);
        if (!id) {
          io.out << "No speaker found for \"" << file << "\" for training.\n";
        } else {
          Trainer trainer(o.config);
          trainer.add(resolve(io, file), *id);
          trainer.finish();
        }
        io.out << "Done training with file \"" << file << "\".\n";
        return kExitOk;
      }

      case SpeakerMode::ident:
      case SpeakerMode::batch_ident: {
        const std::string target = need_target(o.mode == SpeakerMode::ident ? "sample file" : "samples directory");
        const SpeakerDb db = detail::load_speaker_db(io, false);
        const std::string config = config_string(args, o.config);
        StatsDb per_config = detail::load_stats(io, kConfigStatsFile);
        StatsDb per_speaker = detail::load_stats(io, kSpeakerStatsFile);
        auto persist = [&] {
          dump_stats(per_config, io.workdir / kConfigStatsFile);
          dump_stats(per_speaker, io.workdir / kSpeakerStatsFile);
        };

        if (o.mode == SpeakerMode::ident) {
          const auto expected = o.expected_id ? o.expected_id : id_by_filename(db, target, false);
          const auto t0 = std::chrono::steady_clock::now();
          const ResultSet result = recognize(o.config, resolve(io, target));
          const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
          detail::print_ident_report(io.out, target, config, ms, result, expected, db);
          if (expected) {
            const bool first = result.best().subject_id == *expected;
            const auto second = result.second_closest_id();
            record_identification(per_config, config, first, second && *second == *expected);
            record_identification(per_speaker, db.name_of(*expected), first, second && *second == *expected);
            persist();
          }
          return kExitOk;
        }

        BatchOptions bo;
        bo.log = &io.err;
        bo.expected_override = o.expected_id;
        bo.on_item = [&](const BatchItem& item) {
          if (!item.result) return;
          detail::print_ident_report(io.out, item.file.string(), config, item.elapsed_ms, *item.result, item.expected,
                                     db);
          if (item.expected) persist();
        };
        const auto summary = batch_recognize(o.config, resolve(io, target), db, config, per_config, per_speaker, bo);
        if (o.debug)
          io.err << "processed " << summary.processed << ", failed " << summary.failed << ", first-guess correct "
                 << summary.first_correct << "/" << summary.with_expected << "\n";
        return summary.failed == 0 ? kExitOk : kExitRuntime;
      }
    }
    return kExitUsage;
  }, speaker_ident_usage);
}

}  // namespace patrec::cli
