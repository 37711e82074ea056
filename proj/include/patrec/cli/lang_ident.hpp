#pragma once

// lang-ident: train character n-gram models per language and identify the
// language of text.

#include <optional>
#include <string>
#include <vector>

#include "patrec/cli/common.hpp"
#include "patrec/nlp_lm.hpp"

namespace patrec::cli {

inline void lang_ident_usage(std::ostream& os) {
  os << "Usage:\n"
        "    lang-ident --help | -h\n"
        "    lang-ident --version\n"
        "    lang-ident --train [ --debug ] [ OPTIONS ] <language> <corpus-file>\n"
        "    lang-ident --ident [ --debug ] [ OPTIONS ] foo <bar|corpus-file>\n"
        "\n"
        "Options (one or more of the following):\n"
        "    -interactive   interactive mode for classification instead of reading from a file\n"
        "    -char          use characters as n-grams (always the case)\n"
        "    -restricted    fold to lowercase ASCII letters and digits before counting\n"
        "\n"
        "    -unigram       use UNIGRAM model\n"
        "    -bigram        use BIGRAM model\n"
        "    -trigram       use TRIGRAM model\n"
        "\n"
        "    -mle           use MLE\n"
        "    -add-one       use Add-One smoothing\n"
        "    -add-delta     use Add-Delta (ELE, d=0.5) smoothing\n"
        "    -witten-bell   use Witten-Bell smoothing\n"
        "    -good-turing   use Good-Turing smoothing\n";
}

struct LangOptions {
  enum class Mode { train, ident, help, version } mode = Mode::help;
  bool debug = false;
  bool interactive = false;
  int n = 0;
  std::optional<Estimator> estimator;
  TokenizerOptions tokenizer;
  std::vector<std::string> positional;
};

inline LangOptions parse_lang_options(const std::vector<std::string>& args) {
  if (args.empty()) throw UsageError("No arguments have been specified.");
  LangOptions o;
  const std::string& mode = args[0];
  if (mode == "--train") o.mode = LangOptions::Mode::train;
  else if (mode == "--ident") o.mode = LangOptions::Mode::ident;
  else if (mode == "--help" || mode == "-h") o.mode = LangOptions::Mode::help;
  else if (mode == "--version") o.mode = LangOptions::Mode::version;
  else throw UsageError("Unrecognized option: " + mode);

  auto set_n = [&](int n, const std::string& tok) {
    if (o.n != 0 && o.n != n) throw UsageError("more than one n-gram model selected (" + tok + ")");
    o.n = n;
  };
  auto set_est = [&](Estimator e, const std::string& tok) {
    if (o.estimator && *o.estimator != e) throw UsageError("more than one estimator selected (" + tok + ")");
    o.estimator = e;
  };
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& t = args[i];
    if (t == "--debug") o.debug = true;
    else if (t == "-interactive") o.interactive = true;
    else if (t == "-char") {}
    else if (t == "-restricted") o.tokenizer.mode = TokenizerMode::restricted;
    else if (t == "-unigram") set_n(1, t);
    else if (t == "-bigram") set_n(2, t);
    else if (t == "-trigram") set_n(3, t);
    else if (t == "-mle") set_est(Estimator::mle, t);
    else if (t == "-add-one") set_est(Estimator::add_one, t);
    else if (t == "-add-delta") set_est(Estimator::add_delta, t);
    else if (t == "-witten-bell") set_est(Estimator::witten_bell, t);
    else if (t == "-good-turing") set_est(Estimator::good_turing, t);
    else if (t.size() > 1 && t[0] == '-') throw UsageError("Unrecognized option: " + t);
    else o.positional.push_back(t);
  }
  if (o.mode == LangOptions::Mode::train || o.mode == LangOptions::Mode::ident) {
    if (o.n == 0) throw UsageError("one of -unigram, -bigram or -trigram is required");
    if (!o.estimator) throw UsageError("a statistical estimator is required (-mle, -add-one, -add-delta, "
                                       "-witten-bell or -good-turing)");
    if (o.positional.size() != 2)
      throw UsageError(o.mode == LangOptions::Mode::train ? "expected <language> <corpus-file>"
                                                          : "expected foo <bar|corpus-file>");
  }
  return o;
}

inline std::string_view ngram_name(int n) { return n == 1 ? "unigram" : n == 2 ? "bigram" : "trigram"; }

/// "lang-model.<language>.<n-gram>[.restricted].bin"
inline std::string lang_model_filename(const std::string& language, int n, TokenizerMode mode) {
  return "lang-model." + language + "." + std::string(ngram_name(n)) +
         (mode == TokenizerMode::restricted ? ".restricted" : "") + ".bin";
}

/// Every stored model in `dir` for this n-gram order and tokenizer, sorted
/// by file name.
inline std::vector<NGramModel> load_lang_models(const std::filesystem::path& dir, int n, TokenizerMode mode) {
  const std::string suffix =
      "." + std::string(ngram_name(n)) + (mode == TokenizerMode::restricted ? ".restricted" : "") + ".bin";
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (!e.is_regular_file() || name.rfind("lang-model.", 0) != 0 || name.size() <= suffix.size() ||
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
      continue;
    // The language tag itself must not contain the suffix's separators.
    const std::string lang = name.substr(11, name.size() - 11 - suffix.size());
    if (lang.empty() || lang.find('.') != std::string::npos) continue;
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<NGramModel> models;
  for (const auto& f : files) models.push_back(restore_ngram_model(f));
  return models;
}

inline int lang_ident_main(const std::vector<std::string>& args, Io io) {
  return run_guarded("lang-ident", io, [&]() -> int {
    const LangOptions o = parse_lang_options(args);
    switch (o.mode) {
      case LangOptions::Mode::help:
        lang_ident_usage(io.out);
        return kExitOk;
      case LangOptions::Mode::version:
        io.out << "Language Identification Application, v." << kVersion << "\n";
        return kExitOk;
      case LangOptions::Mode::train: {
        const std::string& lang = o.positional[0];
        if (lang.find_first_of("./\\") != std::string::npos)
          throw UsageError("language tag \"" + lang + "\" may not contain '.', '/' or '\\'");
        const auto path = io.workdir / lang_model_filename(lang, o.n, o.tokenizer.mode);
        NGramModel model = std::filesystem::exists(path) ? restore_ngram_model(path) : NGramModel(o.n, lang);
        const std::string corpus = read_text_file(resolve(io, o.positional[1]));
        train_ngram_in_place(model, tokenize_chars(corpus, o.tokenizer));
        dump_ngram_model(model, path);
        if (o.debug)
          io.err << "contexts: " << model.counts.size() << ", vocabulary: " << model.vocabulary_size() << "\n";
        io.out << "Trained " << ngram_name(o.n) << " model for [" << lang << "] on \"" << o.positional[1] << "\".\n";
        return kExitOk;
      }
      case LangOptions::Mode::ident: {
        const auto models = load_lang_models(io.workdir, o.n, o.tokenizer.mode);
        if (models.empty())
          throw Error("no trained " + std::string(ngram_name(o.n)) + " models in \"" + io.workdir.string() +
                      "\"; run --train first");
        auto identify = [&](const std::string& line) {
          if (tokenize_chars(line, o.tokenizer).empty()) return;
          const auto ranked = identify_language(models, line, *o.estimator, o.tokenizer);
          if (o.debug)
            for (const auto& s : ranked) io.err << s.language << ": " << s.log_prob << "\n";
          io.out << "Language identified: [" << ranked.front().language << "]\n";
        };
        std::string line;
        if (o.interactive) {
          io.out << "Entering interactive mode... Type \\q to exit.\n";
          while (std::getline(io.in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line == "\\q") break;
            identify(line);
          }
          return kExitOk;
        }
        std::istringstream text(read_text_file(resolve(io, o.positional[1])));
        while (std::getline(text, line)) identify(line);
        return kExitOk;
      }
    }
    return kExitUsage;
  }, lang_ident_usage);
}

}  // namespace patrec::cli
