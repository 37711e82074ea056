#pragma once

// zipf: rank/frequency analysis of a corpus.

#include <string>
#include <vector>

#include "patrec/cli/common.hpp"
#include "patrec/audio_io.hpp"
#include "patrec/nlp_lm.hpp"

namespace patrec::cli {

inline void zipf_usage(std::ostream& os) {
  os << "Usage:\n"
        "    zipf --help | -h | [ OPTIONS ] <corpus-file>\n"
        "    zipf --list [ OPTIONS ] <corpus-file>\n"
        "\n"
        "Options (one or more of the following):\n"
        "    --case  - make it case-sensitive\n"
        "    --num   - parse numerical values\n"
        "    --quote - consider quotes and count quoted strings as one token\n"
        "    --eos   - make typical ends of sentences (<?>, <!>, <.>) significant\n"
        "    --nolog - dump Zipf's law graph values as-is instead of log/log\n"
        "    --list  - lists already pre-collected statistics for a given corpus\n";
}

inline constexpr std::size_t kZipfReportEvery = 1000;
inline constexpr std::size_t kZipfReportTop = 100;

struct ZipfOptions {
  TokenizerOptions tokenizer;
  bool nolog = false;
  bool list = false;
  bool help = false;
  std::string corpus;
};

inline ZipfOptions parse_zipf_options(const std::vector<std::string>& args) {
  ZipfOptions o;
  for (const auto& a : args) {
    if (a == "--help" || a == "-h") o.help = true;
    else if (a == "--case") o.tokenizer.case_sensitive = true;
    else if (a == "--num") o.tokenizer.parse_numbers = true;
    else if (a == "--quote") o.tokenizer.quotes_as_token = true;
    else if (a == "--eos") o.tokenizer.eos_significant = true;
    else if (a == "--nolog") o.nolog = true;
    else if (a == "--list") o.list = true;
    else if (a.size() > 1 && a[0] == '-') throw UsageError("Unrecognized option: " + a);
    else if (!o.corpus.empty()) throw UsageError("only one corpus file may be given");
    else o.corpus = a;
  }
  if (!o.help && o.corpus.empty()) throw UsageError("No corpus file specified.");
  return o;
}

/// Options that change the counts or the output, in a fixed order.
inline std::string zipf_option_suffix(const ZipfOptions& o) {
  std::string s;
  if (o.tokenizer.case_sensitive) s += "--case";
  if (o.tokenizer.parse_numbers) s += "--num";
  if (o.tokenizer.quotes_as_token) s += "--quote";
  if (o.tokenizer.eos_significant) s += "--eos";
  if (o.nolog) s += "--nolog";
  return s;
}

inline std::string zipf_table(const std::vector<WordStats>& ranked, std::size_t limit) {
  std::string out;
  for (std::size_t i = 0; i < ranked.size() && i < limit; ++i)
    out += std::to_string(ranked[i].rank) + "\t" + ranked[i].lexeme + "\t" + std::to_string(ranked[i].frequency) + "\n";
  return out;
}

inline int zipf_main(const std::vector<std::string>& args, Io io) {
  return run_guarded("zipf", io, [&]() -> int {
    const ZipfOptions o = parse_zipf_options(args);
    if (o.help) {
      zipf_usage(io.out);
      return kExitOk;
    }
    const std::string base = std::filesystem::path(o.corpus).filename().string() + zipf_option_suffix(o);
    // --nolog changes only the CSV, so the counts are shared with the log run.
    ZipfOptions counts_only = o;
    counts_only.nolog = false;
    const auto stats_path =
        io.workdir / (std::filesystem::path(o.corpus).filename().string() + zipf_option_suffix(counts_only) + ".stats");

    if (o.list) {
      if (!std::filesystem::exists(stats_path))
        throw Error("no statistics collected for \"" + o.corpus + "\" with these options; run without --list first");
      const ZipfResult z = restore_zipf(stats_path);
      io.out << zipf_table(z.ranked, z.ranked.size());
      return kExitOk;
    }

    const auto words = zipf_tokenize(read_text_file(resolve(io, o.corpus)), o.tokenizer);
    for (std::size_t seen = kZipfReportEvery; seen <= words.size(); seen += kZipfReportEvery) {
      const std::vector<std::string> prefix(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(seen));
      io.out << "Top " << kZipfReportTop << " words after " << seen << " words:\n"
             << zipf_table(zipf_rank(prefix).ranked, kZipfReportTop) << "\n";
    }
    const ZipfResult z = zipf_rank(words);
    io.out << "Frequency of frequencies:\n";
    for (auto it = z.freq_of_freq.rbegin(); it != z.freq_of_freq.rend(); ++it)
      io.out << it->first << "\t" << it->second << "\n";

    patrec::detail::write_file_bytes(io.workdir / (base + ".csv"), zipf_csv(z, o.nolog));
    dump_zipf(z, stats_path);
    return kExitOk;
  }, zipf_usage);
}

}  // namespace patrec::cli
