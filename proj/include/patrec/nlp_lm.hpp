#pragma once

// Character n-gram language models, smoothing estimators, maximum-probability
// language identification and Zipf rank/frequency analysis.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "patrec/binary_io.hpp"
#include "patrec/error.hpp"

namespace patrec {

// ---------------------------------------------------------------------------
// Text decoding and character tokenization

/// Decodes UTF-8; a byte that does not start a valid sequence is taken as
/// the code point of the same value.
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
    char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1Fu) : len == 3 ? (b0 & 0x0Fu) : (b0 & 0x07u);
    bool ok = len != 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b >> 6) != 0x2) ok = false;
      cp = (cp << 6) | (b & 0x3Fu);
    }
    if (!ok) {
      out.push_back(b0);
      ++i;
    } else {
      out.push_back(cp);
      i += len;
    }
  }
  return out;
}

inline std::string encode_utf8(std::u32string_view s) {
  std::string out;
  for (char32_t c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

enum class TokenizerMode { restricted, unrestricted };

struct TokenizerOptions {
  TokenizerMode mode = TokenizerMode::unrestricted;
  bool case_sensitive = false;
  bool parse_numbers = false;
  bool quotes_as_token = false;
  bool eos_significant = false;
};

inline bool is_blank(char32_t c) noexcept {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v';
}

/// Restricted: ASCII letters folded to lowercase plus digits; everything else
/// dropped. Unrestricted: every non-blank character, case kept.
inline std::u32string tokenize_chars(std::string_view text, const TokenizerOptions& opts = {}) {
  std::u32string out;
  for (char32_t c : decode_utf8(text)) {
    if (opts.mode == TokenizerMode::restricted) {
      if (c >= U'A' && c <= U'Z') out.push_back(c - U'A' + U'a');
      else if ((c >= U'a' && c <= U'z') || (c >= U'0' && c <= U'9')) out.push_back(c);
    } else if (!is_blank(c)) {
      out.push_back(c);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// N-gram models

struct NGramModel {
  int n = 1;
  std::string language;
  // context (n-1 characters) -> next character -> count
  std::map<std::u32string, std::map<char32_t, long long>> counts;
  std::map<std::u32string, long long> totals;
  std::set<char32_t> vocabulary;

  NGramModel() = default;
  NGramModel(int order, std::string lang) : n(order), language(std::move(lang)) {
    if (order < 1 || order > 3) throw std::invalid_argument("n-gram order must be 1, 2 or 3");
  }

  [[nodiscard]] long long count(const std::u32string& ctx, char32_t c) const {
    const auto it = counts.find(ctx);
    if (it == counts.end()) return 0;
    const auto jt = it->second.find(c);
    return jt == it->second.end() ? 0 : jt->second;
  }
  [[nodiscard]] long long total(const std::u32string& ctx) const {
    const auto it = totals.find(ctx);
    return it == totals.end() ? 0 : it->second;
  }
  /// Distinct characters observed after `ctx`.
  [[nodiscard]] long long types(const std::u32string& ctx) const {
    const auto it = counts.find(ctx);
    return it == counts.end() ? 0 : static_cast<long long>(it->second.size());
  }
  [[nodiscard]] long long vocabulary_size() const { return static_cast<long long>(vocabulary.size()); }

  friend bool operator==(const NGramModel&, const NGramModel&) = default;
};

/// Slides an n-character window over the tokenized text. Every character
/// enters the vocabulary, even in text shorter than n.
inline void train_ngram_in_place(NGramModel& model, std::u32string_view chars) {
  model.vocabulary.insert(chars.begin(), chars.end());
  const auto n = static_cast<std::size_t>(model.n);
  for (std::size_t i = 0; i + n <= chars.size(); ++i) {
    std::u32string ctx(chars.substr(i, n - 1));
    ++model.counts[ctx][chars[i + n - 1]];
    ++model.totals[ctx];
  }
}

inline NGramModel train_ngram(NGramModel model, std::string_view text, const TokenizerOptions& opts = {}) {
  train_ngram_in_place(model, tokenize_chars(text, opts));
  return model;
}

// ---------------------------------------------------------------------------
// Estimators

/// (C + delta) / (N + delta * V)
inline double prob_add_delta(const NGramModel& m, const std::u32string& ctx, char32_t c, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be non-negative");
  const double denom = static_cast<double>(m.total(ctx)) + delta * static_cast<double>(m.vocabulary_size());
  if (denom <= 0.0) throw Error("probability undefined: context has no observations and no smoothing mass");
  return (static_cast<double>(m.count(ctx, c)) + delta) / denom;
}

/// Seen: C/(N+T). Unseen: T/(Z(N+T)) with Z = V - T. When every vocabulary
/// character has been seen (Z = 0) the seen mass is already complete, so
/// C/N is used instead.
inline double prob_witten_bell(const NGramModel& m, const std::u32string& ctx, char32_t c) {
  const auto n = static_cast<double>(m.total(ctx));
  const auto t = static_cast<double>(m.types(ctx));
  const auto v = static_cast<double>(m.vocabulary_size());
  if (n == 0.0) throw Error("Witten-Bell probability undefined for a context with no observations");
  const auto count = static_cast<double>(m.count(ctx, c));
  const double z = v - t;
  if (z <= 0.0) return count / n;
  return count > 0.0 ? count / (n + t) : t / (z * (n + t));
}

/// c* = (c+1) N_{c+1} / N_c, P = c*/N over the context's count-of-counts
/// (N_0 = unseen vocabulary characters). Every zero factor becomes 1.
inline double prob_good_turing(const NGramModel& m, const std::u32string& ctx, char32_t c) {
  const long long count = m.count(ctx, c);
  long long n_c = 0;
  long long n_c1 = 0;
  if (const auto it = m.counts.find(ctx); it != m.counts.end()) {
    for (const auto& [ch, k] : it->second) {
      if (k == count) ++n_c;
      if (k == count + 1) ++n_c1;
    }
  }
  if (count == 0) n_c = std::max<long long>(m.vocabulary_size() - m.types(ctx), 0);
  const auto nz = [](long long x) { return x == 0 ? 1.0 : static_cast<double>(x); };
  const double c_star = static_cast<double>(count + 1) * nz(n_c1) / nz(n_c);
  return c_star / nz(m.total(ctx));
}

enum class Estimator { mle, add_one, add_delta, witten_bell, good_turing };

inline constexpr double kElaDelta = 0.5;

inline std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::mle: return "mle";
    case Estimator::add_one: return "add-one";
    case Estimator::add_delta: return "add-delta";
    case Estimator::witten_bell: return "witten-bell";
    case Estimator::good_turing: return "good-turing";
  }
  return "unknown";
}

inline double probability(const NGramModel& m, Estimator e, const std::u32string& ctx, char32_t c) {
  switch (e) {
    case Estimator::mle: return prob_add_delta(m, ctx, c, 0.0);
    case Estimator::add_one: return prob_add_delta(m, ctx, c, 1.0);
    case Estimator::add_delta: return prob_add_delta(m, ctx, c, kElaDelta);
    case Estimator::witten_bell: return prob_witten_bell(m, ctx, c);
    case Estimator::good_turing: return prob_good_turing(m, ctx, c);
  }
  throw std::invalid_argument("unknown estimator");
}

// ---------------------------------------------------------------------------
// Language identification

inline constexpr double kProbabilityFloor = 1e-300;

struct LanguageScore {
  std::string language;
  double log_prob = 0.0;
};

/// Sum of log P over every n-gram of the query, per model; zero or undefined
/// probabilities count as log(1e-300). Ranked descending, ties kept in model
/// order.
inline std::vector<LanguageScore> identify_language(const std::vector<NGramModel>& models, std::string_view text,
                                                    Estimator est, const TokenizerOptions& opts = {}) {
  if (models.empty()) throw std::invalid_argument("no language models to identify against");
  for (const auto& m : models)
    if (m.n != models.front().n) throw std::invalid_argument("language models differ in n-gram order");
  const auto chars = tokenize_chars(text, opts);
  if (chars.empty()) throw std::invalid_argument("nothing to identify: the text has no characters");
  const auto n = static_cast<std::size_t>(models.front().n);

  std::vector<LanguageScore> scores;
  for (const auto& m : models) {
    double lp = 0.0;
    for (std::size_t i = 0; i + n <= chars.size(); ++i) {
      const std::u32string ctx = chars.substr(i, n - 1);
      double p = 0.0;
      try {
        p = probability(m, est, ctx, chars[i + n - 1]);
      } catch (const Error&) {
        p = 0.0;
      }
      lp += std::log(std::max(p, kProbabilityFloor));
    }
    scores.push_back({m.language, lp});
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const LanguageScore& a, const LanguageScore& b) { return a.log_prob > b.log_prob; });
  return scores;
}

inline void dump_ngram_model(const NGramModel& m, const std::filesystem::path& path) {
  BinaryWriter w("ngram-model");
  w.u32(static_cast<std::uint32_t>(m.n));
  w.str(m.language);
  w.u64(m.vocabulary.size());
  for (char32_t c : m.vocabulary) w.u32(c);
  w.u64(m.counts.size());
  for (const auto& [ctx, row] : m.counts) {
    w.str(encode_utf8(ctx));
    w.u64(row.size());
    for (const auto& [c, k] : row) {
      w.u32(c);
      w.i64(k);
    }
  }
  write_container(path, w);
}

inline NGramModel restore_ngram_model(const std::filesystem::path& path) {
  auto r = read_container(path, "ngram-model");
  const auto n = static_cast<int>(r.u32());
  NGramModel m(n, r.str());
  const auto v = r.count(4);
  for (std::size_t i = 0; i < v; ++i) m.vocabulary.insert(r.u32());
  const auto rows = r.count(16);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto ctx = decode_utf8(r.str());
    if (ctx.size() != static_cast<std::size_t>(n - 1)) throw FormatError("corrupt n-gram model (context length)");
    const auto k = r.count(12);
    auto& row = m.counts[ctx];
    long long total = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const char32_t c = r.u32();
      const auto cnt = r.i64();
      if (cnt <= 0) throw FormatError("corrupt n-gram model (count)");
      row[c] = cnt;
      total += cnt;
    }
    m.totals[ctx] = total;
  }
  r.expect_end();
  return m;
}

// ---------------------------------------------------------------------------
// Zipf analysis

struct WordStats {
  std::string lexeme;
  long long frequency = 0;
  long long rank = -1;

  friend bool operator==(const WordStats&, const WordStats&) = default;
};

struct ZipfResult {
  std::vector<WordStats> ranked;           // rank 1 first
  std::map<long long, long long> freq_of_freq;  // frequency -> number of words with it
};

namespace detail {
inline bool is_word_byte(unsigned char b) noexcept {
  return (b >= 'a' && b <= 'z') || (b >= 'A' && b <= 'Z') || b >= 0x80;
}
inline bool is_digit_byte(unsigned char b) noexcept { return b >= '0' && b <= '9'; }
}  // namespace detail

/// Word tokens: maximal letter runs (non-ASCII bytes count as letters),
/// lowercased unless case_sensitive. parse_numbers adds digit runs with an
/// optional fraction; quotes_as_token turns a double-quoted span into one
/// token; eos_significant emits ".", "!" and "?" as tokens.
inline std::vector<std::string> zipf_tokenize(std::string_view text, const TokenizerOptions& opts = {}) {
  std::vector<std::string> words;
  std::size_t i = 0;
  const auto at = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  while (i < text.size()) {
    const unsigned char b = at(i);
    if (detail::is_word_byte(b)) {
      std::size_t j = i;
      while (j < text.size() && detail::is_word_byte(at(j))) ++j;
      std::string w(text.substr(i, j - i));
      if (!opts.case_sensitive)
        std::transform(w.begin(), w.end(), w.begin(),
                       [](unsigned char c) { return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c); });
      words.push_back(std::move(w));
      i = j;
    } else if (opts.parse_numbers && detail::is_digit_byte(b)) {
      std::size_t j = i;
      while (j < text.size() && detail::is_digit_byte(at(j))) ++j;
      if (j + 1 < text.size() && text[j] == '.' && detail::is_digit_byte(at(j + 1))) {
        ++j;
        while (j < text.size() && detail::is_digit_byte(at(j))) ++j;
      }
      words.emplace_back(text.substr(i, j - i));
      i = j;
    } else if (opts.quotes_as_token && b == '"') {
      const auto close = text.find('"', i + 1);
      const std::size_t end = close == std::string_view::npos ? text.size() : close;
      words.emplace_back(text.substr(i + 1, end - i - 1));
      i = close == std::string_view::npos ? text.size() : close + 1;
    } else if (opts.eos_significant && (b == '.' || b == '!' || b == '?')) {
      words.emplace_back(1, static_cast<char>(b));
      ++i;
    } else {
      ++i;
    }
  }
  return words;
}

/// Ranks 1..K by descending frequency; equal frequencies keep first-occurrence
/// order.
inline ZipfResult zipf_rank(const std::vector<std::string>& words) {
  std::unordered_map<std::string, std::size_t> index;
  ZipfResult z;
  for (const auto& w : words) {
    const auto [it, inserted] = index.emplace(w, z.ranked.size());
    if (inserted) z.ranked.push_back({w, 0, -1});
    ++z.ranked[it->second].frequency;
  }
  std::stable_sort(z.ranked.begin(), z.ranked.end(),
                   [](const WordStats& a, const WordStats& b) { return a.frequency > b.frequency; });
  for (std::size_t r = 0; r < z.ranked.size(); ++r) {
    z.ranked[r].rank = static_cast<long long>(r + 1);
    ++z.freq_of_freq[z.ranked[r].frequency];
  }
  return z;
}

inline ZipfResult zipf_analyze(std::string_view text, const TokenizerOptions& opts = {}) {
  return zipf_rank(zipf_tokenize(text, opts));
}

/// One "x,y" row per word: log10(rank),log10(frequency), or the raw values
/// when `nolog` is set.
inline std::string zipf_csv(const ZipfResult& z, bool nolog) {
  std::string out;
  char buf[64];
  for (const auto& w : z.ranked) {
    if (nolog)
      std::snprintf(buf, sizeof buf, "%lld,%lld\n", w.rank, w.frequency);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", std::log10(static_cast<double>(w.rank)),
                    std::log10(static_cast<double>(w.frequency)));
    out += buf;
  }
  return out;
}

inline void dump_zipf(const ZipfResult& z, const std::filesystem::path& path) {
  BinaryWriter w("zipf-stats");
  w.u64(z.ranked.size());
  for (const auto& s : z.ranked) {
    w.str(s.lexeme);
    w.i64(s.frequency);
    w.i64(s.rank);
  }
  write_container(path, w);
}

inline ZipfResult restore_zipf(const std::filesystem::path& path) {
  auto r = read_container(path, "zipf-stats");
  ZipfResult z;
  z.ranked.resize(r.count(24));
  for (auto& s : z.ranked) {
    s.lexeme = r.str();
    s.frequency = r.i64();
    s.rank = r.i64();
    ++z.freq_of_freq[s.frequency];
  }
  r.expect_end();
  return z;
}

}  // namespace patrec
