#pragma once

// Probabilistic CNF grammars: compilation from text, probabilistic CYK
// parsing and parse-tree rendering.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include "patrec/binary_io.hpp"
#include "patrec/error.hpp"

namespace patrec {

struct Rule {
  int lhs = 0;
  bool lexical = false;
  int b = -1;         // binary: A -> B C
  int c = -1;
  int terminal = -1;  // lexical: A -> terminal
  double prob = 0.0;

  friend bool operator==(const Rule&, const Rule&) = default;
};

class Grammar {
 public:
  std::vector<std::string> nonterminals;  // index 0 is the start symbol
  std::vector<std::string> terminals;
  std::vector<Rule> rules;                // source order

  [[nodiscard]] std::optional<int> terminal_index(std::string_view t) const {
    const auto it = std::find(terminals.begin(), terminals.end(), t);
    if (it == terminals.end()) return std::nullopt;
    return static_cast<int>(it - terminals.begin());
  }
  [[nodiscard]] std::optional<int> nonterminal_index(std::string_view nt) const {
    const auto it = std::find(nonterminals.begin(), nonterminals.end(), nt);
    if (it == nonterminals.end()) return std::nullopt;
    return static_cast<int>(it - nonterminals.begin());
  }
  [[nodiscard]] std::size_t size() const noexcept { return nonterminals.size(); }

  friend bool operator==(const Grammar& a, const Grammar& b) {
    return a.nonterminals == b.nonterminals && a.terminals == b.terminals && a.rules == b.rules;
  }
};

namespace detail {

/// Blanks out comments, keeping newlines so line numbers survive: "#" when
/// it is the first non-blank character of a line, "//" to end of line, and
/// "/* */" blocks.
inline std::string strip_grammar_comments(std::string_view src) {
  std::string out;
  out.reserve(src.size());
  bool line_start = true;
  std::size_t i = 0;
  while (i < src.size()) {
    const char ch = src[i];
    if (ch == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      const auto end = src.find("*/", i + 2);
      if (end == std::string_view::npos) throw FormatError("unterminated /* comment");
      for (std::size_t k = i; k < end + 2; ++k)
        if (src[k] == '\n') out.push_back('\n');
      out.push_back(' ');
      i = end + 2;
      continue;
    }
    if ((ch == '/' && i + 1 < src.size() && src[i + 1] == '/') || (ch == '#' && line_start)) {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (ch == '\n') line_start = true;
    else if (ch != ' ' && ch != '\t' && ch != '\r') line_start = false;
    out.push_back(ch);
    ++i;
  }
  return out;
}

inline std::vector<std::string> grammar_line_tokens(std::string_view line, std::size_t line_no) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const auto blank = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; };
  while (i < line.size()) {
    if (blank(line[i])) {
      ++i;
    } else if (line[i] == '<') {
      const auto close = line.find('>', i);
      if (close == std::string_view::npos)
        throw FormatError("line " + std::to_string(line_no) + ": unterminated non-terminal");
      tokens.emplace_back(line.substr(i, close - i + 1));
      i = close + 1;
    } else {
      std::size_t j = i;
      while (j < line.size() && !blank(line[j]) && line[j] != '<') ++j;
      tokens.emplace_back(line.substr(i, j - i));
      i = j;
    }
  }
  return tokens;
}

inline bool is_nonterminal_token(std::string_view t) { return t.size() > 2 && t.front() == '<' && t.back() == '>'; }

}  // namespace detail

/// Rules "<A> ::= p <B> <C>" or "<A> ::= p terminal", one per line, with an
/// optional trailing "%". Symbols are numbered by first appearance, so the
/// first non-terminal in the file is the start symbol.
inline Grammar compile_grammar(std::string_view source) {
  Grammar g;
  const std::string text = detail::strip_grammar_comments(source);
  std::set<std::tuple<int, bool, int, int, int>> seen;
  auto nonterminal = [&g](const std::string& tok) {
    const std::string name = tok.substr(1, tok.size() - 2);
    if (auto idx = g.nonterminal_index(name)) return *idx;
    g.nonterminals.push_back(name);
    return static_cast<int>(g.nonterminals.size() - 1);
  };
  auto terminal = [&g](const std::string& name) {
    if (auto idx = g.terminal_index(name)) return *idx;
    g.terminals.push_back(name);
    return static_cast<int>(g.terminals.size() - 1);
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const std::string_view line =
        std::string_view(text).substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    start = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    auto toks = detail::grammar_line_tokens(line, line_no);
    if (!toks.empty() && toks.back() == "%") toks.pop_back();
    if (toks.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (toks.size() < 4 || !detail::is_nonterminal_token(toks[0]) || toks[1] != "::=")
      throw FormatError(where + "malformed rule, expected \"<LHS> ::= PROBABILITY RHS\"");

    double p = 0.0;
    const auto& ps = toks[2];
    const auto [ptr, ec] = std::from_chars(ps.data(), ps.data() + ps.size(), p);
    if (ec != std::errc{} || ptr != ps.data() + ps.size() || !std::isfinite(p))
      throw FormatError(where + "unparsable probability \"" + ps + "\"");
    if (p < 0.0 || p > 1.0) throw FormatError(where + "probability " + ps + " outside [0, 1]");

    Rule r;
    r.lhs = nonterminal(toks[0]);
    r.prob = p;
    if (toks.size() == 5 && detail::is_nonterminal_token(toks[3]) && detail::is_nonterminal_token(toks[4])) {
      r.b = nonterminal(toks[3]);
      r.c = nonterminal(toks[4]);
    } else if (toks.size() == 4 && !detail::is_nonterminal_token(toks[3]) && toks[3].find('>') == std::string::npos) {
      r.lexical = true;
      r.terminal = terminal(toks[3]);
    } else {
      throw FormatError(where + "right-hand side is not in CNF (need \"<B> <C>\" or one terminal)");
    }
    if (!seen.emplace(r.lhs, r.lexical, r.b, r.c, r.terminal).second)
      throw FormatError(where + "duplicate rule");
    g.rules.push_back(r);
  }
  if (g.rules.empty()) throw FormatError("grammar has no rules");
  return g;
}

/// Non-fatal checks: per-LHS probability sums off from 1 by more than 1e-6,
/// and non-terminals that never appear on a left-hand side.
inline std::vector<std::string> validate_grammar(const Grammar& g) {
  std::vector<std::string> warnings;
  std::vector<double> sums(g.size(), 0.0);
  std::vector<bool> has_rules(g.size(), false);
  for (const auto& r : g.rules) {
    sums[static_cast<std::size_t>(r.lhs)] += r.prob;
    has_rules[static_cast<std::size_t>(r.lhs)] = true;
  }
  for (std::size_t a = 0; a < g.size(); ++a) {
    if (!has_rules[a]) {
      warnings.push_back("<" + g.nonterminals[a] + "> has no rules");
    } else if (std::abs(sums[a] - 1.0) > 1e-6) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10g", sums[a]);
      warnings.push_back("probabilities of <" + g.nonterminals[a] + "> rules sum to " + buf + ", not 1");
    }
  }
  return warnings;
}

inline void dump_grammar(const Grammar& g, const std::filesystem::path& path) {
  BinaryWriter w("grammar");
  w.u64(g.nonterminals.size());
  for (const auto& s : g.nonterminals) w.str(s);
  w.u64(g.terminals.size());
  for (const auto& s : g.terminals) w.str(s);
  w.u64(g.rules.size());
  for (const auto& r : g.rules) {
    w.u32(static_cast<std::uint32_t>(r.lhs));
    w.u8(r.lexical ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(r.lexical ? r.terminal : r.b));
    w.u32(static_cast<std::uint32_t>(r.lexical ? 0 : r.c));
    w.f64(r.prob);
  }
  write_container(path, w);
}

inline Grammar restore_grammar(const std::filesystem::path& path) {
  auto r = read_container(path, "grammar");
  Grammar g;
  g.nonterminals.resize(r.count(8));
  for (auto& s : g.nonterminals) s = r.str();
  g.terminals.resize(r.count(8));
  for (auto& s : g.terminals) s = r.str();
  g.rules.resize(r.count(21));
  const auto nn = static_cast<std::uint32_t>(g.nonterminals.size());
  const auto nt = static_cast<std::uint32_t>(g.terminals.size());
  for (auto& rule : g.rules) {
    const auto lhs = r.u32();
    rule.lexical = r.u8() != 0;
    const auto x = r.u32();
    const auto y = r.u32();
    rule.prob = r.f64();
    if (lhs >= nn || (rule.lexical ? x >= nt : (x >= nn || y >= nn)) || !(rule.prob >= 0.0 && rule.prob <= 1.0))
      throw FormatError("corrupt grammar rule");
    rule.lhs = static_cast<int>(lhs);
    if (rule.lexical) {
      rule.terminal = static_cast<int>(x);
    } else {
      rule.b = static_cast<int>(x);
      rule.c = static_cast<int>(y);
    }
  }
  r.expect_end();
  return g;
}

// ---------------------------------------------------------------------------
// CYK

struct BackPointer {
  int m = 0;
  int b = 0;
  int c = 0;
  friend bool operator==(const BackPointer&, const BackPointer&) = default;
};

struct ParseChart {
  std::vector<std::string> words;
  std::size_t n_nonterminals = 0;
  std::vector<double> pi;                         // [begin][end][A]
  std::vector<std::optional<BackPointer>> back;   // same shape

  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j, std::size_t a) const {
    return (i * words.size() + j) * n_nonterminals + a;
  }
  [[nodiscard]] double prob(std::size_t i, std::size_t j, std::size_t a) const { return pi[index(i, j, a)]; }
  [[nodiscard]] const std::optional<BackPointer>& back_at(std::size_t i, std::size_t j, std::size_t a) const {
    return back[index(i, j, a)];
  }
  /// pi[0][n-1][start]
  [[nodiscard]] double sentence_probability() const { return words.empty() ? 0.0 : prob(0, words.size() - 1, 0); }
  [[nodiscard]] bool accepted() const { return sentence_probability() > 0.0; }
};

/// Fills the chart. Returns nullopt without computing anything when a word
/// is not a terminal of the grammar. Within a cell, candidates are visited
/// by split m, then A, B, C in index order, and only a strictly greater
/// probability replaces the current entry, so the first maximal derivation
/// wins ties.
inline std::optional<ParseChart> cyk_chart(const Grammar& g, const std::vector<std::string>& words) {
  if (words.empty()) throw std::invalid_argument("cannot parse an empty sentence");
  const std::size_t n = words.size();
  const std::size_t nn = g.size();
  ParseChart chart;
  chart.words = words;
  chart.n_nonterminals = nn;
  chart.pi.assign(n * n * nn, 0.0);
  chart.back.assign(n * n * nn, std::nullopt);

  for (std::size_t i = 0; i < n; ++i) {
    const auto t = g.terminal_index(words[i]);
    if (!t) return std::nullopt;
    for (const auto& r : g.rules)
      if (r.lexical && r.terminal == *t) chart.pi[chart.index(i, i, static_cast<std::size_t>(r.lhs))] = r.prob;
  }

  std::vector<Rule> binary;
  for (const auto& r : g.rules)
    if (!r.lexical) binary.push_back(r);
  std::sort(binary.begin(), binary.end(),
            [](const Rule& x, const Rule& y) { return std::tie(x.lhs, x.b, x.c) < std::tie(y.lhs, y.b, y.c); });

  for (std::size_t span = 2; span <= n; ++span) {
    for (std::size_t begin = 0; begin + span <= n; ++begin) {
      const std::size_t end = begin + span - 1;
      for (std::size_t m = begin; m < end; ++m) {
        for (const auto& r : binary) {
          const double p = chart.pi[chart.index(begin, m, static_cast<std::size_t>(r.b))] *
                           chart.pi[chart.index(m + 1, end, static_cast<std::size_t>(r.c))] * r.prob;
          const auto cell = chart.index(begin, end, static_cast<std::size_t>(r.lhs));
          if (p > chart.pi[cell]) {
            chart.pi[cell] = p;
            chart.back[cell] = BackPointer{static_cast<int>(m), r.b, r.c};
          }
        }
      }
    }
  }
  return chart;
}

/// The filled chart when the sentence is derivable from the start symbol.
inline std::optional<ParseChart> cyk_parse(const Grammar& g, const std::vector<std::string>& words) {
  auto chart = cyk_chart(g, words);
  if (!chart || !chart->accepted()) return std::nullopt;
  return chart;
}

struct ParseTree {
  int nonterminal = 0;
  double prob = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  std::vector<ParseTree> children;  // none or two
};

inline ParseTree build_tree(const ParseChart& chart, std::size_t i, std::size_t j, int a) {
  if (i > j || j >= chart.words.size() || a < 0 || static_cast<std::size_t>(a) >= chart.n_nonterminals)
    throw std::invalid_argument("chart cell out of range");
  const auto ua = static_cast<std::size_t>(a);
  if (!(chart.prob(i, j, ua) > 0.0)) throw std::invalid_argument("no derivation for this chart cell");
  ParseTree t{a, chart.prob(i, j, ua), i, j, {}};
  if (const auto& bp = chart.back_at(i, j, ua)) {
    t.children.push_back(build_tree(chart, i, static_cast<std::size_t>(bp->m), bp->b));
    t.children.push_back(build_tree(chart, static_cast<std::size_t>(bp->m) + 1, j, bp->c));
  }
  return t;
}

inline ParseTree build_tree(const ParseChart& chart) { return build_tree(chart, 0, chart.words.size() - 1, 0); }

// ---------------------------------------------------------------------------
// Rendering

/// Shortest round-trip digits laid out like Java's Double.toString: plain
/// decimal with at least one fractional digit for 1e-3 <= |v| < 1e7,
/// otherwise "d.dddE<exp>".
inline std::string java_double_string(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  if (v == 0.0) return std::signbit(v) ? "-0.0" : "0.0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  const std::string sci(buf, res.ptr);
  const auto e_pos = sci.find('e');
  std::string mant = sci.substr(0, e_pos);
  const int exp = std::stoi(sci.substr(e_pos + 1));
  std::string sign;
  if (mant.front() == '-') {
    sign = "-";
    mant.erase(0, 1);
  }
  std::string digits;
  for (char ch : mant)
    if (ch != '.') digits.push_back(ch);

  const double mag = std::abs(v);
  if (mag >= 1e-3 && mag < 1e7) {
    std::string out;
    if (exp >= 0) {
      const auto int_len = static_cast<std::size_t>(exp) + 1;
      if (digits.size() < int_len) digits.append(int_len - digits.size(), '0');
      out = digits.substr(0, int_len) + "." + (digits.size() > int_len ? digits.substr(int_len) : "0");
    } else {
      out = "0." + std::string(static_cast<std::size_t>(-exp - 1), '0') + digits;
    }
    return sign + out;
  }
  return sign + digits.substr(0, 1) + "." + (digits.size() > 1 ? digits.substr(1) : "0") + "E" + std::to_string(exp);
}

inline std::string join_words(const std::vector<std::string>& words, std::size_t i, std::size_t j) {
  std::string s;
  for (std::size_t k = i; k <= j; ++k) {
    if (k > i) s += ' ';
    s += words[k];
  }
  return s;
}

/// "<NT> (prob) [ i-j: words ]" per node, eight spaces of indent per level.
inline void render_tree(const Grammar& g, const ParseChart& chart, const ParseTree& t, std::size_t level,
                        std::string& out) {
  out += std::string(8 * level, ' ') + "<" + g.nonterminals[static_cast<std::size_t>(t.nonterminal)] + "> (" +
         java_double_string(t.prob) + ") [ " + std::to_string(t.i) + "-" + std::to_string(t.j) + ": " +
         join_words(chart.words, t.i, t.j) + " ]\n";
  for (const auto& c : t.children) render_tree(g, chart, c, level + 1, out);
}

/// The full report for one sentence, including the trailing blank lines.
inline std::string format_parse(const Grammar& g, const std::vector<std::string>& words) {
  const std::string sentence = "[ " + (words.empty() ? std::string() : join_words(words, 0, words.size() - 1)) + " ]";
  const auto chart = words.empty() ? std::nullopt : cyk_parse(g, words);
  if (!chart) return "There's no parse for " + sentence + "\n\n";
  std::string out = "Parse for the sentence " + sentence + " is below:\n\nSYNOPSIS:\n\n" +
                    "<NONTERMINAL> (PROBABILITY) [ SPAN: words of span ]\n\n";
  render_tree(g, *chart, build_tree(*chart), 0, out);
  out += "\n\n";
  return out;
}

// ---------------------------------------------------------------------------
// Sentence tokenization

struct SentenceTokens {
  std::vector<std::string> words;
  std::vector<std::string> warnings;
};

/// Word tokens start with a letter (or any byte >= 0x80) and continue
/// through letters, digits, '.', '-' and bytes >= 0x80; case is kept.
/// Numbers, quoted strings and other punctuation are dropped, each with a
/// "WARNING: Non-word token encountered: Token[...], line N" note. '/'
/// starts a comment running to the end of the line.
inline SentenceTokens tokenize_sentence(std::string_view text, std::size_t line = 1) {
  SentenceTokens out;
  const auto u = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  const auto alpha = [](unsigned char b) { return (b >= 'a' && b <= 'z') || (b >= 'A' && b <= 'Z') || b >= 0x80; };
  const auto digit = [](unsigned char b) { return b >= '0' && b <= '9'; };
  const auto warn = [&](const std::string& tok) {
    out.warnings.push_back("WARNING: Non-word token encountered: Token[" + tok + "], line " + std::to_string(line));
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char b = u(i);
    if (b == '\n') {
      ++line;
      ++i;
    } else if (b <= ' ') {
      ++i;
    } else if (alpha(b)) {
      std::size_t j = i;
      while (j < text.size() && (alpha(u(j)) || digit(u(j)) || u(j) == '.' || u(j) == '-')) ++j;
      out.words.emplace_back(text.substr(i, j - i));
      i = j;
    } else if (digit(b) || b == '.' || b == '-') {
      std::size_t j = i + 1;
      while (j < text.size() && (digit(u(j)) || u(j) == '.')) ++j;
      const std::string num(text.substr(i, j - i));
      double v = 0.0;
      const auto body = num.front() == '-' ? std::string_view(num).substr(1) : std::string_view(num);
      std::from_chars(body.data(), body.data() + body.size(), v);
      if (num.front() == '-' && body.empty()) warn("'-'");
      else warn("n=" + java_double_string(num.front() == '-' ? -v : v));
      i = j;
    } else if (b == '"' || b == '\'') {
      std::size_t j = i + 1;
      while (j < text.size() && u(j) != b && u(j) != '\n') ++j;
      warn(std::string(text.substr(i + 1, j - i - 1)));
      i = j < text.size() && u(j) == b ? j + 1 : j;
    } else if (b == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else {
      warn(std::string("'") + static_cast<char>(b) + "'");
      ++i;
    }
  }
  return out;
}

}  // namespace patrec
