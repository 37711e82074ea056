#pragma once

// prob-parse: compile a probabilistic CNF grammar and parse sentences.

#include <string>
#include <vector>

#include "patrec/cli/common.hpp"
#include "patrec/cyk.hpp"

namespace patrec::cli {

inline constexpr std::string_view kCompiledGrammarFile = "grammar.bin";

inline void parse_usage(std::ostream& os) {
  os << "Usage:\n"
        "    prob-parse --help | -h\n"
        "        : to display this help and exit\n"
        "\n"
        "    prob-parse --version\n"
        "        : to display version and exit\n"
        "\n"
        "    prob-parse --train [ OPTIONS ] <grammar-file>\n"
        "        : to compile grammar from the <grammar-file>\n"
        "\n"
        "    prob-parse --parse [ OPTIONS ]\n"
        "        : to parse sentences from standard input\n"
        "\n"
        "Where options are of the following:\n"
        "\n"
        "    --debug  - enable debugging (more verbose output)\n"
        "    -case    - make it case-sensitive (words are always matched verbatim)\n"
        "    -num     - parse numerical values (numbers never match terminals)\n"
        "    -quote   - consider quotes and count quoted strings as one token\n"
        "    -eos     - make typical ends of sentences (<?>, <!>, <.>) significant\n";
}

inline int parse_main(const std::vector<std::string>& args, Io io) {
  return run_guarded("prob-parse", io, [&]() -> int {
    if (args.empty()) throw UsageError("No arguments have been specified.");
    const std::string& mode = args[0];
    bool debug = false;
    std::vector<std::string> positional;
    for (std::size_t i = 1; i < args.size(); ++i) {
      const auto& a = args[i];
      if (a == "--debug") debug = true;
      else if (a == "-case" || a == "-num" || a == "-quote" || a == "-eos") {}
      else if (a.size() > 1 && a[0] == '-') throw UsageError("Unrecognized option: " + a);
      else positional.push_back(a);
    }

    if (mode == "--help" || mode == "-h") {
      parse_usage(io.out);
      return kExitOk;
    }
    if (mode == "--version") {
      io.out << "Probabilistic Parsing, v." << kVersion << "\n";
      return kExitOk;
    }
    if (mode == "--train") {
      if (positional.size() != 1) throw UsageError("expected exactly one <grammar-file>");
      const Grammar g = compile_grammar(read_text_file(resolve(io, positional[0])));
      for (const auto& w : validate_grammar(g)) io.err << "WARNING: " << w << "\n";
      dump_grammar(g, io.workdir / kCompiledGrammarFile);
      io.out << "Compiled " << g.rules.size() << " rules (" << g.nonterminals.size() << " non-terminals, "
             << g.terminals.size() << " terminals) from \"" << positional[0] << "\".\n";
      return kExitOk;
    }
    if (mode == "--parse") {
      if (!positional.empty()) throw UsageError("--parse reads sentences from standard input only");
      const auto path = io.workdir / kCompiledGrammarFile;
      if (!std::filesystem::exists(path)) throw Error("no compiled grammar found; run --train <grammar-file> first");
      const Grammar g = restore_grammar(path);
      io.out << "Entering interactive mode... Type \\q to exit.\n";
      std::string line;
      for (;;) {
        io.out << "sentence> " << std::flush;
        if (!std::getline(io.in, line)) {
          io.out << "\n";
          break;
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line == "\\q") break;
        io.out << line << "\n\n";
        const auto tokens = tokenize_sentence(line);
        for (const auto& w : tokens.warnings) io.err << w << "\n";
        if (debug) io.err << "words: " << tokens.words.size() << "\n";
        io.out << format_parse(g, tokens.words);
      }
      return kExitOk;
    }
    throw UsageError("Unrecognized option: " + mode);
  }, parse_usage);
}

}  // namespace patrec::cli
