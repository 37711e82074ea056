#pragma once

// Shared plumbing for the command-line tools. Every tool entry point takes
// its arguments (without the program name), the standard streams and a
// working directory, so tests can drive it in-process.

#include <ctime>
#include <functional>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "patrec/error.hpp"

namespace patrec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

inline constexpr std::string_view kVersion = "1.0.0";

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  std::filesystem::path workdir;
};

/// Bad command line; reported with the usage text and exit status 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline std::filesystem::path resolve(const Io& io, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : io.workdir / path;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path.string() + "\"");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string now_string() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  localtime_r(&t, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, "%a %b %d %H:%M:%S %Z %Y", &tm);
  return buf;
}

inline int run_guarded(const char* tool, const Io& io, const std::function<int()>& body,
                       const std::function<void(std::ostream&)>& usage) {
  try {
    return body();
  } catch (const UsageError& e) {
    io.err << tool << ": " << e.what() << "\n";
    usage(io.err);
    return kExitUsage;
  } catch (const std::exception& e) {
    io.err << tool << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace patrec::cli
