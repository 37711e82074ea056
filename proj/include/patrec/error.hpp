#pragma once

#include <stdexcept>
#include <string>

namespace patrec {

/// Base of every error raised by the library. Argument-contract violations
/// use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input bytes or text do not follow the expected layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A recognized option whose algorithm is not available.
class NotImplemented : public Error {
 public:
  explicit NotImplemented(const std::string& what)
      : Error(what + ": not implemented") {}
};

}  // namespace patrec
