#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rse {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A serialized artifact (bank, model, embedding) does not match its format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Artifacts that must agree (train/test banks, model/embedding) do not.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace rse
