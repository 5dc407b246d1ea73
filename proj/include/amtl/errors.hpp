#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace amtl {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violation on an argument: shape mismatch, out-of-range value,
// unresolvable id.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A configuration that cannot be satisfied (e.g. more draws than items).
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// Two embeddings of an active triplet coincide, so the hinge gradient is
// undefined.
class DegeneratePair : public Error {
 public:
  using Error::Error;
};

// Malformed file content. `line` is 1-based; 0 when the location is a whole
// document (JSON).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Filesystem failure while reading or writing.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace amtl
