#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tidk {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual, const std::string& context = {})
      : Error("dimension mismatch" + (context.empty() ? std::string{} : " (" + context + ")") +
              ": expected " + std::to_string(expected) + ", got " + std::to_string(actual)) {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InsufficientPoints : public Error {
 public:
  InsufficientPoints(std::size_t needed, std::size_t available)
      : Error("insufficient points: need at least " + std::to_string(needed) + ", have " +
              std::to_string(available)) {}
};

class MissingLabels : public Error {
 public:
  using Error::Error;
};

}  // namespace tidk
