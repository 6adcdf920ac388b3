#pragma once

#include <stdexcept>
#include <string>

namespace linkcloze {

// Every failure the library raises derives from Error so callers can catch
// one type; the subclasses map onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input record. line() is 1-based, 0 when not line oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ReportMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace linkcloze
