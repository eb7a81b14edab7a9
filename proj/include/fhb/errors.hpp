#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fhb {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition or invariant violation on an API call.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Filesystem-level failure (open, read, write).
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed HSIC container. Carries what went wrong and where.
class ContainerError : public Error {
 public:
  enum class Offense {
    BadMagic,
    BadVersion,
    ReservedNonzero,
    BadDimensions,
    Truncated,
    TrailingBytes,
    NonIncreasingWavelengths,
    NonFiniteValue,
    NegativeValue,
  };

  ContainerError(Offense offense, std::size_t byte_offset, const std::string& detail)
      : Error(detail + " at byte " + std::to_string(byte_offset)),
        offense_(offense),
        byte_offset_(byte_offset) {}

  Offense offense() const { return offense_; }
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  Offense offense_;
  std::size_t byte_offset_;
};

// Malformed CSV file. Line numbers are 1-based; line 1 is the header.
class CsvError : public Error {
 public:
  CsvError(std::size_t line, const std::string& detail)
      : Error(detail + " at line " + std::to_string(line)), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Bad run configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage failed (CLI exit code carried along).
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& detail, int exit_code)
      : Error("stage " + stage + ": " + detail), stage_(stage), exit_code_(exit_code) {}

  const std::string& stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

}  // namespace fhb
