#pragma once

#include <stdexcept>
#include <string>

namespace truecase {

// Exit codes follow the category: usage 2, data 3, model format 4.
enum class ErrorKind {
  kUsage,
  kData,
  kModelFormat,
  kIo,
  kNumeric,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class ModelFormatError : public Error {
 public:
  explicit ModelFormatError(const std::string& what)
      : Error(ErrorKind::kModelFormat, what) {}
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace truecase
