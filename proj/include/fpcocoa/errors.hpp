#pragma once

#include <stdexcept>
#include <string>

namespace fpcocoa {

/// Bad shapes, non-finite values, or out-of-range arguments.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Partition sizes that do not add up to the column count.
class InvalidPartition : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// An operation was called outside its documented regime (e.g. a tall-only
/// bound given a broad block).
class PreconditionError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class InsufficientData : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NoNonzeroSingularValue : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Malformed IDX, CSV or config payload.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace fpcocoa
