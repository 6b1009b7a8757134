#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pansharp {

// Error hierarchy. Every error raised by the library derives from
// std::runtime_error or std::invalid_argument so callers that only care
// about "something failed" can catch the standard bases.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tensor or raster geometry that does not line up.
class ShapeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Command-line or request misuse (unknown method, missing required input).
class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Inputs that make an operation mathematically undefined (zero variance,
/// zero reference mean, all pixels degenerate, ...).
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value appeared in a numeric pipeline.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated binary container. Carries the byte offset at
/// which decoding failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset);

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Weight file that decodes but does not match the model it is loaded into.
class WeightFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pansharp
