#pragma once

#include <stdexcept>
#include <string>

namespace tabletop {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shapes that do not line up (matmul inner dims, channel counts, kernels
/// larger than the padded input, resolutions too small for the pooling chain).
class DimensionError : public Error {
public:
  using Error::Error;
};

/// An operation was called on an object in the wrong state, e.g. a backward
/// pass without a cached forward pass.
class StateError : public Error {
public:
  using Error::Error;
};

/// NaN/Inf in a loss, gradient or parameter.
class NumericError : public Error {
public:
  using Error::Error;
};

/// Invalid user-supplied configuration or data (mask values, labels, shifts).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Malformed text or file contents (filenames, PGM headers, manifests).
class ParseError : public Error {
public:
  using Error::Error;
};

/// Malformed checkpoint file. `kind()` lets callers tell the failure modes apart.
class CheckpointError : public Error {
public:
  enum class Kind { bad_magic, truncated_header, bad_header, payload_length_mismatch, shape_mismatch, io };

  CheckpointError(Kind kind, const std::string& what);
  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

const char* to_string(CheckpointError::Kind kind) noexcept;

}  // namespace tabletop
