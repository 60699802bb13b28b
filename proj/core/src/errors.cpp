#include "tabletop/errors.hpp"

namespace tabletop {

CheckpointError::CheckpointError(Kind kind, const std::string& what)
    : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

const char* to_string(CheckpointError::Kind kind) noexcept {
  switch (kind) {
    case CheckpointError::Kind::bad_magic: return "bad magic";
    case CheckpointError::Kind::truncated_header: return "truncated header";
    case CheckpointError::Kind::bad_header: return "bad header";
    case CheckpointError::Kind::payload_length_mismatch: return "payload length mismatch";
    case CheckpointError::Kind::shape_mismatch: return "shape mismatch";
    case CheckpointError::Kind::io: return "i/o error";
  }
  return "unknown";
}

}  // namespace tabletop
