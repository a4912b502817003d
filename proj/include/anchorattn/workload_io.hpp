#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "anchorattn/matrix.hpp"

namespace anchorattn {

// AQKV workload file, little-endian:
//   magic "AQKV" (4 bytes), version u32 = 1, head_count u32, n u64, d u32,
//   dtype u8 (0 = 32-bit float), 3 reserved bytes; then per head the Q rows,
//   K rows and V rows as row-major 32-bit floats.

enum class DecodeErrorKind {
    BadMagic,
    BadVersion,
    Truncated,
    ShapeMismatch,
    EmptyWorkload,
    NonFinite,
    Io,
};

class DecodeError : public std::runtime_error {
  public:
    DecodeError(DecodeErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    DecodeErrorKind kind() const { return kind_; }

  private:
    DecodeErrorKind kind_;
};

/// Writes heads to `path`. All heads must share (n, d); the list must be
/// non-empty. Round-trips through read_workload bit-exactly.
void write_workload(const std::string& path, const std::vector<HeadWorkload>& heads);

/// Reads an AQKV file. Throws DecodeError with a distinct kind for bad
/// magic, version mismatch, truncated payload, bad shapes, empty head list
/// and non-finite payload values.
std::vector<HeadWorkload> read_workload(const std::string& path);

}  // namespace anchorattn
