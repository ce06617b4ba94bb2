#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "lfm/error.hpp"
#include "lfm/predictors.hpp"

namespace lfm {

// Binary checkpoint layout, all integers and floats little-endian:
//
//   char[8]  magic "LFMCKPT\0"
//   u32      format version (kCheckpointVersion)
//   u32      reserved, zero
//   u64      history H, horizon T, features F, width d, kernel bins B
//   f64[F]   normalization mean, then f64[F] std
//   f64[F*d] lift weight (row-major), f64[d] lift bias
//   f64[B*d] kernel real plane, f64[B*d] kernel imaginary plane
//   f64[H*d*T*F] readout weight (row-major), f64[T*F] readout bias
//
// Nothing may follow the last payload.

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Missing or wrong magic string.
class CheckpointFormatError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointTruncatedError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

/// Header dimensions inconsistent with each other, with the payload, or with
/// what the caller expected.
class CheckpointShapeError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

/// Dimensions a caller requires of a loaded checkpoint; unset fields are free.
struct ShapeExpectation {
  std::optional<std::size_t> history;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> features;
  std::optional<std::size_t> width;
};

void write_checkpoint(std::ostream& out, const FilterPredictor& predictor);
FilterPredictor read_checkpoint(std::istream& in, const ShapeExpectation& expect = {});

void save_checkpoint(const std::filesystem::path& path, const FilterPredictor& predictor);
FilterPredictor load_checkpoint(const std::filesystem::path& path,
                                const ShapeExpectation& expect = {});

}  // namespace lfm
