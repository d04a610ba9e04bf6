#pragma once

#include <cstdint>
#include <string>

#include "slr/skeleton/encoder.hpp"
#include "slr/train/config.hpp"

namespace slr {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Binary layout, little-endian:
///   "SLRMODEL" | u32 version | u64 config hash | str config | str layout json |
///   u32 tensor count | per tensor: str name, u64 rows, u64 cols, rows*cols f64 column-major
/// where str is a u32 byte length followed by the bytes.
void save_model(const std::string& path, const SkeletonEncoder& model, const TrainConfig& config);

struct LoadedModel {
    TrainConfig config;
    SkeletonEncoder model;
};

/// Throws IoError on a bad magic, unknown version, hash mismatch or truncation.
LoadedModel load_model(const std::string& path);

} // namespace slr
