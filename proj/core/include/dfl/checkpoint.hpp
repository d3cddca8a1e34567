#pragma once

// Binary parameter snapshots: "DFLCKPT\0", u32 version, u64 layout
// fingerprint, u64 W, then W little-endian float32 values.

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "dfl/params.hpp"

namespace dfl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const InterpretationParams& params);
void save_checkpoint(const std::filesystem::path& path, const InterpretationParams& params);

/// Throws std::runtime_error on a bad header, a layout mismatch or a
/// truncated payload.
InterpretationParams read_checkpoint(std::istream& in, const ParamLayout& layout);
InterpretationParams load_checkpoint(const std::filesystem::path& path, const ParamLayout& layout);

}  // namespace dfl
