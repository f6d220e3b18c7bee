#pragma once

// Versioned binary parameter checkpoint:
//   "ASCK" | u32 version | u32 layer count
//   per layer: u8 kind | u32 config count | u64 config[...] |
//              u32 parameter count | per parameter: u32 rank, u64 dims[...], f64 data[...]
// All integers and floats little-endian.

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "autosen/nn/layer_stack.hpp"

namespace autosen::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const LayerStack& stack, std::ostream& out);
LayerStack read_checkpoint(std::istream& in);

void save_checkpoint(const LayerStack& stack, const std::filesystem::path& path);
LayerStack load_checkpoint(const std::filesystem::path& path);

}  // namespace autosen::nn
