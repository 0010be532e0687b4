#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pccs/binary_io.hpp"
#include "pccs/predictor.hpp"

namespace pccs {

// "PCCS", u32 version, config block (key=value lines), named f64 arrays, CRC-64.
std::vector<std::uint8_t> serialize_model(const ModelBundle& model);
// Throws FormatError on bad magic, version, checksum, truncation or shapes.
ModelBundle deserialize_model(std::span<const std::uint8_t> bytes);

void save_checkpoint(const ModelBundle& model, const std::filesystem::path& path);
ModelBundle load_checkpoint(const std::filesystem::path& path);

// CRC-64 of the serialized bundle.
std::uint64_t model_hash(const ModelBundle& model);

}  // namespace pccs
