#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pccs/trajectory.hpp"

namespace pccs {

struct ParseError : std::runtime_error {
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line;
};

struct EmptySceneError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses whitespace-separated "frame_id pedestrian_id x y" rows (meters).
// Rows may arrive in any order; each track is sorted by frame.
TrajectoryScene parse_scene(std::istream& in, const std::string& scene_id,
                            const std::string& source = "<stream>");
TrajectoryScene load_scene(const std::filesystem::path& path);

// Rows sorted by (frame, pedestrian), coordinates with 6 decimals.
void write_scene(const TrajectoryScene& scene, std::ostream& out);

using DatasetScenes = std::map<std::string, std::vector<TrajectoryScene>>;

// One subdirectory per dataset, any number of scene files inside (sorted by name).
// With `errors` set, unreadable or malformed files are listed there and skipped;
// otherwise the first failure throws.
DatasetScenes load_dataset_dir(const std::filesystem::path& root,
                               std::vector<std::string>* errors = nullptr);

DatasetWindows window_datasets(const DatasetScenes& scenes, int stride = 1);

// CRC-64 over every scene file (relative name and bytes) below `root`.
std::uint64_t dataset_fingerprint(const std::filesystem::path& root);

// Window cache: "PCWC", u32 version, u64 fingerprint, u32 dataset count, then per
// dataset its name and windows; trailing CRC-64. All integers and reals little-endian.
inline constexpr std::uint32_t kWindowCacheVersion = 1;

void save_window_cache(const std::filesystem::path& path, std::uint64_t fingerprint,
                       const DatasetWindows& windows);
// Returns nothing when the file is missing or was built from different data.
std::optional<DatasetWindows> load_window_cache(const std::filesystem::path& path,
                                                std::uint64_t fingerprint);

}  // namespace pccs
