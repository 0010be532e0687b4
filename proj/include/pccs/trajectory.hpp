#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pccs {

inline constexpr int kObsLen = 8;
inline constexpr int kPredLen = 12;
inline constexpr int kWindowLen = kObsLen + kPredLen;
// Benchmark sampling interval in seconds.
inline constexpr double kFrameDt = 0.4;

using Vec2 = Eigen::Vector2d;
using ObsPath = std::array<Vec2, kObsLen>;
using FuturePath = std::array<Vec2, kPredLen>;

struct TrackPoint {
  std::int64_t frame = 0;
  Vec2 pos = Vec2::Zero();
};

struct TrajectoryScene {
  std::string scene_id;
  double dt = kFrameDt;
  // Frame-id increment of one sampling step (10 in the ETH/UCY files).
  std::int64_t frame_step = 1;
  // pedestrian id -> points sorted by strictly increasing frame
  std::map<std::int64_t, std::vector<TrackPoint>> tracks;

  std::size_t num_points() const;
};

struct TrackWindow {
  std::string scene_id;
  std::int64_t ped_id = 0;
  std::int64_t start_frame = 0;
  ObsPath obs;
  FuturePath fut;
};

// World -> local translation placing the last observed position at the origin.
struct NormTransform {
  Vec2 offset = Vec2::Zero();  // world position of the local origin

  Vec2 to_local(const Vec2& world) const { return world - offset; }
  Vec2 to_world(const Vec2& local) const { return local + offset; }
};

// Sliding windows over every maximal contiguous run of at least kWindowLen frames.
std::vector<TrackWindow> window_tracks(const TrajectoryScene& scene, int stride = 1);

std::pair<TrackWindow, NormTransform> normalize(const TrackWindow& window);

// Maps a normalized window back to world coordinates.
TrackWindow denormalize(const TrackWindow& window, const NormTransform& transform);

using DatasetWindows = std::map<std::string, std::vector<TrackWindow>>;

struct Split {
  std::vector<TrackWindow> train;
  std::vector<TrackWindow> test;
};

// test = every window of `holdout`; train = every window of the other datasets.
Split leave_one_out_split(const DatasetWindows& windows, const std::string& holdout);

}  // namespace pccs
