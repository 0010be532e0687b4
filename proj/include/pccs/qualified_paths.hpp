#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include "pccs/trajectory.hpp"

namespace pccs {

// Neighbor-path search thresholds.
struct QualifyParams {
  double radius = 1.0;                         // meters
  double speed_tol = 0.10;                     // relative speed difference
  double angle_tol = 0.1 * std::numbers::pi;   // radians
};

// Below this speed (m/s) a target counts as stationary: candidates must also be
// slower than this and direction is not compared.
inline constexpr double kStationarySpeed = 0.05;

struct FutureSegment {
  std::int64_t ped_id = 0;
  // First frame inside the circle (for the target itself: its last observed frame).
  std::int64_t crossing_frame = 0;
  // Position at the crossing frame; plays the role of the last observed position.
  Vec2 origin = Vec2::Zero();
  FuturePath positions;
  double speed = 0.0;      // m/s
  double direction = 0.0;  // radians in (-pi, pi]
};

// Heading of a displacement, in (-pi, pi].
double heading(const Vec2& d);
// Absolute wrapped difference of two headings, in [0, pi].
double angle_between(double a, double b);

// The target's own future followed by every crossing of the radius circle around the
// target's last observed position, by any other track at any time, whose entry speed
// and heading match the target's last observed step and which is followed by at least
// kPredLen contiguous frames. `target` is in world coordinates.
std::vector<FutureSegment> qualified_paths(const TrajectoryScene& scene, const TrackWindow& target,
                                           const QualifyParams& params = {});

// Positions of a segment expressed relative to its crossing point.
FuturePath local_positions(const FutureSegment& segment);

}  // namespace pccs
