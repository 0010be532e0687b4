#include "pccs/qualified_paths.hpp"

#include <cmath>

namespace pccs {

double heading(const Vec2& d) {
  const double a = std::atan2(d.y(), d.x());
  return a == -std::numbers::pi ? std::numbers::pi : a;
}

double angle_between(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
  return d > std::numbers::pi ? 2.0 * std::numbers::pi - d : d;
}

std::vector<FutureSegment> qualified_paths(const TrajectoryScene& scene, const TrackWindow& target,
                                           const QualifyParams& params) {
  const Vec2 center = target.obs[kObsLen - 1];
  const Vec2 step = target.obs[kObsLen - 1] - target.obs[kObsLen - 2];
  const double v_target = step.norm() / scene.dt;
  const double dir_target = heading(step);
  const bool stationary = v_target < kStationarySpeed;

  std::vector<FutureSegment> out;
  FutureSegment self;
  self.ped_id = target.ped_id;
  self.crossing_frame = target.start_frame + (kObsLen - 1) * scene.frame_step;
  self.origin = center;
  self.positions = target.fut;
  self.speed = v_target;
  self.direction = dir_target;
  out.push_back(self);

  const std::int64_t fstep = scene.frame_step;
  for (const auto& [ped, track] : scene.tracks) {
    if (ped == target.ped_id) continue;
    for (std::size_t j = 1; j + kPredLen < track.size(); ++j) {
      if (track[j].frame - track[j - 1].frame != fstep) continue;
      const bool was_outside = (track[j - 1].pos - center).norm() >= params.radius;
      const bool is_inside = (track[j].pos - center).norm() < params.radius;
      if (!was_outside || !is_inside) continue;
      if (track[j + kPredLen].frame - track[j].frame != kPredLen * fstep) continue;

      const Vec2 d = track[j].pos - track[j - 1].pos;
      const double speed = d.norm() / scene.dt;
      const double dir = heading(d);
      if (stationary) {
        if (speed >= kStationarySpeed) continue;
      } else {
        if (std::abs(speed - v_target) / v_target > params.speed_tol) continue;
        if (angle_between(dir, dir_target) > params.angle_tol) continue;
      }

      FutureSegment seg;
      seg.ped_id = ped;
      seg.crossing_frame = track[j].frame;
      seg.origin = track[j].pos;
      for (int t = 0; t < kPredLen; ++t) seg.positions[t] = track[j + 1 + t].pos;
      seg.speed = speed;
      seg.direction = dir;
      out.push_back(seg);
    }
  }
  return out;
}

FuturePath local_positions(const FutureSegment& segment) {
  FuturePath out;
  for (int t = 0; t < kPredLen; ++t) out[t] = segment.positions[t] - segment.origin;
  return out;
}

}  // namespace pccs
