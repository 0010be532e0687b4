#include "pccs/trajectory.hpp"

#include <stdexcept>

namespace pccs {

std::size_t TrajectoryScene::num_points() const {
  std::size_t n = 0;
  for (const auto& [id, track] : tracks) n += track.size();
  return n;
}

std::vector<TrackWindow> window_tracks(const TrajectoryScene& scene, int stride) {
  if (stride < 1) throw std::invalid_argument("window_tracks: stride must be >= 1");
  std::vector<TrackWindow> windows;
  for (const auto& [ped, track] : scene.tracks) {
    std::size_t run_begin = 0;
    for (std::size_t i = 1; i <= track.size(); ++i) {
      const bool breaks =
          i == track.size() || track[i].frame - track[i - 1].frame != scene.frame_step;
      if (!breaks) continue;
      const std::size_t run_len = i - run_begin;
      for (std::size_t s = run_begin; s + kWindowLen <= run_begin + run_len;
           s += static_cast<std::size_t>(stride)) {
        TrackWindow w;
        w.scene_id = scene.scene_id;
        w.ped_id = ped;
        w.start_frame = track[s].frame;
        for (int t = 0; t < kObsLen; ++t) w.obs[t] = track[s + t].pos;
        for (int t = 0; t < kPredLen; ++t) w.fut[t] = track[s + kObsLen + t].pos;
        windows.push_back(std::move(w));
      }
      run_begin = i;
    }
  }
  return windows;
}

std::pair<TrackWindow, NormTransform> normalize(const TrackWindow& window) {
  NormTransform transform{window.obs[kObsLen - 1]};
  TrackWindow out = window;
  for (auto& p : out.obs) p = transform.to_local(p);
  for (auto& p : out.fut) p = transform.to_local(p);
  return {std::move(out), transform};
}

TrackWindow denormalize(const TrackWindow& window, const NormTransform& transform) {
  TrackWindow out = window;
  for (auto& p : out.obs) p = transform.to_world(p);
  for (auto& p : out.fut) p = transform.to_world(p);
  return out;
}

Split leave_one_out_split(const DatasetWindows& windows, const std::string& holdout) {
  if (windows.find(holdout) == windows.end())
    throw std::invalid_argument("unknown holdout dataset: " + holdout);
  Split split;
  for (const auto& [name, ws] : windows) {
    auto& dst = name == holdout ? split.test : split.train;
    dst.insert(dst.end(), ws.begin(), ws.end());
  }
  if (split.train.empty())
    throw std::invalid_argument("leave-one-out split with holdout '" + holdout +
                                "' leaves an empty training set");
  return split;
}

}  // namespace pccs
