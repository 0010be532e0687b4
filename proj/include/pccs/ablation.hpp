#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pccs/config.hpp"
#include "pccs/metrics.hpp"
#include "pccs/pipeline.hpp"

namespace pccs {

struct AblationPoint {
  std::string value;  // grid label, e.g. "200" or "1:3"
  TrainConfig config;
};

// Axes: deep, K, weights, loss, synthesis. An empty grid selects the default one:
//   deep       deep,raw
//   K          100,200,500,1000
//   weights    1:3,1:2,1:1,2:1,3:1        (w_H : w_F, normalised to sum 1)
//   loss       0:0:0,1:0.1:0.1pi         (r : dv : dtheta; "pi" suffix allowed)
//   synthesis  on,off
// Throws ConfigError on an unknown axis or a malformed grid.
std::vector<AblationPoint> ablation_grid(const std::string& axis, const std::string& grid,
                                         const TrainConfig& base);

struct AblationResult {
  AblationPoint point;
  bool ok = false;
  std::string error;
  SampleMetrics mean;
};

// Trains and evaluates every point with the shared seed; a failing point is
// recorded and the sweep continues.
std::vector<AblationResult> run_ablation(const std::string& axis,
                                         const std::vector<AblationPoint>& points,
                                         std::span<const TrackWindow> train,
                                         std::span<const TrackWindow> test,
                                         const SceneIndex& scenes, const ProgressFn& progress = {});

void write_ablation_csv(std::ostream& out, const std::string& axis,
                        const std::vector<AblationResult>& results);

}  // namespace pccs
