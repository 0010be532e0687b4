#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "pccs/trajectory.hpp"

namespace pccs {

struct Branch {
  double turn = 0.0;          // total heading change after the junction, radians
  double prior = 1.0;         // share of pedestrians taking this branch
  double speed_factor = 1.0;  // future speed relative to the approach speed
};

// Pedestrians approach a junction along a common heading and leave along one of
// the branches. Every scene holds `peds_per_scene` tracks of exactly kWindowLen
// frames; branch counts per scene follow the priors exactly (largest remainder).
struct JunctionOptions {
  int scenes = 100;
  int peds_per_scene = 30;
  std::vector<Branch> branches;
  double speed = 1.2;         // m/s
  double speed_jitter = 0.0;  // uniform +- around speed
  double noise = 0.01;        // gaussian position noise, meters
  double heading_jitter = 0.0;  // uniform +- rotation of each scene, radians
  int turn_steps = 4;         // frames over which the heading change is spread
  std::uint64_t seed = 1;
};

// Straight / left / right with priors 0.5 / 0.3 / 0.2.
JunctionOptions three_branch_junction();
// Five branches from hard right to hard left (priors .15/.2/.3/.2/.15), +-0.2 m/s
// speed jitter and 3 cm noise.
JunctionOptions five_branch_junction();

struct SyntheticData {
  std::vector<TrajectoryScene> scenes;
  // (scene_id, ped_id) -> branch index
  std::map<std::pair<std::string, std::int64_t>, int> branch;
};

SyntheticData generate_junction(const JunctionOptions& options);

}  // namespace pccs
