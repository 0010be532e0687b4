#include "pccs/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "pccs/tensor.hpp"

namespace pccs {

JunctionOptions three_branch_junction() {
  JunctionOptions o;
  o.branches = {{0.0, 0.5, 1.0},
                {std::numbers::pi / 2, 0.3, 1.0},
                {-std::numbers::pi / 2, 0.2, 1.0}};
  return o;
}

JunctionOptions five_branch_junction() {
  constexpr double q = std::numbers::pi / 4.0;
  JunctionOptions o;
  o.branches = {{-2 * q, 0.15, 1.0}, {-q, 0.2, 1.0}, {0.0, 0.3, 1.0}, {q, 0.2, 1.0}, {2 * q, 0.15, 1.0}};
  o.speed_jitter = 0.2;
  o.noise = 0.03;
  return o;
}

namespace {

std::vector<int> branch_counts(const std::vector<Branch>& branches, int n) {
  double total = 0.0;
  for (const auto& b : branches) total += b.prior;
  std::vector<int> counts(branches.size());
  std::vector<std::pair<double, std::size_t>> rest;
  int used = 0;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const double exact = n * branches[i].prior / total;
    counts[i] = static_cast<int>(std::floor(exact));
    used += counts[i];
    rest.push_back({exact - counts[i], i});
  }
  std::stable_sort(rest.begin(), rest.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < n; ++i, ++used) ++counts[rest[i % rest.size()].second];
  return counts;
}

}  // namespace

SyntheticData generate_junction(const JunctionOptions& o) {
  if (o.branches.empty()) throw std::invalid_argument("junction: no branches");
  if (o.scenes < 1 || o.peds_per_scene < 1) throw std::invalid_argument("junction: empty layout");
  Rng rng(o.seed);
  SyntheticData out;
  const std::vector<int> counts = branch_counts(o.branches, o.peds_per_scene);

  for (int s = 0; s < o.scenes; ++s) {
    TrajectoryScene scene;
    char name[32];
    std::snprintf(name, sizeof name, "junction_%03d", s);
    scene.scene_id = name;
    scene.frame_step = 10;
    scene.dt = kFrameDt;

    std::vector<int> labels;
    for (std::size_t b = 0; b < counts.size(); ++b) labels.insert(labels.end(), counts[b], static_cast<int>(b));
    rng.shuffle(labels);

    const double base = o.heading_jitter > 0.0 ? rng.uniform(-o.heading_jitter, o.heading_jitter) : 0.0;
    const Vec2 center(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
    for (int p = 0; p < o.peds_per_scene; ++p) {
      const Branch& br = o.branches[static_cast<std::size_t>(labels[static_cast<std::size_t>(p)])];
      const double speed = o.speed + (o.speed_jitter > 0.0 ? rng.uniform(-o.speed_jitter, o.speed_jitter) : 0.0);
      const double step = speed * kFrameDt;
      std::array<Vec2, kWindowLen> path;
      path[kObsLen - 1] = center;
      const Vec2 dir(std::cos(base), std::sin(base));
      for (int t = kObsLen - 2; t >= 0; --t) path[t] = path[t + 1] - step * dir;
      for (int j = 1; j <= kPredLen; ++j) {
        const double frac = std::min(1.0, static_cast<double>(j) / o.turn_steps);
        const double h = base + br.turn * frac;
        path[kObsLen - 1 + j] =
            path[kObsLen - 2 + j] + step * br.speed_factor * Vec2(std::cos(h), std::sin(h));
      }
      const std::int64_t ped = p + 1;
      const std::int64_t start = static_cast<std::int64_t>(p) * 3 * scene.frame_step;
      auto& track = scene.tracks[ped];
      for (int t = 0; t < kWindowLen; ++t) {
        Vec2 pos = path[t];
        if (o.noise > 0.0) pos += o.noise * Vec2(rng.normal(), rng.normal());
        track.push_back({start + t * scene.frame_step, pos});
      }
      out.branch[{scene.scene_id, ped}] = labels[static_cast<std::size_t>(p)];
    }
    out.scenes.push_back(std::move(scene));
  }
  return out;
}

}  // namespace pccs
