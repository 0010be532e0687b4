#pragma once

#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pccs/config.hpp"
#include "pccs/modality.hpp"
#include "pccs/predictor.hpp"
#include "pccs/scene_io.hpp"

namespace pccs {

struct StageLoss {
  std::string stage;
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;  // equals train_loss for stages without a hold-out
};

struct TrainingLog {
  std::vector<StageLoss> losses;
  std::vector<double> kmeans_objective;
  int kmeans_iterations = 0;
  // Fit-time cluster label of each training window.
  std::vector<int> labels;
  // Pseudo target of each training window.
  std::vector<PseudoTarget> pseudo_targets;

  void write_csv(std::ostream& out) const;
};

// Scene lookup by scene id, used for the neighbor-path search.
using SceneIndex = std::map<std::string, const TrajectoryScene*>;
SceneIndex index_scenes(const DatasetScenes& scenes);
SceneIndex index_scenes(std::span<const TrajectoryScene> scenes);

struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "': " + what), stage_name(stage) {}
  std::string stage_name;
};

using ProgressFn = std::function<void(const std::string&)>;

// Staged training on world-frame windows:
//   1. pretrain encoders (+ reconstruction decoder)
//   2. cluster [R_H, R_F] of every training window into K modalities
//   3. train the classifier against neighbor-path pseudo distributions
//   4. train synthesizer and decoder (decoder warm-started from stage 1)
// Errors are rethrown as StageError naming the failing stage.
ModelBundle train_full(const TrainConfig& config, std::span<const TrackWindow> train,
                       const SceneIndex& scenes, TrainingLog* log = nullptr,
                       const ProgressFn& progress = {});

// Clustering features of a normalized window for the configured space: deep
// [R_H, R_F], or raw flattened positions (16 + 24 values).
FeaturePair raw_features(const TrackWindow& normalized);

}  // namespace pccs
