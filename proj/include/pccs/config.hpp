#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "pccs/qualified_paths.hpp"

namespace pccs {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class ClusterSpace { Deep, Raw };

// Everything that determines a trained model. Defaults: K = 200, w_H = w_F = 0.5,
// r = 1 m, 10% speed and 0.1*pi direction tolerance, top-20 evaluation.
struct TrainConfig {
  int k_clusters = 200;
  double w_h = 0.5;
  double w_f = 0.5;
  QualifyParams qualify;
  int top_k = 20;

  int epochs_pretrain = 50;
  int epochs_classifier = 50;
  int epochs_synthesis = 50;
  int batch_size = 64;
  double learning_rate = 1e-3;
  int patience = 5;
  double val_fraction = 0.1;
  int kmeans_max_iterations = 300;

  // Ablation switches.
  ClusterSpace cluster_space = ClusterSpace::Deep;
  bool use_synthesis = true;

  std::uint64_t seed = 1;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
};

using KeyValues = std::map<std::string, std::string>;

// Flat "key=value" lines; blank lines and '#' comments ignored.
KeyValues parse_key_values(const std::string& text);
std::string format_key_values(const KeyValues& kv);

// Config keys use the CLI flag spelling: k-clusters, wh, wf, radius, dv, dtheta,
// topk, seed, epochs-stage1..3, batch-size, lr, patience, val-fraction,
// kmeans-max-iter, cluster-space (deep|raw), synthesis (on|off).
KeyValues to_key_values(const TrainConfig& config);
// Applies recognised keys on top of `base`; unknown keys throw ConfigError.
TrainConfig apply_key_values(TrainConfig base, const KeyValues& kv);

// Command-level settings on top of the model configuration.
struct RunConfig {
  std::filesystem::path data_dir;
  std::string holdout;
  std::filesystem::path out_dir = "out";
  TrainConfig train;

  void validate() const { train.validate(); }
};

RunConfig apply_run_key_values(RunConfig base, const KeyValues& kv);

}  // namespace pccs
