#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pccs/config.hpp"
#include "pccs/qualified_paths.hpp"
#include "pccs/representation.hpp"
#include "pccs/tensor.hpp"

namespace pccs {

// Historical and future feature blocks of one sample (R_H, R_F for deep features).
struct FeaturePair {
  Vector h;
  Vector f;
};

struct Modality {
  int id = 0;
  Vector center_h;
  Vector center_f;
  std::size_t member_count = 0;
};

struct ModalitySet {
  std::vector<Modality> modalities;
  double w_h = 0.5;
  double w_f = 0.5;

  int k() const { return static_cast<int>(modalities.size()); }
};

// w_h * ||a.h - b.h|| + w_f * ||a.f - b.f||  (plain, not squared, norms).
double weighted_distance(const FeaturePair& a, const FeaturePair& b, double w_h, double w_f);

struct FitOptions {
  int k = 200;
  double w_h = 0.5;
  double w_f = 0.5;
  std::uint64_t seed = 1;
  int max_iterations = 300;
};

struct FitResult {
  ModalitySet set;
  std::vector<int> labels;
  // Sum of member-to-center weighted distances after each assignment step.
  std::vector<double> objective;
  int iterations = 0;
  bool converged = false;
};

// Alternating minimisation of the summed weighted distance: assign every sample to
// its nearest center, then move each center to the per-block geometric median of
// its members. Seeded by greedy farthest-point selection; empty clusters are
// re-seeded at the sample farthest from its center. Stops once assignments repeat
// or after max_iterations.
FitResult fit_modalities(std::span<const FeaturePair> features, const FitOptions& options);

// Nearest modality by weighted_distance, ties to the lowest id.
int assign(const FeaturePair& feature, const ModalitySet& set);

double clustering_objective(std::span<const FeaturePair> features, std::span<const int> labels,
                            const ModalitySet& set);

struct PseudoTarget {
  std::vector<double> distribution;  // K entries, multiples of 1/n
  std::vector<int> counts;
  int n = 0;
};

// Pseudo distribution from pre-encoded segment futures: each segment is assigned
// through [target R_H, R_F(segment)].
PseudoTarget pseudo_distribution(const Vector& target_rh, std::span<const Vector> segment_rf,
                                 const ModalitySet& set);

// Encodes every segment's future (relative to its crossing point) with the future
// encoder before assignment.
PseudoTarget pseudo_distribution(const Vector& target_rh, std::span<const FutureSegment> segments,
                                 const ModalitySet& set, const EncoderBundle& encoders);

}  // namespace pccs
