#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "pccs/trajectory.hpp"

namespace pccs {

// One row of the predictions CSV.
struct PredictionRow {
  std::string scene_id;
  std::int64_t ped_id = 0;
  std::int64_t obs_end_frame = 0;  // frame of the last observed position
  int rank = 0;                    // 1-based
  double probability = 0.0;
  FuturePath trajectory;
};

void write_predictions_csv(std::ostream& out, const std::vector<PredictionRow>& rows);
// Throws std::runtime_error with the offending line number on malformed input.
std::vector<PredictionRow> read_predictions_csv(std::istream& in);

// Observed path, ground truth (may be empty) and ranked predictions as one SVG.
// Prediction opacity scales with probability.
std::string render_svg(const std::vector<Vec2>& observed, const std::vector<Vec2>& truth,
                       const std::vector<PredictionRow>& predictions);

}  // namespace pccs
