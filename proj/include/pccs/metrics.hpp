#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pccs/predictor.hpp"
#include "pccs/trajectory.hpp"

namespace pccs {

double ade(std::span<const Vec2> predicted, std::span<const Vec2> truth);
double fde(std::span<const Vec2> predicted, std::span<const Vec2> truth);

// Best entry among the first k of `predictions` (all of them when k is 0).
double min_ade_k(const PredictionSet& predictions, std::span<const Vec2> truth, int k = 0);
double min_fde_k(const PredictionSet& predictions, std::span<const Vec2> truth, int k = 0);

// Repeats the last observed displacement for kPredLen steps.
FuturePath constant_velocity_baseline(const ObsPath& observed);

struct SampleMetrics {
  std::string scene_id;
  std::int64_t ped_id = 0;
  std::int64_t start_frame = 0;
  double ade = 0.0;  // top-1 entry
  double fde = 0.0;
  double min_ade = 0.0;  // best of k
  double min_fde = 0.0;
  double cv_ade = 0.0;
  double cv_fde = 0.0;
};

struct MetricsReport {
  std::string dataset;
  int k = 0;
  std::vector<SampleMetrics> samples;
  SampleMetrics mean;  // aggregate over samples
  double runtime_seconds = 0.0;

  std::size_t count() const { return samples.size(); }
  // Header, one row per sample, final "mean" row. No runtime column.
  void write_csv(std::ostream& out) const;
  // e.g. "zara1 k=20 n=100 PCCS minADE/minFDE 0.21/0.42 | CV ADE/FDE 0.54/1.17 (3.2 s)"
  std::string summary() const;
};

MetricsReport evaluate(const ModelBundle& model, std::span<const TrackWindow> windows, int k = 20,
                       const std::string& dataset = "");

}  // namespace pccs
