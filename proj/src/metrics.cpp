#include "pccs/metrics.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace pccs {

namespace {

void check_lengths(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.size() != b.size()) throw std::invalid_argument("trajectory lengths differ");
  if (a.empty()) throw std::invalid_argument("empty trajectory");
}

template <typename Fn>
double best_of(const PredictionSet& predictions, int k, Fn metric) {
  if (predictions.entries.empty()) throw std::invalid_argument("empty prediction set");
  if (k < 0) throw std::invalid_argument("k must be >= 1");
  if (static_cast<std::size_t>(k) > predictions.entries.size())
    throw std::invalid_argument("k exceeds the number of predictions");
  const std::size_t n = k == 0 ? predictions.entries.size() : static_cast<std::size_t>(k);
  double best = metric(predictions.entries[0]);
  for (std::size_t i = 1; i < n; ++i) best = std::min(best, metric(predictions.entries[i]));
  return best;
}

}  // namespace

double ade(std::span<const Vec2> predicted, std::span<const Vec2> truth) {
  check_lengths(predicted, truth);
  double sum = 0.0;
  for (std::size_t t = 0; t < predicted.size(); ++t) sum += (predicted[t] - truth[t]).norm();
  return sum / static_cast<double>(predicted.size());
}

double fde(std::span<const Vec2> predicted, std::span<const Vec2> truth) {
  check_lengths(predicted, truth);
  return (predicted.back() - truth.back()).norm();
}

double min_ade_k(const PredictionSet& predictions, std::span<const Vec2> truth, int k) {
  return best_of(predictions, k, [&](const Prediction& p) { return ade(p.trajectory, truth); });
}

double min_fde_k(const PredictionSet& predictions, std::span<const Vec2> truth, int k) {
  return best_of(predictions, k, [&](const Prediction& p) { return fde(p.trajectory, truth); });
}

FuturePath constant_velocity_baseline(const ObsPath& observed) {
  const Vec2 step = observed[kObsLen - 1] - observed[kObsLen - 2];
  FuturePath out;
  for (int t = 0; t < kPredLen; ++t) out[t] = observed[kObsLen - 1] + (t + 1) * step;
  return out;
}

MetricsReport evaluate(const ModelBundle& model, std::span<const TrackWindow> windows, int k,
                       const std::string& dataset) {
  const auto started = std::chrono::steady_clock::now();
  MetricsReport report;
  report.dataset = dataset;
  report.k = k;
  report.samples.reserve(windows.size());
  for (const auto& w : windows) {
    const PredictionSet ps = predict_topk(w.obs, k, model);
    const FuturePath cv = constant_velocity_baseline(w.obs);
    SampleMetrics s;
    s.scene_id = w.scene_id;
    s.ped_id = w.ped_id;
    s.start_frame = w.start_frame;
    s.ade = ade(ps.entries[0].trajectory, w.fut);
    s.fde = fde(ps.entries[0].trajectory, w.fut);
    s.min_ade = min_ade_k(ps, w.fut);
    s.min_fde = min_fde_k(ps, w.fut);
    s.cv_ade = ade(cv, w.fut);
    s.cv_fde = fde(cv, w.fut);
    report.samples.push_back(std::move(s));
  }
  if (!report.samples.empty()) {
    SampleMetrics& m = report.mean;
    for (const auto& s : report.samples) {
      m.ade += s.ade;
      m.fde += s.fde;
      m.min_ade += s.min_ade;
      m.min_fde += s.min_fde;
      m.cv_ade += s.cv_ade;
      m.cv_fde += s.cv_fde;
    }
    const double n = static_cast<double>(report.samples.size());
    m.ade /= n;
    m.fde /= n;
    m.min_ade /= n;
    m.min_fde /= n;
    m.cv_ade /= n;
    m.cv_fde /= n;
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

void MetricsReport::write_csv(std::ostream& out) const {
  out << "scene,ped_id,start_frame,ade,fde,min_ade_k,min_fde_k,cv_ade,cv_fde,k\n";
  char buf[512];
  auto row = [&](const std::string& scene, const std::string& ped, const std::string& frame,
                 const SampleMetrics& s) {
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                  scene.c_str(), ped.c_str(), frame.c_str(), s.ade, s.fde, s.min_ade, s.min_fde,
                  s.cv_ade, s.cv_fde, k);
    out << buf;
  };
  for (const auto& s : samples)
    row(s.scene_id, std::to_string(s.ped_id), std::to_string(s.start_frame), s);
  row("mean", "", std::to_string(samples.size()), mean);
}

std::string MetricsReport::summary() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%s k=%d n=%zu PCCS minADE/minFDE %.2f/%.2f (top-1 %.2f/%.2f) | CV ADE/FDE "
                "%.2f/%.2f (%.1f s)",
                dataset.empty() ? "test" : dataset.c_str(), k, samples.size(), mean.min_ade,
                mean.min_fde, mean.ade, mean.fde, mean.cv_ade, mean.cv_fde, runtime_seconds);
  return buf;
}

}  // namespace pccs
