#include "pccs/modality.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace pccs {

double weighted_distance(const FeaturePair& a, const FeaturePair& b, double w_h, double w_f) {
  return w_h * (a.h - b.h).norm() + w_f * (a.f - b.f).norm();
}

namespace {

double distance_to(const FeaturePair& x, const Modality& m, double w_h, double w_f) {
  return w_h * (x.h - m.center_h).norm() + w_f * (x.f - m.center_f).norm();
}

// Sum of Euclidean distances from the selected rows to c.
template <typename Get>
double block_cost(const std::vector<std::size_t>& members, Get get, const Vector& c) {
  double s = 0.0;
  for (std::size_t i : members) s += (get(i) - c).norm();
  return s;
}

// Weiszfeld steps towards the geometric median of the members; only strict
// improvements are accepted.
template <typename Get>
Vector improve_median(const std::vector<std::size_t>& members, Get get, const Vector& c) {
  Vector best = c;
  double best_cost = block_cost(members, get, best);

  Vector mean = Vector::Zero(c.size());
  for (std::size_t i : members) mean += get(i);
  mean /= static_cast<double>(members.size());
  const double mean_cost = block_cost(members, get, mean);
  if (mean_cost < best_cost) {
    best = std::move(mean);
    best_cost = mean_cost;
  }

  constexpr int kMaxSteps = 50;
  for (int step = 0; step < kMaxSteps; ++step) {
    Vector num = Vector::Zero(c.size());
    double den = 0.0;
    for (std::size_t i : members) {
      const double d = (get(i) - best).norm();
      if (d < 1e-12) continue;
      num += get(i) / d;
      den += 1.0 / d;
    }
    if (den == 0.0) break;
    Vector candidate = num / den;
    const double cost = block_cost(members, get, candidate);
    if (!(cost < best_cost)) break;
    const double gain = best_cost - cost;
    best = std::move(candidate);
    best_cost = cost;
    if (gain <= 1e-13 * std::max(1.0, best_cost)) break;
  }
  return best;
}

std::vector<int> assign_all(std::span<const FeaturePair> features, const ModalitySet& set) {
  std::vector<int> labels(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) labels[i] = assign(features[i], set);
  return labels;
}

}  // namespace

int assign(const FeaturePair& feature, const ModalitySet& set) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& m : set.modalities) {
    const double d = distance_to(feature, m, set.w_h, set.w_f);
    if (d < best_d) {
      best_d = d;
      best = m.id;
    }
  }
  return best;
}

double clustering_objective(std::span<const FeaturePair> features, std::span<const int> labels,
                            const ModalitySet& set) {
  double s = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i)
    s += distance_to(features[i], set.modalities[static_cast<std::size_t>(labels[i])], set.w_h,
                     set.w_f);
  return s;
}

FitResult fit_modalities(std::span<const FeaturePair> features, const FitOptions& options) {
  const std::size_t n = features.size();
  if (options.k < 1) throw ConfigError("cluster count must be >= 1");
  if (!(options.w_h > 0.0) || !(options.w_f > 0.0))
    throw ConfigError("clustering weights must be positive");
  if (n < static_cast<std::size_t>(options.k))
    throw ConfigError("need at least K=" + std::to_string(options.k) + " samples, got " +
                      std::to_string(n));
  const auto k = static_cast<std::size_t>(options.k);

  FitResult result;
  ModalitySet& set = result.set;
  set.w_h = options.w_h;
  set.w_f = options.w_f;

  // Greedy farthest-point seeding.
  Rng rng(options.seed);
  std::vector<bool> chosen(n, false);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::size_t next = static_cast<std::size_t>(rng.below(n));
  for (std::size_t c = 0; c < k; ++c) {
    chosen[next] = true;
    set.modalities.push_back({static_cast<int>(c), features[next].h, features[next].f, 0});
    double far = -1.0;
    std::size_t far_idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      min_dist[i] = std::min(min_dist[i], weighted_distance(features[i], features[next],
                                                            options.w_h, options.w_f));
      if (!chosen[i] && min_dist[i] > far) {
        far = min_dist[i];
        far_idx = i;
      }
    }
    next = far_idx;
  }

  std::vector<int> labels;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    std::vector<int> fresh = assign_all(features, set);
    result.objective.push_back(clustering_objective(features, fresh, set));
    result.iterations = iter + 1;
    if (fresh == labels) {
      result.converged = true;
      break;
    }
    labels = std::move(fresh);

    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
    for (std::size_t c = 0; c < k; ++c) {
      if (members[c].empty()) continue;
      Modality& m = set.modalities[c];
      m.center_h = improve_median(members[c], [&](std::size_t i) -> const Vector& {
        return features[i].h;
      }, m.center_h);
      m.center_f = improve_median(members[c], [&](std::size_t i) -> const Vector& {
        return features[i].f;
      }, m.center_f);
    }

    // Empty clusters take the samples currently worst served by their own center.
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i)
      residual[i] = distance_to(features[i], set.modalities[static_cast<std::size_t>(labels[i])],
                                set.w_h, set.w_f);
    for (std::size_t c = 0; c < k; ++c) {
      if (!members[c].empty()) continue;
      const auto far = static_cast<std::size_t>(
          std::max_element(residual.begin(), residual.end()) - residual.begin());
      set.modalities[c].center_h = features[far].h;
      set.modalities[c].center_f = features[far].f;
      residual[far] = -1.0;
    }
  }
  if (!result.converged) labels = assign_all(features, set);

  for (auto& m : set.modalities) m.member_count = 0;
  for (int l : labels) ++set.modalities[static_cast<std::size_t>(l)].member_count;
  result.labels = std::move(labels);
  return result;
}

PseudoTarget pseudo_distribution(const Vector& target_rh, std::span<const Vector> segment_rf,
                                 const ModalitySet& set) {
  if (segment_rf.empty()) throw std::invalid_argument("pseudo_distribution: no segments");
  PseudoTarget out;
  out.n = static_cast<int>(segment_rf.size());
  out.counts.assign(static_cast<std::size_t>(set.k()), 0);
  for (const auto& rf : segment_rf) ++out.counts[static_cast<std::size_t>(assign({target_rh, rf}, set))];
  out.distribution.resize(out.counts.size());
  for (std::size_t j = 0; j < out.counts.size(); ++j)
    out.distribution[j] = static_cast<double>(out.counts[j]) / static_cast<double>(out.n);
  return out;
}

PseudoTarget pseudo_distribution(const Vector& target_rh, std::span<const FutureSegment> segments,
                                 const ModalitySet& set, const EncoderBundle& encoders) {
  if (segments.empty()) throw std::invalid_argument("pseudo_distribution: no segments");
  std::vector<Vector> rf;
  rf.reserve(segments.size());
  for (const auto& s : segments) rf.push_back(encoders.encode_future(local_positions(s)));
  return pseudo_distribution(target_rh, rf, set);
}

}  // namespace pccs
