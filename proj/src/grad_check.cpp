#include "pccs/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace pccs {

namespace {

double checked_loss(ParamSet& params, const LossFn& loss_fn, bool backward) {
  if (backward) params.zero_grad();
  const double loss = loss_fn(params, backward);
  if (!std::isfinite(loss)) throw NumericError("grad_check: non-finite loss");
  return loss;
}

}  // namespace

GradCheckResult grad_check(ParamSet& params, const LossFn& loss_fn,
                           const GradCheckOptions& options) {
  checked_loss(params, loss_fn, true);
  std::vector<std::pair<std::string, Tensor2>> analytic;
  for (const auto& [name, p] : params) analytic.emplace_back(name, p.grad);

  // (entry-list index, flat index)
  std::vector<std::pair<std::size_t, Index>> targets;
  for (std::size_t e = 0; e < analytic.size(); ++e) {
    for (Index k = 0; k < analytic[e].second.size(); ++k) targets.emplace_back(e, k);
  }
  if (targets.size() > options.max_entries) {
    Rng rng(options.seed);
    rng.shuffle(targets);
    targets.resize(options.max_entries);
    std::sort(targets.begin(), targets.end());
  }

  GradCheckResult result;
  for (const auto& [e, k] : targets) {
    const std::string& name = analytic[e].first;
    double& value = params.at(name).value.data()[k];
    const double saved = value;
    value = saved + options.step;
    const double plus = checked_loss(params, loss_fn, false);
    value = saved - options.step;
    const double minus = checked_loss(params, loss_fn, false);
    value = saved;

    const double numeric = (plus - minus) / (2.0 * options.step);
    const double a = analytic[e].second.data()[k];
    const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    ++result.checked;
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_param = name;
      result.worst_index = k;
    }
  }
  // leave the analytic gradient in place for the caller
  checked_loss(params, loss_fn, true);
  return result;
}

}  // namespace pccs
