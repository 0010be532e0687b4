#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "pccs/tensor.hpp"

namespace pccs {

// A loss over a ParamSet. Returns the loss; with `backward` set it also accumulates
// the analytic gradient into the (already zeroed) grad entries.
using LossFn = std::function<double(ParamSet&, bool backward)>;

struct GradCheckOptions {
  double step = 1e-5;
  // Above this many entries a fixed random subsample of this size is checked.
  std::size_t max_entries = 10000;
  std::uint64_t seed = 7;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  Index worst_index = -1;
  std::size_t checked = 0;
};

// Central-difference check of every parameter entry.
// relative error = |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
GradCheckResult grad_check(ParamSet& params, const LossFn& loss_fn,
                           const GradCheckOptions& options = {});

}  // namespace pccs
