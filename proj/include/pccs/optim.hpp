#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "pccs/tensor.hpp"

namespace pccs {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::map<std::string, Tensor2> first_moment;
  std::map<std::string, Tensor2> second_moment;
};

// One bias-corrected adaptive-moment update over every entry of `params`,
// then zeroes the gradients.
void optimizer_step(ParamSet& params, OptimState& state);

}  // namespace pccs
