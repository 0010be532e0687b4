#pragma once

#include <span>
#include <string>
#include <vector>

#include "pccs/layers.hpp"
#include "pccs/trajectory.hpp"

namespace pccs {

// Autoregressive LSTM decoder. The initial hidden state is supplied by the caller,
// the initial cell state is zero, and each step consumes the displacement emitted
// by the previous step (the first step consumes the last observed displacement).
class SequenceDecoder {
 public:
  SequenceDecoder() = default;
  SequenceDecoder(const std::string& prefix, Index hidden, int steps = kPredLen);

  struct Trace {
    std::vector<LstmStepCache> steps;
    std::vector<Tensor2> hidden;  // h_t of each step, input to the projection
  };

  void declare(ParamSet& ps, Rng& rng) const;

  // h0: batch x hidden, first_input: batch x 2. Returns one batch x 2 displacement per step.
  std::vector<Tensor2> forward(const ParamSet& ps, const Tensor2& h0, const Tensor2& first_input,
                               Trace* trace = nullptr) const;
  // Gradient on each emitted displacement -> gradient on h0.
  Tensor2 backward(ParamSet& ps, const Trace& trace, const std::vector<Tensor2>& d_displacements) const;

  Index hidden() const { return cell_.hidden(); }
  int steps() const { return steps_; }

 private:
  LstmCell cell_;
  Affine head_;
  int steps_ = kPredLen;
};

// Running sum of per-step displacements starting at the origin.
std::vector<Tensor2> accumulate_positions(const std::vector<Tensor2>& displacements);
// Adjoint of accumulate_positions.
std::vector<Tensor2> positions_grad_to_displacements(const std::vector<Tensor2>& d_positions);

// (1/T) * sum_t exp(t/T) * ||pred_t - truth_t||^2 for t = 1..T, averaged over batch rows.
// `grad` (optional) receives d(loss)/d(pred_t).
double exp_l2_loss(const std::vector<Tensor2>& predicted, const std::vector<Tensor2>& truth,
                   std::vector<Tensor2>* grad = nullptr);

// Single-trajectory form.
double exp_l2_loss(std::span<const Vec2> predicted, std::span<const Vec2> truth);

// Per-step batch tensors (batch x 2) from a list of future paths.
std::vector<Tensor2> future_steps(std::span<const FuturePath> paths);

}  // namespace pccs
