#include "pccs/decoder.hpp"

#include <cmath>
#include <stdexcept>

namespace pccs {

SequenceDecoder::SequenceDecoder(const std::string& prefix, Index hidden, int steps)
    : cell_(prefix + ".lstm", 2, hidden), head_(prefix + ".head", hidden, 2), steps_(steps) {}

void SequenceDecoder::declare(ParamSet& ps, Rng& rng) const {
  cell_.declare(ps, rng);
  head_.declare(ps, rng);
}

std::vector<Tensor2> SequenceDecoder::forward(const ParamSet& ps, const Tensor2& h0,
                                              const Tensor2& first_input, Trace* trace) const {
  if (h0.cols() != cell_.hidden()) throw DimensionError("decoder: h0 width mismatch");
  if (first_input.cols() != 2 || first_input.rows() != h0.rows())
    throw DimensionError("decoder: first input shape mismatch");
  if (trace != nullptr) {
    trace->steps.assign(static_cast<std::size_t>(steps_), {});
    trace->hidden.clear();
  }
  std::vector<Tensor2> out;
  out.reserve(static_cast<std::size_t>(steps_));
  LstmState state{h0, Tensor2::Zero(h0.rows(), h0.cols())};
  Tensor2 x = first_input;
  for (int t = 0; t < steps_; ++t) {
    state = cell_.step(ps, x, state, trace != nullptr ? &trace->steps[t] : nullptr);
    if (trace != nullptr) trace->hidden.push_back(state.h);
    x = head_.forward(ps, state.h);
    out.push_back(x);
  }
  return out;
}

Tensor2 SequenceDecoder::backward(ParamSet& ps, const Trace& trace,
                                  const std::vector<Tensor2>& d_displacements) const {
  if (d_displacements.size() != static_cast<std::size_t>(steps_))
    throw DimensionError("decoder backward: step count mismatch");
  const Index batch = d_displacements.front().rows();
  Tensor2 dh = Tensor2::Zero(batch, cell_.hidden());
  Tensor2 dc = Tensor2::Zero(batch, cell_.hidden());
  Tensor2 d_next_input = Tensor2::Zero(batch, 2);
  for (int t = steps_; t-- > 0;) {
    // output t is both a prediction and the input of step t+1
    const Tensor2 d_out = d_displacements[t] + d_next_input;
    dh += head_.backward(ps, trace.hidden[t], d_out);
    LstmStepGrad g = cell_.step_backward(ps, trace.steps[t], dh, dc);
    d_next_input = std::move(g.dx);
    dh = std::move(g.dh_prev);
    dc = std::move(g.dc_prev);
  }
  return dh;
}

std::vector<Tensor2> accumulate_positions(const std::vector<Tensor2>& displacements) {
  std::vector<Tensor2> out;
  out.reserve(displacements.size());
  for (std::size_t t = 0; t < displacements.size(); ++t) {
    out.push_back(t == 0 ? displacements[0] : Tensor2(out.back() + displacements[t]));
  }
  return out;
}

std::vector<Tensor2> positions_grad_to_displacements(const std::vector<Tensor2>& d_positions) {
  std::vector<Tensor2> out(d_positions.size());
  for (std::size_t t = d_positions.size(); t-- > 0;) {
    out[t] = t + 1 == d_positions.size() ? d_positions[t] : Tensor2(d_positions[t] + out[t + 1]);
  }
  return out;
}

double exp_l2_loss(const std::vector<Tensor2>& predicted, const std::vector<Tensor2>& truth,
                   std::vector<Tensor2>* grad) {
  if (predicted.size() != truth.size() || predicted.empty())
    throw std::invalid_argument("exp_l2_loss: sequence length mismatch");
  const double steps = static_cast<double>(predicted.size());
  const double batch = static_cast<double>(predicted.front().rows());
  if (grad != nullptr) grad->resize(predicted.size());
  double loss = 0.0;
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    if (predicted[t].rows() != truth[t].rows() || predicted[t].cols() != truth[t].cols())
      throw DimensionError("exp_l2_loss: step shape mismatch");
    const double weight = std::exp(static_cast<double>(t + 1) / steps) / steps;
    const Tensor2 diff = predicted[t] - truth[t];
    loss += weight * diff.squaredNorm();
    if (grad != nullptr) (*grad)[t] = (2.0 * weight / batch) * diff;
  }
  return loss / batch;
}

double exp_l2_loss(std::span<const Vec2> predicted, std::span<const Vec2> truth) {
  if (predicted.size() != truth.size() || predicted.empty())
    throw std::invalid_argument("exp_l2_loss: sequence length mismatch");
  const double steps = static_cast<double>(predicted.size());
  double loss = 0.0;
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    loss += std::exp(static_cast<double>(t + 1) / steps) * (predicted[t] - truth[t]).squaredNorm();
  }
  return loss / steps;
}

std::vector<Tensor2> future_steps(std::span<const FuturePath> paths) {
  std::vector<Tensor2> out(kPredLen, Tensor2(static_cast<Index>(paths.size()), 2));
  for (std::size_t b = 0; b < paths.size(); ++b) {
    for (int t = 0; t < kPredLen; ++t) {
      out[t](static_cast<Index>(b), 0) = paths[b][t].x();
      out[t](static_cast<Index>(b), 1) = paths[b][t].y();
    }
  }
  return out;
}

}  // namespace pccs
