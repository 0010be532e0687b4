#pragma once

#include <string>
#include <vector>

#include "pccs/tensor.hpp"

namespace pccs {

enum class Activation { Identity, Tanh, Sigmoid };

Tensor2 activate(const Tensor2& x, Activation act);
// Derivative of the activation expressed through its output y = act(x).
Tensor2 activation_grad_from_output(const Tensor2& y, Activation act);

// ---------------------------------------------------------------------------
// Affine: out = x * W + b, b broadcast over rows.

struct AffineGrad {
  Tensor2 dx;
  Tensor2 dw;
  Tensor2 db;
};

Tensor2 affine(const Tensor2& x, const Tensor2& w, const Tensor2& b);
AffineGrad affine_backward(const Tensor2& x, const Tensor2& w, const Tensor2& dout);

// Affine layer bound to the entries `<prefix>.w` and `<prefix>.b` of a ParamSet.
class Affine {
 public:
  Affine() = default;
  Affine(std::string prefix, Index in, Index out);

  void declare(ParamSet& ps, Rng& rng) const;
  Tensor2 forward(const ParamSet& ps, const Tensor2& x) const;
  // Accumulates weight gradients into `ps` and returns d(loss)/dx.
  Tensor2 backward(ParamSet& ps, const Tensor2& x, const Tensor2& dout) const;

  Index in() const { return in_; }
  Index out() const { return out_; }

 private:
  std::string w_;
  std::string b_;
  Index in_ = 0;
  Index out_ = 0;
};

// ---------------------------------------------------------------------------
// LSTM. Gate layout along the 4*hidden axis is [input, forget, candidate, output].
// Weights are a single (in + hidden) x 4*hidden matrix: rows [0, in) act on x_t,
// rows [in, in + hidden) on h_{t-1}.

struct LstmState {
  Tensor2 h;
  Tensor2 c;
};

struct LstmStepCache {
  Tensor2 x;
  Tensor2 h_prev;
  Tensor2 c_prev;
  Tensor2 i, f, g, o;
  Tensor2 tanh_c;
};

struct LstmStepGrad {
  Tensor2 dx;
  Tensor2 dh_prev;
  Tensor2 dc_prev;
};

class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(std::string prefix, Index in, Index hidden);

  // Uniform init with fan_in = in + hidden; forget-gate bias set to 1.
  void declare(ParamSet& ps, Rng& rng) const;

  LstmState zero_state(Index batch) const;
  LstmState step(const ParamSet& ps, const Tensor2& x, const LstmState& prev,
                 LstmStepCache* cache = nullptr) const;
  LstmStepGrad step_backward(ParamSet& ps, const LstmStepCache& cache, const Tensor2& dh,
                             const Tensor2& dc) const;

  Index in() const { return in_; }
  Index hidden() const { return hidden_; }

 private:
  std::string w_;
  std::string b_;
  Index in_ = 0;
  Index hidden_ = 0;
};

struct LstmTrace {
  std::vector<LstmStepCache> steps;
  LstmState final_state;
};

// Runs a cell over a sequence of (batch x in) inputs.
LstmTrace lstm_run(const LstmCell& cell, const ParamSet& ps, const std::vector<Tensor2>& xs,
                   const LstmState& init);

struct LstmSequenceGrad {
  std::vector<Tensor2> dxs;
  Tensor2 dh0;
  Tensor2 dc0;
};

// Backprop through time given a gradient on the final hidden state only.
LstmSequenceGrad lstm_backward_final(const LstmCell& cell, ParamSet& ps, const LstmTrace& trace,
                                     const Tensor2& dh_final);

// ---------------------------------------------------------------------------
// Bidirectional encoder: a forward-direction and a backward-direction LSTM whose
// final hidden states are averaged element-wise.

class BiLstmEncoder {
 public:
  BiLstmEncoder() = default;
  BiLstmEncoder(const std::string& prefix, Index in, Index hidden);

  struct Trace {
    LstmTrace fw;
    LstmTrace bw;
  };

  void declare(ParamSet& ps, Rng& rng) const;
  Tensor2 forward(const ParamSet& ps, const std::vector<Tensor2>& xs, Trace* trace = nullptr) const;
  std::vector<Tensor2> backward(ParamSet& ps, const Trace& trace, const Tensor2& dout) const;

  const LstmCell& forward_cell() const { return fw_; }
  const LstmCell& backward_cell() const { return bw_; }
  Index hidden() const { return fw_.hidden(); }

 private:
  LstmCell fw_;
  LstmCell bw_;
};

// ---------------------------------------------------------------------------
// MLP: affine -> activation repeated, last layer linear.

class Mlp {
 public:
  Mlp() = default;
  // widths = {in, h1, ..., out}; widths.size() - 1 layers named `<prefix>.l<i>`.
  Mlp(const std::string& prefix, const std::vector<Index>& widths, Activation act);

  struct Trace {
    std::vector<Tensor2> inputs;  // input of each layer
  };

  void declare(ParamSet& ps, Rng& rng) const;
  Tensor2 forward(const ParamSet& ps, const Tensor2& x, Trace* trace = nullptr) const;
  Tensor2 backward(ParamSet& ps, const Trace& trace, const Tensor2& dout) const;

  Index in() const { return layers_.front().in(); }
  Index out() const { return layers_.back().out(); }

 private:
  std::vector<Affine> layers_;
  Activation act_ = Activation::Tanh;
};

// ---------------------------------------------------------------------------

// Row-wise softmax with max subtraction.
Tensor2 softmax(const Tensor2& logits);

struct LossGrad {
  double loss = 0.0;
  Tensor2 grad;
};

// Soft-target cross entropy averaged over rows; grad = (softmax - target) / rows.
// Each target row must be non-negative and sum to 1 within 1e-9.
LossGrad softmax_cross_entropy(const Tensor2& logits, const Tensor2& targets);

}  // namespace pccs
