#include "pccs/layers.hpp"

#include <cmath>
#include <sstream>

namespace pccs {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

Tensor2 activate(const Tensor2& x, Activation act) {
  switch (act) {
    case Activation::Identity:
      return x;
    case Activation::Tanh:
      return x.array().tanh().matrix();
    case Activation::Sigmoid:
      return x.unaryExpr([](double v) { return sigmoid(v); });
  }
  return x;
}

Tensor2 activation_grad_from_output(const Tensor2& y, Activation act) {
  switch (act) {
    case Activation::Identity:
      return Tensor2::Ones(y.rows(), y.cols());
    case Activation::Tanh:
      return (1.0 - y.array().square()).matrix();
    case Activation::Sigmoid:
      return (y.array() * (1.0 - y.array())).matrix();
  }
  return y;
}

// ---------------------------------------------------------------------------

Tensor2 affine(const Tensor2& x, const Tensor2& w, const Tensor2& b) {
  if (x.cols() != w.rows()) {
    std::ostringstream os;
    os << "affine: x has " << x.cols() << " columns but W has " << w.rows() << " rows";
    throw DimensionError(os.str());
  }
  if (b.rows() != 1 || b.cols() != w.cols()) throw DimensionError("affine: bias width mismatch");
  Tensor2 out = x * w;
  out.rowwise() += b.row(0);
  return out;
}

AffineGrad affine_backward(const Tensor2& x, const Tensor2& w, const Tensor2& dout) {
  if (dout.cols() != w.cols() || dout.rows() != x.rows())
    throw DimensionError("affine_backward: upstream gradient shape mismatch");
  AffineGrad g;
  g.dx = dout * w.transpose();
  g.dw = x.transpose() * dout;
  g.db = dout.colwise().sum();
  return g;
}

Affine::Affine(std::string prefix, Index in, Index out)
    : w_(prefix + ".w"), b_(prefix + ".b"), in_(in), out_(out) {}

void Affine::declare(ParamSet& ps, Rng& rng) const {
  ps.add(w_, in_, out_);
  ps.add(b_, 1, out_);
  ps.init_uniform(w_, in_, rng);
  ps.init_uniform(b_, in_, rng);
}

Tensor2 Affine::forward(const ParamSet& ps, const Tensor2& x) const {
  return affine(x, ps.at(w_).value, ps.at(b_).value);
}

Tensor2 Affine::backward(ParamSet& ps, const Tensor2& x, const Tensor2& dout) const {
  Param& w = ps.at(w_);
  Param& b = ps.at(b_);
  AffineGrad g = affine_backward(x, w.value, dout);
  w.grad += g.dw;
  b.grad += g.db;
  return std::move(g.dx);
}

// ---------------------------------------------------------------------------

LstmCell::LstmCell(std::string prefix, Index in, Index hidden)
    : w_(prefix + ".w"), b_(prefix + ".b"), in_(in), hidden_(hidden) {}

void LstmCell::declare(ParamSet& ps, Rng& rng) const {
  ps.add(w_, in_ + hidden_, 4 * hidden_);
  ps.add(b_, 1, 4 * hidden_);
  ps.init_uniform(w_, in_ + hidden_, rng);
  ps.init_uniform(b_, in_ + hidden_, rng);
  ps.at(b_).value.block(0, hidden_, 1, hidden_).setOnes();
}

LstmState LstmCell::zero_state(Index batch) const {
  return {Tensor2::Zero(batch, hidden_), Tensor2::Zero(batch, hidden_)};
}

LstmState LstmCell::step(const ParamSet& ps, const Tensor2& x, const LstmState& prev,
                         LstmStepCache* cache) const {
  const Tensor2& w = ps.at(w_).value;
  const Tensor2& b = ps.at(b_).value;
  if (x.cols() != in_) throw DimensionError("lstm step: input width mismatch");
  if (prev.h.cols() != hidden_ || prev.c.cols() != hidden_ || prev.h.rows() != x.rows() ||
      prev.c.rows() != x.rows())
    throw DimensionError("lstm step: state shape mismatch");

  const Index n = hidden_;
  Tensor2 z = x * w.topRows(in_) + prev.h * w.bottomRows(n);
  z.rowwise() += b.row(0);

  Tensor2 i = z.leftCols(n).unaryExpr([](double v) { return sigmoid(v); });
  Tensor2 f = z.middleCols(n, n).unaryExpr([](double v) { return sigmoid(v); });
  Tensor2 g = z.middleCols(2 * n, n).array().tanh().matrix();
  Tensor2 o = z.rightCols(n).unaryExpr([](double v) { return sigmoid(v); });

  LstmState next;
  next.c = (f.array() * prev.c.array() + i.array() * g.array()).matrix();
  Tensor2 tanh_c = next.c.array().tanh().matrix();
  next.h = (o.array() * tanh_c.array()).matrix();

  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = prev.h;
    cache->c_prev = prev.c;
    cache->i = std::move(i);
    cache->f = std::move(f);
    cache->g = std::move(g);
    cache->o = std::move(o);
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

LstmStepGrad LstmCell::step_backward(ParamSet& ps, const LstmStepCache& cache, const Tensor2& dh,
                                     const Tensor2& dc) const {
  Param& w = ps.at(w_);
  Param& b = ps.at(b_);
  const Index n = hidden_;
  const Index batch = cache.x.rows();

  const auto o = cache.o.array();
  const auto i = cache.i.array();
  const auto f = cache.f.array();
  const auto g = cache.g.array();
  const auto tc = cache.tanh_c.array();

  Tensor2 dc_total = (dc.array() + dh.array() * o * (1.0 - tc.square())).matrix();

  Tensor2 dz(batch, 4 * n);
  dz.leftCols(n) = (dc_total.array() * g * i * (1.0 - i)).matrix();
  dz.middleCols(n, n) = (dc_total.array() * cache.c_prev.array() * f * (1.0 - f)).matrix();
  dz.middleCols(2 * n, n) = (dc_total.array() * i * (1.0 - g.square())).matrix();
  dz.rightCols(n) = (dh.array() * tc * o * (1.0 - o)).matrix();

  w.grad.topRows(in_).noalias() += cache.x.transpose() * dz;
  w.grad.bottomRows(n).noalias() += cache.h_prev.transpose() * dz;
  b.grad.noalias() += dz.colwise().sum();

  LstmStepGrad out;
  out.dx = dz * w.value.topRows(in_).transpose();
  out.dh_prev = dz * w.value.bottomRows(n).transpose();
  out.dc_prev = (dc_total.array() * f).matrix();
  return out;
}

LstmTrace lstm_run(const LstmCell& cell, const ParamSet& ps, const std::vector<Tensor2>& xs,
                   const LstmState& init) {
  LstmTrace trace;
  trace.steps.resize(xs.size());
  LstmState state = init;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    state = cell.step(ps, xs[t], state, &trace.steps[t]);
  }
  trace.final_state = std::move(state);
  return trace;
}

LstmSequenceGrad lstm_backward_final(const LstmCell& cell, ParamSet& ps, const LstmTrace& trace,
                                     const Tensor2& dh_final) {
  LstmSequenceGrad out;
  out.dxs.resize(trace.steps.size());
  Tensor2 dh = dh_final;
  Tensor2 dc = Tensor2::Zero(dh_final.rows(), dh_final.cols());
  for (std::size_t t = trace.steps.size(); t-- > 0;) {
    LstmStepGrad g = cell.step_backward(ps, trace.steps[t], dh, dc);
    out.dxs[t] = std::move(g.dx);
    dh = std::move(g.dh_prev);
    dc = std::move(g.dc_prev);
  }
  out.dh0 = std::move(dh);
  out.dc0 = std::move(dc);
  return out;
}

// ---------------------------------------------------------------------------

BiLstmEncoder::BiLstmEncoder(const std::string& prefix, Index in, Index hidden)
    : fw_(prefix + ".fw", in, hidden), bw_(prefix + ".bw", in, hidden) {}

void BiLstmEncoder::declare(ParamSet& ps, Rng& rng) const {
  fw_.declare(ps, rng);
  bw_.declare(ps, rng);
}

Tensor2 BiLstmEncoder::forward(const ParamSet& ps, const std::vector<Tensor2>& xs,
                               Trace* trace) const {
  if (xs.empty()) throw std::invalid_argument("bilstm encode: empty sequence");
  const Index batch = xs.front().rows();
  std::vector<Tensor2> reversed(xs.rbegin(), xs.rend());
  LstmTrace fw = lstm_run(fw_, ps, xs, fw_.zero_state(batch));
  LstmTrace bw = lstm_run(bw_, ps, reversed, bw_.zero_state(batch));
  Tensor2 out = 0.5 * (fw.final_state.h + bw.final_state.h);
  if (trace != nullptr) {
    trace->fw = std::move(fw);
    trace->bw = std::move(bw);
  }
  return out;
}

std::vector<Tensor2> BiLstmEncoder::backward(ParamSet& ps, const Trace& trace,
                                             const Tensor2& dout) const {
  const Tensor2 half = 0.5 * dout;
  LstmSequenceGrad gf = lstm_backward_final(fw_, ps, trace.fw, half);
  LstmSequenceGrad gb = lstm_backward_final(bw_, ps, trace.bw, half);
  std::vector<Tensor2> dxs = std::move(gf.dxs);
  const std::size_t steps = dxs.size();
  for (std::size_t t = 0; t < steps; ++t) dxs[t] += gb.dxs[steps - 1 - t];
  return dxs;
}

// ---------------------------------------------------------------------------

Mlp::Mlp(const std::string& prefix, const std::vector<Index>& widths, Activation act)
    : act_(act) {
  if (widths.size() < 2) throw std::invalid_argument("mlp needs at least one layer");
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    layers_.emplace_back(prefix + ".l" + std::to_string(l), widths[l], widths[l + 1]);
  }
}

void Mlp::declare(ParamSet& ps, Rng& rng) const {
  for (const auto& layer : layers_) layer.declare(ps, rng);
}

Tensor2 Mlp::forward(const ParamSet& ps, const Tensor2& x, Trace* trace) const {
  if (trace != nullptr) trace->inputs.clear();
  Tensor2 h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (trace != nullptr) trace->inputs.push_back(h);
    h = layers_[l].forward(ps, h);
    if (l + 1 < layers_.size()) h = activate(h, act_);
  }
  return h;
}

Tensor2 Mlp::backward(ParamSet& ps, const Trace& trace, const Tensor2& dout) const {
  Tensor2 d = dout;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    d = layers_[l].backward(ps, trace.inputs[l], d);
    if (l > 0) {
      // trace.inputs[l] is the activated output of layer l-1
      d = (d.array() * activation_grad_from_output(trace.inputs[l], act_).array()).matrix();
    }
  }
  return d;
}

// ---------------------------------------------------------------------------

Tensor2 softmax(const Tensor2& logits) {
  Tensor2 out(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

LossGrad softmax_cross_entropy(const Tensor2& logits, const Tensor2& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols())
    throw DimensionError("softmax_cross_entropy: logits/target shape mismatch");
  for (Index r = 0; r < targets.rows(); ++r) {
    if ((targets.row(r).array() < 0.0).any() || std::abs(targets.row(r).sum() - 1.0) > 1e-9)
      throw std::invalid_argument("softmax_cross_entropy: target is not a distribution");
  }
  const double rows = static_cast<double>(logits.rows());
  LossGrad out;
  out.grad.resize(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    const auto shifted = (logits.row(r).array() - m).eval();
    const double log_z = std::log(shifted.exp().sum());
    for (Index j = 0; j < logits.cols(); ++j) {
      const double t = targets(r, j);
      if (t > 0.0) out.loss -= t * (shifted(j) - log_z);
      out.grad(r, j) = (std::exp(shifted(j) - log_z) - t) / rows;
    }
  }
  out.loss /= rows;
  return out;
}

}  // namespace pccs
