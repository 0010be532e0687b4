// Shared fixtures for the unit tests and the acceptance binary.
#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pccs/decoder.hpp"
#include "pccs/grad_check.hpp"
#include "pccs/layers.hpp"
#include "pccs/predictor.hpp"
#include "pccs/representation.hpp"
#include "pccs/trajectory.hpp"

namespace pccs::testing {

inline Tensor2 random_tensor(Index rows, Index cols, Rng& rng, double scale = 1.0) {
  Tensor2 t(rows, cols);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-scale, scale);
  return t;
}

inline void fill_random(ParamSet& ps, const std::string& name, Rng& rng, double scale = 1.0) {
  Param& p = ps.at(name);
  p.value = random_tensor(p.value.rows(), p.value.cols(), rng, scale);
}

// loss = sum(r .* out) + 0.5 * |out|^2, so d(loss)/d(out) = r + out
inline double readout(const Tensor2& out, const Tensor2& r, Tensor2* dout) {
  if (dout != nullptr) *dout = r + out;
  return (r.array() * out.array()).sum() + 0.5 * out.squaredNorm();
}

// Treats a named ParamSet entry as a model input so its gradient is checked too.
inline Param& input_param(ParamSet& ps, const std::string& name, Index rows, Index cols, Rng& rng,
                          double scale = 1.0) {
  Param& p = ps.add(name, rows, cols);
  p.value = random_tensor(rows, cols, rng, scale);
  return p;
}

struct GradCase {
  std::string name;
  ParamSet params;
  LossFn loss;
};

inline std::vector<GradCase> grad_cases(std::uint64_t seed = 11) {
  std::vector<GradCase> cases;
  Rng rng(seed);

  {
    GradCase c{"affine", {}, {}};
    auto layer = std::make_shared<Affine>("aff", 5, 4);
    layer->declare(c.params, rng);
    input_param(c.params, "in.x", 3, 5, rng);
    auto r = std::make_shared<Tensor2>(random_tensor(3, 4, rng));
    c.loss = [layer, r](ParamSet& ps, bool backward) {
      const Tensor2& x = ps.at("in.x").value;
      Tensor2 dout;
      const double l = readout(layer->forward(ps, x), *r, &dout);
      if (backward) ps.at("in.x").grad += layer->backward(ps, x, dout);
      return l;
    };
    cases.push_back(std::move(c));
  }
  {
    GradCase c{"mlp", {}, {}};
    auto mlp = std::make_shared<Mlp>("mlp", std::vector<Index>{6, 8, 8, 5}, Activation::Tanh);
    mlp->declare(c.params, rng);
    input_param(c.params, "in.x", 4, 6, rng);
    auto r = std::make_shared<Tensor2>(random_tensor(4, 5, rng));
    c.loss = [mlp, r](ParamSet& ps, bool backward) {
      Mlp::Trace trace;
      const Tensor2 out = mlp->forward(ps, ps.at("in.x").value, &trace);
      Tensor2 dout;
      const double l = readout(out, *r, &dout);
      if (backward) ps.at("in.x").grad += mlp->backward(ps, trace, dout);
      return l;
    };
    cases.push_back(std::move(c));
  }
  {
    GradCase c{"lstm_cell", {}, {}};
    auto cell = std::make_shared<LstmCell>("cell", 3, 4);
    cell->declare(c.params, rng);
    fill_random(c.params, "cell.w", rng, 0.8);
    fill_random(c.params, "cell.b", rng, 0.5);
    input_param(c.params, "in.x", 2, 3, rng);
    input_param(c.params, "in.h", 2, 4, rng, 0.5);
    input_param(c.params, "in.c", 2, 4, rng, 0.5);
    auto rh = std::make_shared<Tensor2>(random_tensor(2, 4, rng));
    auto rc = std::make_shared<Tensor2>(random_tensor(2, 4, rng));
    c.loss = [cell, rh, rc](ParamSet& ps, bool backward) {
      LstmStepCache cache;
      const LstmState next =
          cell->step(ps, ps.at("in.x").value, {ps.at("in.h").value, ps.at("in.c").value}, &cache);
      Tensor2 dh, dc;
      const double l = readout(next.h, *rh, &dh) + readout(next.c, *rc, &dc);
      if (!backward) return l;
      const LstmStepGrad g = cell->step_backward(ps, cache, dh, dc);
      ps.at("in.x").grad += g.dx;
      ps.at("in.h").grad += g.dh_prev;
      ps.at("in.c").grad += g.dc_prev;
      return l;
    };
    cases.push_back(std::move(c));
  }
  {
    GradCase c{"bilstm_encoder", {}, {}};
    auto enc = std::make_shared<BiLstmEncoder>("enc", 2, kRepDim);
    enc->declare(c.params, rng);
    for (const char* n : {"enc.fw.w", "enc.bw.w"}) fill_random(c.params, n, rng, 0.3);
    input_param(c.params, "in.seq", 8, 4, rng, 0.5);  // 8 steps, batch 2 x 2 dims
    auto r = std::make_shared<Tensor2>(random_tensor(2, kRepDim, rng));
    c.loss = [enc, r](ParamSet& ps, bool backward) {
      const Tensor2& seq = ps.at("in.seq").value;
      std::vector<Tensor2> xs;
      for (Index t = 0; t < seq.rows(); ++t) {
        Tensor2 x(2, 2);
        x << seq(t, 0), seq(t, 1), seq(t, 2), seq(t, 3);
        xs.push_back(x);
      }
      BiLstmEncoder::Trace trace;
      Tensor2 dout;
      const double l = readout(enc->forward(ps, xs, &trace), *r, &dout);
      if (!backward) return l;
      const auto dxs = enc->backward(ps, trace, dout);
      Param& in = ps.at("in.seq");
      for (Index t = 0; t < seq.rows(); ++t) {
        in.grad(t, 0) += dxs[t](0, 0);
        in.grad(t, 1) += dxs[t](0, 1);
        in.grad(t, 2) += dxs[t](1, 0);
        in.grad(t, 3) += dxs[t](1, 1);
      }
      return l;
    };
    cases.push_back(std::move(c));
  }
  {
    GradCase c{"synthesizer", {}, {}};
    auto synth = std::make_shared<Synthesizer>();
    synth->declare(c.params, rng);
    auto rh = std::make_shared<Tensor2>(random_tensor(3, kRepDim, rng, 0.5));
    auto ch = std::make_shared<Tensor2>(random_tensor(3, kRepDim, rng, 0.5));
    auto cf = std::make_shared<Tensor2>(random_tensor(3, kRepDim, rng, 0.5));
    auto rf = std::make_shared<Tensor2>(random_tensor(3, kRepDim, rng, 0.5));
    c.loss = [synth, rh, ch, cf, rf](ParamSet& ps, bool backward) {
      Synthesizer::Trace trace;
      const Tensor2 diff = synth->forward(ps, *rh, *ch, *cf, &trace) - *rf;
      if (backward) synth->backward(ps, trace, diff);
      return 0.5 * diff.squaredNorm();
    };
    cases.push_back(std::move(c));
  }
  {
    GradCase c{"decoder_12_step", {}, {}};
    auto dec = std::make_shared<SequenceDecoder>("dec", kDecoderHidden);
    dec->declare(c.params, rng);
    fill_random(c.params, "dec.lstm.w", rng, 0.25);
    input_param(c.params, "in.h0", 2, kDecoderHidden, rng, 0.5);
    auto first = std::make_shared<Tensor2>(random_tensor(2, 2, rng, 0.5));
    auto truth = std::make_shared<std::vector<Tensor2>>();
    for (int t = 0; t < kPredLen; ++t) truth->push_back(random_tensor(2, 2, rng, 0.5));
    c.loss = [dec, first, truth](ParamSet& ps, bool backward) {
      SequenceDecoder::Trace trace;
      const auto disp = dec->forward(ps, ps.at("in.h0").value, *first, &trace);
      std::vector<Tensor2> d_pos;
      const double l = exp_l2_loss(accumulate_positions(disp), *truth, &d_pos);
      if (backward)
        ps.at("in.h0").grad += dec->backward(ps, trace, positions_grad_to_displacements(d_pos));
      return l;
    };
    cases.push_back(std::move(c));
  }
  {
    GradCase c{"soft_cross_entropy", {}, {}};
    input_param(c.params, "in.logits", 3, 5, rng, 2.0);
    auto target = std::make_shared<Tensor2>(3, 5);
    *target << 0.2, 0.2, 0.6, 0.0, 0.0,  //
        1.0, 0.0, 0.0, 0.0, 0.0,         //
        0.25, 0.25, 0.25, 0.125, 0.125;
    c.loss = [target](ParamSet& ps, bool backward) {
      const LossGrad lg = softmax_cross_entropy(ps.at("in.logits").value, *target);
      if (backward) ps.at("in.logits").grad += lg.grad;
      return lg.loss;
    };
    cases.push_back(std::move(c));
  }
  {
    GradCase c{"exp_l2", {}, {}};
    input_param(c.params, "in.pred", kPredLen, 6, rng);  // 12 steps, batch 3 x 2 dims
    auto truth = std::make_shared<std::vector<Tensor2>>();
    for (int t = 0; t < kPredLen; ++t) truth->push_back(random_tensor(3, 2, rng));
    c.loss = [truth](ParamSet& ps, bool backward) {
      const Tensor2& pred = ps.at("in.pred").value;
      std::vector<Tensor2> steps;
      for (int t = 0; t < kPredLen; ++t)
        steps.push_back(Eigen::Map<const Tensor2>(pred.row(t).data(), 3, 2));
      std::vector<Tensor2> grad;
      const double l = exp_l2_loss(steps, *truth, &grad);
      for (int t = 0; t < kPredLen && backward; ++t)
        ps.at("in.pred").grad.row(t) += Eigen::Map<const Eigen::RowVectorXd>(grad[t].data(), 6);
      return l;
    };
    cases.push_back(std::move(c));
  }
  return cases;
}

// Straight walker: 20 positions along `dir` at `speed` m/s, last observed at `end`.
inline TrackWindow straight_window(const Vec2& end, const Vec2& dir, double speed) {
  TrackWindow w;
  const Vec2 step = dir.normalized() * speed * kFrameDt;
  for (int t = 0; t < kObsLen; ++t) w.obs[t] = end - (kObsLen - 1 - t) * step;
  for (int t = 0; t < kPredLen; ++t) w.fut[t] = end + (t + 1) * step;
  return w;
}

// Untrained but complete bundle with random modality centers.
inline ModelBundle random_model(int k, std::uint64_t seed) {
  ModelBundle m;
  m.config.k_clusters = k;
  m.config.top_k = k;
  m.config.seed = seed;
  m.encoders = EncoderBundle::initialize(seed);
  Rng rng(seed + 1);
  m.modalities.w_h = m.config.w_h;
  m.modalities.w_f = m.config.w_f;
  for (int j = 0; j < k; ++j) {
    m.modalities.modalities.push_back({j, random_tensor(kRepDim, 1, rng, 0.3),
                                       random_tensor(kRepDim, 1, rng, 0.3), 1});
  }
  m.classifier = Classifier(k);
  m.classifier.declare(m.classifier_params, rng);
  m.synthesizer.declare(m.synthesis_params, rng);
  m.decoder.declare(m.synthesis_params, rng);
  return m;
}

}  // namespace pccs::testing
