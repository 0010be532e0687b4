#include "pccs/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pccs {

Classifier::Classifier(int k)
    : mlp_("classifier", {kRepDim, kClassifierHidden, kClassifierHidden, k}, Activation::Tanh),
      k_(k) {}

void Classifier::declare(ParamSet& ps, Rng& rng) const { mlp_.declare(ps, rng); }

Tensor2 Classifier::logits(const ParamSet& ps, const Tensor2& rh, Mlp::Trace* trace) const {
  if (rh.cols() != kRepDim) throw DimensionError("classifier: R_H must have 48 columns");
  return mlp_.forward(ps, rh, trace);
}

Vector Classifier::classify(const ParamSet& ps, const Vector& rh) const {
  const Tensor2 row = rh.transpose();
  return softmax(logits(ps, row)).row(0).transpose();
}

double Classifier::modality_loss(ParamSet& ps, const Tensor2& rh, const Tensor2& targets,
                                 bool backward) const {
  if (targets.cols() != k_) throw DimensionError("modality loss: target width differs from K");
  Mlp::Trace trace;
  const Tensor2 z = logits(ps, rh, backward ? &trace : nullptr);
  LossGrad lg = softmax_cross_entropy(z, targets);
  if (backward) mlp_.backward(ps, trace, lg.grad);
  return lg.loss;
}

double modality_loss(const Vector& probabilities, const PseudoTarget& target) {
  if (static_cast<std::size_t>(probabilities.size()) != target.distribution.size())
    throw DimensionError("modality loss: prediction and target cover different K");
  double sum = 0.0;
  for (double t : target.distribution) {
    if (t < 0.0) throw std::invalid_argument("modality loss: target is not a distribution");
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("modality loss: target is not a distribution");
  double loss = 0.0;
  for (std::size_t j = 0; j < target.distribution.size(); ++j) {
    const double t = target.distribution[j];
    if (t > 0.0) loss -= t * std::log(probabilities(static_cast<Index>(j)));
  }
  return loss;
}

// ---------------------------------------------------------------------------

Synthesizer::Synthesizer()
    : diff_("synth.diff", kRepDim, kSynthHidden), fuse_("synth.fuse", kSynthHidden + kRepDim, kRepDim) {}

void Synthesizer::declare(ParamSet& ps, Rng& rng) const {
  diff_.declare(ps, rng);
  fuse_.declare(ps, rng);
}

Tensor2 Synthesizer::forward(const ParamSet& ps, const Tensor2& rh, const Tensor2& center_h,
                             const Tensor2& center_f, Trace* trace) const {
  if (rh.cols() != kRepDim || center_h.cols() != kRepDim || center_f.cols() != kRepDim ||
      rh.rows() != center_h.rows() || rh.rows() != center_f.rows())
    throw DimensionError("synthesizer: inputs must be batch x 48");
  Tensor2 diff = rh - center_h;
  Tensor2 encoded = activate(diff_.forward(ps, diff), Activation::Sigmoid);
  Tensor2 fused_input(rh.rows(), kSynthHidden + kRepDim);
  fused_input << encoded, center_f;
  Tensor2 out = fuse_.forward(ps, fused_input);
  if (trace != nullptr) {
    trace->diff = std::move(diff);
    trace->encoded = std::move(encoded);
    trace->fused_input = std::move(fused_input);
  }
  return out;
}

void Synthesizer::backward(ParamSet& ps, const Trace& trace, const Tensor2& d_out) const {
  const Tensor2 d_fused = fuse_.backward(ps, trace.fused_input, d_out);
  const Tensor2 d_pre =
      (d_fused.leftCols(kSynthHidden).array() *
       activation_grad_from_output(trace.encoded, Activation::Sigmoid).array())
          .matrix();
  diff_.backward(ps, trace.diff, d_pre);
}

Vector Synthesizer::synthesize(const ParamSet& ps, const Vector& rh,
                               const Modality& modality) const {
  const Tensor2 out = forward(ps, rh.transpose(), modality.center_h.transpose(),
                              modality.center_f.transpose());
  return out.row(0).transpose();
}

// ---------------------------------------------------------------------------

void ModelBundle::check_consistency() const {
  const int k = modalities.k();
  if (k < 1) throw DimensionError("model: empty modality set");
  if (classifier.k() != k) throw DimensionError("model: classifier width differs from K");
  for (const auto& m : modalities.modalities) {
    if (m.center_h.size() != kRepDim || m.center_f.size() != kRepDim)
      throw DimensionError("model: modality centers must be 48-dimensional");
  }
  if (decoder.hidden() != 2 * kRepDim) throw DimensionError("model: decoder hidden size must be 96");
  require_shape(classifier_params.at("classifier.l2.w").value, kClassifierHidden, k,
                "classifier output layer");
  require_shape(synthesis_params.at("decoder.lstm.w").value, 2 + kDecoderHidden,
                4 * kDecoderHidden, "decoder lstm");
  require_shape(encoders.params.at("past.fw.w").value, 2 + kRepDim, 4 * kRepDim, "past encoder");
}

Vector future_representation(const ModelBundle& model, const Vector& rh, const Modality& modality) {
  if (!model.config.use_synthesis) return modality.center_f;
  return model.synthesizer.synthesize(model.synthesis_params, rh, modality);
}

FuturePath decode(const ModelBundle& model, const Vector& rh, const Vector& rf_star,
                  const Vec2& last_displacement) {
  Tensor2 h0(1, kDecoderHidden);
  h0 << rh.transpose(), rf_star.transpose();
  Tensor2 first(1, 2);
  first << last_displacement.x(), last_displacement.y();
  const auto positions =
      accumulate_positions(model.decoder.forward(model.synthesis_params, h0, first));
  FuturePath out;
  for (int t = 0; t < kPredLen; ++t) out[t] = Vec2(positions[t](0, 0), positions[t](0, 1));
  return out;
}

std::vector<int> rank_modalities(const Vector& probabilities) {
  std::vector<int> ids(static_cast<std::size_t>(probabilities.size()));
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(),
                   [&](int a, int b) { return probabilities(a) > probabilities(b); });
  return ids;
}

PredictionSet predict_topk(const ObsPath& observed, int k, const ModelBundle& model) {
  const int n_modalities = model.modalities.k();
  if (k < 1 || k > n_modalities)
    throw std::invalid_argument("predict_topk: k must be in [1, K]");
  TrackWindow window;
  window.obs = observed;
  for (auto& p : window.fut) p = observed[kObsLen - 1];
  const auto [local, transform] = normalize(window);

  const Vector rh = model.encoders.encode_past(local.obs);
  const Vector probs = model.classifier.classify(model.classifier_params, rh);
  const std::vector<int> ranked = rank_modalities(probs);
  const Vec2 last_step = local.obs[kObsLen - 1] - local.obs[kObsLen - 2];

  PredictionSet out;
  out.entries.reserve(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) {
    const Modality& m = model.modalities.modalities[static_cast<std::size_t>(ranked[r])];
    const FuturePath path = decode(model, rh, future_representation(model, rh, m), last_step);
    Prediction p;
    for (int t = 0; t < kPredLen; ++t) p.trajectory[t] = transform.to_world(path[t]);
    p.probability = probs(m.id);
    p.modality = m.id;
    out.entries.push_back(p);
  }
  return out;
}

}  // namespace pccs
