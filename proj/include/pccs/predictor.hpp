#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pccs/config.hpp"
#include "pccs/decoder.hpp"
#include "pccs/layers.hpp"
#include "pccs/modality.hpp"
#include "pccs/representation.hpp"

namespace pccs {

inline constexpr Index kClassifierHidden = 128;
inline constexpr Index kSynthHidden = 64;

// Three-layer tanh MLP scoring K modalities from R_H. Parameters "classifier.*".
class Classifier {
 public:
  Classifier() = default;
  explicit Classifier(int k);

  void declare(ParamSet& ps, Rng& rng) const;
  Tensor2 logits(const ParamSet& ps, const Tensor2& rh, Mlp::Trace* trace = nullptr) const;
  // Softmax over the logits of a single R_H.
  Vector classify(const ParamSet& ps, const Vector& rh) const;
  // Soft-target cross entropy against pseudo distributions (one row per sample).
  double modality_loss(ParamSet& ps, const Tensor2& rh, const Tensor2& targets, bool backward) const;

  int k() const { return k_; }

 private:
  Mlp mlp_;
  int k_ = 0;
};

// Soft-target cross entropy between predicted probabilities and a pseudo target.
double modality_loss(const Vector& probabilities, const PseudoTarget& target);

// R_F* = fuse([sigmoid(diff(R_H - center_H)), center_F]). Parameters "synth.*".
class Synthesizer {
 public:
  Synthesizer();

  struct Trace {
    Tensor2 diff;
    Tensor2 encoded;
    Tensor2 fused_input;
  };

  void declare(ParamSet& ps, Rng& rng) const;
  Tensor2 forward(const ParamSet& ps, const Tensor2& rh, const Tensor2& center_h,
                  const Tensor2& center_f, Trace* trace = nullptr) const;
  // Accumulates parameter gradients; inputs are treated as constants.
  void backward(ParamSet& ps, const Trace& trace, const Tensor2& d_out) const;

  Vector synthesize(const ParamSet& ps, const Vector& rh, const Modality& modality) const;

 private:
  Affine diff_;
  Affine fuse_;
};

// Trained model. `synthesis` holds both "synth.*" and "decoder.*" parameters.
struct ModelBundle {
  static constexpr std::uint32_t kVersion = 1;

  TrainConfig config;
  EncoderBundle encoders;
  ModalitySet modalities;
  Classifier classifier;
  ParamSet classifier_params;
  Synthesizer synthesizer;
  SequenceDecoder decoder{"decoder", kDecoderHidden};
  ParamSet synthesis_params;

  // Checks 48/96/K consistency across components; throws DimensionError.
  void check_consistency() const;
};

// Decoder initial state [R_H, R_F*] for the given modality, honouring the
// synthesis on/off switch (off: R_F* is the modality's future center).
Vector future_representation(const ModelBundle& model, const Vector& rh, const Modality& modality);

// Decodes 12 positions in the local frame (last observed position at the origin).
FuturePath decode(const ModelBundle& model, const Vector& rh, const Vector& rf_star,
                  const Vec2& last_displacement);

struct Prediction {
  FuturePath trajectory;  // world frame, meters
  double probability = 0.0;
  int modality = 0;
};

struct PredictionSet {
  std::vector<Prediction> entries;  // descending probability
};

// Modality ids ordered by descending probability, ties to the lower id.
std::vector<int> rank_modalities(const Vector& probabilities);

// Deterministic top-k prediction from a raw (world-frame) observation.
PredictionSet predict_topk(const ObsPath& observed, int k, const ModelBundle& model);

}  // namespace pccs
