#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pccs/decoder.hpp"
#include "pccs/layers.hpp"
#include "pccs/optim.hpp"
#include "pccs/trajectory.hpp"

namespace pccs {

inline constexpr Index kRepDim = 48;
inline constexpr Index kDecoderHidden = 2 * kRepDim;

// Past steps as displacements; the first step is a zero displacement.
std::vector<Tensor2> past_inputs(std::span<const ObsPath> paths);
// Future steps as displacements from the previous position, starting at the origin.
std::vector<Tensor2> future_inputs(std::span<const FuturePath> paths);
// Last observed displacement of each path (batch x 2).
Tensor2 last_displacement(std::span<const ObsPath> paths);

// Past encoder, future encoder and the reconstruction decoder used to pretrain them.
// Parameter names: "past.*", "future.*", "decoder.*".
struct EncoderBundle {
  BiLstmEncoder past{"past", 2, kRepDim};
  BiLstmEncoder future{"future", 2, kRepDim};
  SequenceDecoder decoder{"decoder", kDecoderHidden};
  ParamSet params;

  static EncoderBundle initialize(std::uint64_t seed);

  // R_H of one normalized observation.
  Vector encode_past(const ObsPath& normalized_obs) const;
  // R_F of one normalized future.
  Vector encode_future(const FuturePath& normalized_fut) const;

  Tensor2 encode_past(std::span<const ObsPath> normalized_obs) const;
  Tensor2 encode_future(std::span<const FuturePath> normalized_fut) const;

  // Future reconstruction from h0 = [R_H, R_F]; mean exp-L2 over the batch. With
  // `backward` set, gradients are accumulated into `ps`.
  double reconstruction_loss(ParamSet& ps, std::span<const TrackWindow> normalized,
                             bool backward) const;
};

struct PretrainConfig {
  int epochs = 50;
  int batch_size = 64;
  double val_fraction = 0.1;
  int patience = 5;
  AdamConfig adam;
  std::uint64_t seed = 1;
};

struct PretrainReport {
  std::vector<double> train_loss;  // mean batch loss per epoch
  std::vector<double> val_loss;
  int best_epoch = -1;
};

// Trains both encoders and the decoder jointly on normalized windows, keeping the
// parameters of the epoch with the lowest held-out reconstruction loss.
EncoderBundle pretrain_representations(std::span<const TrackWindow> normalized_train,
                                       const PretrainConfig& config,
                                       PretrainReport* report = nullptr);

}  // namespace pccs
