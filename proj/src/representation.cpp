#include "pccs/representation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pccs {

std::vector<Tensor2> past_inputs(std::span<const ObsPath> paths) {
  const Index batch = static_cast<Index>(paths.size());
  std::vector<Tensor2> out(kObsLen, Tensor2::Zero(batch, 2));
  for (Index b = 0; b < batch; ++b) {
    const ObsPath& p = paths[static_cast<std::size_t>(b)];
    for (int t = 1; t < kObsLen; ++t) {
      out[t](b, 0) = p[t].x() - p[t - 1].x();
      out[t](b, 1) = p[t].y() - p[t - 1].y();
    }
  }
  return out;
}

std::vector<Tensor2> future_inputs(std::span<const FuturePath> paths) {
  const Index batch = static_cast<Index>(paths.size());
  std::vector<Tensor2> out(kPredLen, Tensor2::Zero(batch, 2));
  for (Index b = 0; b < batch; ++b) {
    const FuturePath& p = paths[static_cast<std::size_t>(b)];
    out[0](b, 0) = p[0].x();
    out[0](b, 1) = p[0].y();
    for (int t = 1; t < kPredLen; ++t) {
      out[t](b, 0) = p[t].x() - p[t - 1].x();
      out[t](b, 1) = p[t].y() - p[t - 1].y();
    }
  }
  return out;
}

Tensor2 last_displacement(std::span<const ObsPath> paths) {
  Tensor2 out(static_cast<Index>(paths.size()), 2);
  for (std::size_t b = 0; b < paths.size(); ++b) {
    const Vec2 d = paths[b][kObsLen - 1] - paths[b][kObsLen - 2];
    out(static_cast<Index>(b), 0) = d.x();
    out(static_cast<Index>(b), 1) = d.y();
  }
  return out;
}

EncoderBundle EncoderBundle::initialize(std::uint64_t seed) {
  EncoderBundle bundle;
  Rng rng(seed);
  bundle.past.declare(bundle.params, rng);
  bundle.future.declare(bundle.params, rng);
  bundle.decoder.declare(bundle.params, rng);
  return bundle;
}

Vector EncoderBundle::encode_past(const ObsPath& normalized_obs) const {
  return encode_past(std::span<const ObsPath>(&normalized_obs, 1)).row(0).transpose();
}

Vector EncoderBundle::encode_future(const FuturePath& normalized_fut) const {
  return encode_future(std::span<const FuturePath>(&normalized_fut, 1)).row(0).transpose();
}

Tensor2 EncoderBundle::encode_past(std::span<const ObsPath> normalized_obs) const {
  return past.forward(params, past_inputs(normalized_obs));
}

Tensor2 EncoderBundle::encode_future(std::span<const FuturePath> normalized_fut) const {
  return future.forward(params, future_inputs(normalized_fut));
}

double EncoderBundle::reconstruction_loss(ParamSet& ps, std::span<const TrackWindow> normalized,
                                          bool backward) const {
  std::vector<ObsPath> obs;
  std::vector<FuturePath> fut;
  obs.reserve(normalized.size());
  fut.reserve(normalized.size());
  for (const auto& w : normalized) {
    obs.push_back(w.obs);
    fut.push_back(w.fut);
  }
  BiLstmEncoder::Trace past_trace;
  BiLstmEncoder::Trace future_trace;
  const Tensor2 rh = past.forward(ps, past_inputs(obs), &past_trace);
  const Tensor2 rf = future.forward(ps, future_inputs(fut), &future_trace);
  Tensor2 h0(rh.rows(), kDecoderHidden);
  h0 << rh, rf;

  SequenceDecoder::Trace dec_trace;
  const auto displacements = decoder.forward(ps, h0, last_displacement(obs), &dec_trace);
  std::vector<Tensor2> d_pos;
  const double loss = exp_l2_loss(accumulate_positions(displacements), future_steps(fut),
                                  backward ? &d_pos : nullptr);
  if (backward) {
    const Tensor2 dh0 = decoder.backward(ps, dec_trace, positions_grad_to_displacements(d_pos));
    past.backward(ps, past_trace, dh0.leftCols(kRepDim));
    future.backward(ps, future_trace, dh0.rightCols(kRepDim));
  }
  return loss;
}

EncoderBundle pretrain_representations(std::span<const TrackWindow> normalized_train,
                                       const PretrainConfig& config, PretrainReport* report) {
  if (normalized_train.empty()) throw std::invalid_argument("pretraining: empty training set");
  if (config.batch_size < 1) throw std::invalid_argument("pretraining: batch size must be >= 1");

  EncoderBundle bundle = EncoderBundle::initialize(config.seed);
  Rng rng(config.seed ^ 0x5eedULL);

  std::vector<std::size_t> order(normalized_train.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const auto n_val = static_cast<std::size_t>(config.val_fraction *
                                              static_cast<double>(normalized_train.size()));
  std::vector<TrackWindow> val;
  std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  for (std::size_t i = 0; i < n_val; ++i) val.push_back(normalized_train[order[i]]);
  if (train_idx.empty()) throw std::invalid_argument("pretraining: no samples left after hold-out");

  OptimState opt;
  opt.config = config.adam;
  ParamSet best = bundle.params;
  double best_val = std::numeric_limits<double>::infinity();
  int stale = 0;
  PretrainReport local;
  PretrainReport& rep = report != nullptr ? *report : local;
  rep = {};

  std::vector<TrackWindow> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(train_idx);
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(train_idx.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(normalized_train[train_idx[i]]);
      const double loss = bundle.reconstruction_loss(bundle.params, batch, true);
      if (!std::isfinite(loss)) throw NumericError("pretraining: non-finite loss");
      optimizer_step(bundle.params, opt);
      sum += loss;
      ++batches;
    }
    rep.train_loss.push_back(sum / static_cast<double>(batches));

    double val_loss = rep.train_loss.back();
    if (!val.empty()) val_loss = bundle.reconstruction_loss(bundle.params, val, false);
    rep.val_loss.push_back(val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      best = bundle.params;
      rep.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  bundle.params = std::move(best);
  bundle.params.zero_grad();
  return bundle;
}

}  // namespace pccs
