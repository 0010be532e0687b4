#include "pccs/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <tuple>

namespace pccs {

void TrainingLog::write_csv(std::ostream& out) const {
  out << "stage,epoch,train_loss,val_loss\n";
  char buf[160];
  for (const auto& l : losses) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g\n", l.stage.c_str(), l.epoch, l.train_loss,
                  l.val_loss);
    out << buf;
  }
  for (std::size_t i = 0; i < kmeans_objective.size(); ++i) {
    std::snprintf(buf, sizeof buf, "kmeans,%zu,%.17g,%.17g\n", i, kmeans_objective[i],
                  kmeans_objective[i]);
    out << buf;
  }
}

SceneIndex index_scenes(const DatasetScenes& scenes) {
  SceneIndex index;
  for (const auto& [name, list] : scenes)
    for (const auto& s : list) index[s.scene_id] = &s;
  return index;
}

SceneIndex index_scenes(std::span<const TrajectoryScene> scenes) {
  SceneIndex index;
  for (const auto& s : scenes) index[s.scene_id] = &s;
  return index;
}

FeaturePair raw_features(const TrackWindow& normalized) {
  FeaturePair out{Vector(2 * kObsLen), Vector(2 * kPredLen)};
  for (int t = 0; t < kObsLen; ++t) out.h.segment<2>(2 * t) = normalized.obs[t];
  for (int t = 0; t < kPredLen; ++t) out.f.segment<2>(2 * t) = normalized.fut[t];
  return out;
}

namespace {

Vector flatten(const FuturePath& path) {
  Vector v(2 * kPredLen);
  for (int t = 0; t < kPredLen; ++t) v.segment<2>(2 * t) = path[t];
  return v;
}

Tensor2 gather_rows(const Tensor2& src, std::span<const std::size_t> idx) {
  Tensor2 out(static_cast<Index>(idx.size()), src.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = src.row(static_cast<Index>(idx[i]));
  return out;
}

void check_loss(const std::string& stage, double loss) {
  if (!std::isfinite(loss)) throw StageError(stage, "non-finite loss");
}

template <typename StepFn>
void run_epochs(const std::string& stage, std::size_t n, const TrainConfig& config, int epochs,
                std::uint64_t seed, TrainingLog* log, const ProgressFn& progress, StepFn step) {
  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      const double loss = step(std::span<const std::size_t>(order.data() + start, stop - start));
      check_loss(stage, loss);
      sum += loss;
      ++batches;
    }
    const double mean = sum / static_cast<double>(batches);
    if (log != nullptr) log->losses.push_back({stage, epoch, mean, mean});
    if (progress) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s epoch %d loss %.6f", stage.c_str(), epoch, mean);
      progress(buf);
    }
  }
}

struct SegmentKey {
  std::string scene;
  std::int64_t ped;
  std::int64_t frame;
  auto operator<=>(const SegmentKey&) const = default;
};

}  // namespace

ModelBundle train_full(const TrainConfig& config, std::span<const TrackWindow> train,
                       const SceneIndex& scenes, TrainingLog* log, const ProgressFn& progress) {
  config.validate();
  if (train.empty()) throw StageError("setup", "empty training set");
  TrainingLog local_log;
  TrainingLog* out_log = log != nullptr ? log : &local_log;
  *out_log = {};

  const std::size_t n = train.size();
  std::vector<TrackWindow> local(n);
  std::vector<ObsPath> obs(n);
  std::vector<FuturePath> fut(n);
  for (std::size_t i = 0; i < n; ++i) {
    local[i] = normalize(train[i]).first;
    obs[i] = local[i].obs;
    fut[i] = local[i].fut;
  }

  ModelBundle model;
  model.config = config;

  // Stage 1: representation pretraining.
  {
    PretrainConfig pc;
    pc.epochs = config.epochs_pretrain;
    pc.batch_size = config.batch_size;
    pc.val_fraction = config.val_fraction;
    pc.patience = config.patience;
    pc.adam.learning_rate = config.learning_rate;
    pc.seed = config.seed;
    PretrainReport report;
    try {
      model.encoders = pretrain_representations(local, pc, &report);
    } catch (const std::exception& e) {
      throw StageError("pretrain", e.what());
    }
    for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
      out_log->losses.push_back(
          {"pretrain", static_cast<int>(e), report.train_loss[e], report.val_loss[e]});
      if (progress) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "pretrain epoch %zu loss %.6f val %.6f", e,
                      report.train_loss[e], report.val_loss[e]);
        progress(buf);
      }
    }
  }

  // Stage 2: modality clustering. Encoded one sample at a time, as at inference.
  Tensor2 rh(static_cast<Index>(n), kRepDim);
  Tensor2 rf(static_cast<Index>(n), kRepDim);
  for (std::size_t i = 0; i < n; ++i) {
    rh.row(static_cast<Index>(i)) = model.encoders.encode_past(obs[i]).transpose();
    rf.row(static_cast<Index>(i)) = model.encoders.encode_future(fut[i]).transpose();
  }
  const bool deep = config.cluster_space == ClusterSpace::Deep;
  std::vector<FeaturePair> features(n);
  for (std::size_t i = 0; i < n; ++i) {
    features[i] = deep ? FeaturePair{rh.row(static_cast<Index>(i)).transpose(),
                                     rf.row(static_cast<Index>(i)).transpose()}
                       : raw_features(local[i]);
  }
  FitResult fit;
  try {
    FitOptions fo;
    fo.k = config.k_clusters;
    fo.w_h = config.w_h;
    fo.w_f = config.w_f;
    fo.seed = config.seed;
    fo.max_iterations = config.kmeans_max_iterations;
    fit = fit_modalities(features, fo);
  } catch (const std::exception& e) {
    throw StageError("cluster", e.what());
  }
  out_log->kmeans_objective = fit.objective;
  out_log->kmeans_iterations = fit.iterations;
  out_log->labels = fit.labels;
  if (progress)
    progress("cluster: " + std::to_string(fit.iterations) + " iterations, objective " +
             std::to_string(fit.objective.back()));

  const ModalitySet& cluster_set = fit.set;
  if (deep) {
    model.modalities = cluster_set;
  } else {
    // Modalities live in representation space: per-cluster means of R_H and R_F.
    model.modalities.w_h = config.w_h;
    model.modalities.w_f = config.w_f;
    for (int c = 0; c < config.k_clusters; ++c)
      model.modalities.modalities.push_back(
          {c, Vector::Zero(kRepDim), Vector::Zero(kRepDim), 0});
    for (std::size_t i = 0; i < n; ++i) {
      Modality& m = model.modalities.modalities[static_cast<std::size_t>(fit.labels[i])];
      m.center_h += rh.row(static_cast<Index>(i)).transpose();
      m.center_f += rf.row(static_cast<Index>(i)).transpose();
      ++m.member_count;
    }
    for (auto& m : model.modalities.modalities) {
      if (m.member_count > 0) {
        m.center_h /= static_cast<double>(m.member_count);
        m.center_f /= static_cast<double>(m.member_count);
      }
    }
  }

  // Stage 3: pseudo targets and classifier.
  const int k = config.k_clusters;
  Tensor2 targets = Tensor2::Zero(static_cast<Index>(n), k);
  {
    std::map<SegmentKey, Vector> segment_features;
    out_log->pseudo_targets.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto it = scenes.find(train[i].scene_id);
      if (it == scenes.end())
        throw StageError("pseudo-targets", "scene not found: " + train[i].scene_id);
      const auto segments = qualified_paths(*it->second, train[i], config.qualify);
      std::vector<Vector> seg_f;
      seg_f.reserve(segments.size());
      for (const auto& s : segments) {
        const SegmentKey key{train[i].scene_id, s.ped_id, s.crossing_frame};
        auto cached = segment_features.find(key);
        if (cached == segment_features.end()) {
          const FuturePath rel = local_positions(s);
          cached = segment_features.emplace(key, deep ? model.encoders.encode_future(rel) : flatten(rel))
                       .first;
        }
        seg_f.push_back(cached->second);
      }
      PseudoTarget pt = pseudo_distribution(features[i].h, seg_f, cluster_set);
      for (int j = 0; j < k; ++j) targets(static_cast<Index>(i), j) = pt.distribution[static_cast<std::size_t>(j)];
      out_log->pseudo_targets.push_back(std::move(pt));
    }
  }

  model.classifier = Classifier(k);
  {
    Rng rng(config.seed + 101);
    model.classifier.declare(model.classifier_params, rng);
  }
  {
    OptimState opt;
    opt.config.learning_rate = config.learning_rate;
    run_epochs("classifier", n, config, config.epochs_classifier, config.seed + 202, out_log,
               progress, [&](std::span<const std::size_t> idx) {
                 const double loss = model.classifier.modality_loss(
                     model.classifier_params, gather_rows(rh, idx), gather_rows(targets, idx), true);
                 optimizer_step(model.classifier_params, opt);
                 return loss;
               });
  }

  // Stage 4: synthesizer + decoder, trained on each sample's own cluster.
  {
    Rng rng(config.seed + 303);
    model.synthesizer.declare(model.synthesis_params, rng);
    model.decoder.declare(model.synthesis_params, rng);
    model.encoders.params.copy_values_into(model.synthesis_params, "decoder.", "decoder.");
  }
  Tensor2 ch(static_cast<Index>(n), kRepDim);
  Tensor2 cf(static_cast<Index>(n), kRepDim);
  for (std::size_t i = 0; i < n; ++i) {
    const Modality& m = model.modalities.modalities[static_cast<std::size_t>(fit.labels[i])];
    ch.row(static_cast<Index>(i)) = m.center_h.transpose();
    cf.row(static_cast<Index>(i)) = m.center_f.transpose();
  }
  {
    OptimState opt;
    opt.config.learning_rate = config.learning_rate;
    run_epochs(
        "synthesis", n, config, config.epochs_synthesis, config.seed + 404, out_log, progress,
        [&](std::span<const std::size_t> idx) {
          ParamSet& ps = model.synthesis_params;
          const Tensor2 b_rh = gather_rows(rh, idx);
          const Tensor2 b_rf = gather_rows(rf, idx);
          const Tensor2 b_cf = gather_rows(cf, idx);
          std::vector<ObsPath> b_obs;
          std::vector<FuturePath> b_fut;
          for (std::size_t i : idx) {
            b_obs.push_back(obs[i]);
            b_fut.push_back(fut[i]);
          }
          const double batch = static_cast<double>(idx.size());

          Synthesizer::Trace st;
          Tensor2 rf_star = b_cf;
          double rep_loss = 0.0;
          Tensor2 d_rep;
          if (config.use_synthesis) {
            rf_star = model.synthesizer.forward(ps, b_rh, gather_rows(ch, idx), b_cf, &st);
            const Tensor2 diff = rf_star - b_rf;
            rep_loss = diff.squaredNorm() / (batch * static_cast<double>(kRepDim));
            d_rep = (2.0 / (batch * static_cast<double>(kRepDim))) * diff;
          }
          Tensor2 h0(b_rh.rows(), kDecoderHidden);
          h0 << b_rh, rf_star;
          SequenceDecoder::Trace dt;
          const auto disp = model.decoder.forward(ps, h0, last_displacement(b_obs), &dt);
          std::vector<Tensor2> d_pos;
          const double traj_loss =
              exp_l2_loss(accumulate_positions(disp), future_steps(b_fut), &d_pos);
          const Tensor2 dh0 = model.decoder.backward(ps, dt, positions_grad_to_displacements(d_pos));
          if (config.use_synthesis) {
            model.synthesizer.backward(ps, st, d_rep + dh0.rightCols(kRepDim));
          }
          optimizer_step(ps, opt);
          return traj_loss + rep_loss;
        });
  }

  model.check_consistency();
  return model;
}

}  // namespace pccs
