#include <gtest/gtest.h>

#include <cmath>

#include "pccs/grad_check.hpp"
#include "pccs/predictor.hpp"
#include "support.hpp"

using namespace pccs;
using pccs::testing::random_model;
using pccs::testing::random_tensor;

namespace {

ObsPath walk(const Vec2& end, const Vec2& step) {
  ObsPath obs;
  for (int t = 0; t < kObsLen; ++t) obs[t] = end - (kObsLen - 1 - t) * step;
  return obs;
}

bool same(const PredictionSet& a, const PredictionSet& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    if (a.entries[i].probability != b.entries[i].probability) return false;
    if (a.entries[i].modality != b.entries[i].modality) return false;
    for (int t = 0; t < kPredLen; ++t)
      if (a.entries[i].trajectory[t] != b.entries[i].trajectory[t]) return false;
  }
  return true;
}

}  // namespace

TEST(Classifier, ZeroWeightsGiveUniform) {
  ModelBundle m = random_model(7, 1);
  for (auto& [name, p] : m.classifier_params) p.value.setZero();
  Rng rng(2);
  const Vector p = m.classifier.classify(m.classifier_params, random_tensor(kRepDim, 1, rng));
  for (Index j = 0; j < 7; ++j) EXPECT_NEAR(p(j), 1.0 / 7.0, 1e-15);
}

TEST(Classifier, OutputIsADistribution) {
  ModelBundle m = random_model(30, 2);
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector p = m.classifier.classify(m.classifier_params, random_tensor(kRepDim, 1, rng, 5.0));
    EXPECT_GE(p.minCoeff(), 0.0);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  }
  EXPECT_THROW(m.classifier.classify(m.classifier_params, Vector::Zero(10)), DimensionError);
}

TEST(Classifier, ModalityLossGradient) {
  ModelBundle m = random_model(6, 3);
  Rng rng(4);
  const Tensor2 rh = random_tensor(4, kRepDim, rng);
  Tensor2 targets = Tensor2::Zero(4, 6);
  targets(0, 1) = 1.0;
  targets(1, 2) = targets(1, 5) = 0.5;
  targets.row(2).setConstant(1.0 / 6.0);
  targets(3, 0) = 0.25;
  targets(3, 3) = 0.75;
  const LossFn loss = [&](ParamSet& ps, bool backward) {
    return m.classifier.modality_loss(ps, rh, targets, backward);
  };
  const GradCheckResult r = grad_check(m.classifier_params, loss);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_param;
}

TEST(ModalityLoss, OneHotAgainstUniform) {
  for (int k : {3, 20, 200}) {
    PseudoTarget t;
    t.distribution.assign(static_cast<std::size_t>(k), 0.0);
    t.distribution[1] = 1.0;
    t.n = 1;
    EXPECT_NEAR(modality_loss(Vector::Constant(k, 1.0 / k), t), std::log(k), 1e-12);
  }
}

TEST(ModalityLoss, MatchingDistributionIsMinimal) {
  PseudoTarget t;
  t.distribution = {0.5, 0.5, 0.0};
  t.n = 2;
  Vector p(3);
  p << 0.5, 0.5, 0.0;
  const double at_target = modality_loss(p, t);
  EXPECT_NEAR(at_target, std::log(2.0), 1e-15);
  for (double d : {0.01, 0.1, 0.3}) {
    Vector q(3);
    q << 0.5 - d, 0.5 - d, 2 * d;
    EXPECT_GT(modality_loss(q, t), at_target);
    q << 0.5 + d, 0.5 - d, 0.0;
    EXPECT_GT(modality_loss(q, t), at_target);
  }
  t.distribution = {0.7, 0.7, 0.0};
  EXPECT_ANY_THROW(modality_loss(p, t));
}

TEST(Synthesizer, CenterInputDependsOnlyOnModality) {
  ModelBundle m = random_model(4, 5);
  for (const auto& mod : m.modalities.modalities) {
    const Vector out = m.synthesizer.synthesize(m.synthesis_params, mod.center_h, mod);
    // zero difference: e = sigmoid(bias of the difference layer)
    const Tensor2 e = activate(m.synthesis_params.at("synth.diff.b").value, Activation::Sigmoid);
    Tensor2 in(1, kSynthHidden + kRepDim);
    in << e, mod.center_f.transpose();
    const Tensor2 expected =
        affine(in, m.synthesis_params.at("synth.fuse.w").value, m.synthesis_params.at("synth.fuse.b").value);
    EXPECT_TRUE(out.transpose().isApprox(expected, 1e-14));
  }
}

TEST(Synthesizer, DifferentModalitiesDiffer) {
  ModelBundle m = random_model(4, 6);
  Rng rng(7);
  const Vector rh = random_tensor(kRepDim, 1, rng);
  const Vector a = m.synthesizer.synthesize(m.synthesis_params, rh, m.modalities.modalities[0]);
  const Vector b = m.synthesizer.synthesize(m.synthesis_params, rh, m.modalities.modalities[1]);
  EXPECT_EQ(a.size(), kRepDim);
  EXPECT_GT((a - b).norm(), 1e-3);
}

TEST(Decode, ZeroWeightsRepeatLastPosition) {
  ModelBundle m = random_model(3, 8);
  for (auto& [name, p] : m.synthesis_params)
    if (name.rfind("decoder.", 0) == 0) p.value.setZero();
  const ObsPath obs = walk(Vec2(4.5, -2.0), Vec2(0.3, 0.1));
  const PredictionSet ps = predict_topk(obs, 3, m);
  for (const auto& e : ps.entries)
    for (const auto& p : e.trajectory) EXPECT_EQ(p, Vec2(4.5, -2.0));
}

TEST(Decode, SynthesisOffUsesFutureCenter) {
  ModelBundle m = random_model(3, 9);
  m.config.use_synthesis = false;
  Rng rng(1);
  const Vector rh = random_tensor(kRepDim, 1, rng);
  EXPECT_EQ(future_representation(m, rh, m.modalities.modalities[2]), m.modalities.modalities[2].center_f);
}

TEST(ExpL2, Examples) {
  std::vector<Vec2> truth(kPredLen, Vec2(1.0, 2.0));
  EXPECT_EQ(exp_l2_loss(truth, truth), 0.0);
  std::vector<Vec2> late = truth;
  late[11] += Vec2(1.0, 0.0);
  EXPECT_NEAR(exp_l2_loss(late, truth), std::exp(1.0) / 12.0, 1e-15);
  EXPECT_NEAR(exp_l2_loss(late, truth), 0.2265, 1e-4);
  std::vector<Vec2> early = truth;
  early[0] += Vec2(0.0, 1.0);
  EXPECT_NEAR(exp_l2_loss(early, truth), std::exp(1.0 / 12.0) / 12.0, 1e-15);
  EXPECT_GT(exp_l2_loss(late, truth), exp_l2_loss(early, truth));
  EXPECT_ANY_THROW(exp_l2_loss(std::span<const Vec2>(late.data(), 11), truth));
}

TEST(PredictTopK, FullKSumsToOneAndIsSorted) {
  ModelBundle m = random_model(9, 10);
  const ObsPath obs = walk(Vec2(1, 1), Vec2(0.4, 0.0));
  const PredictionSet ps = predict_topk(obs, 9, m);
  ASSERT_EQ(ps.entries.size(), 9u);
  double sum = 0.0;
  std::vector<bool> used(9, false);
  for (std::size_t i = 0; i < ps.entries.size(); ++i) {
    sum += ps.entries[i].probability;
    used[static_cast<std::size_t>(ps.entries[i].modality)] = true;
    if (i > 0) EXPECT_GT(ps.entries[i - 1].probability, ps.entries[i].probability);
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  for (bool u : used) EXPECT_TRUE(u);
}

TEST(PredictTopK, ProbabilitiesAreClassifierOutputs) {
  ModelBundle m = random_model(6, 11);
  const ObsPath obs = walk(Vec2(-3, 2), Vec2(0.1, 0.35));
  TrackWindow w;
  w.obs = obs;
  const Vector rh = m.encoders.encode_past(normalize(w).first.obs);
  const Vector probs = m.classifier.classify(m.classifier_params, rh);
  for (const auto& e : predict_topk(obs, 4, m).entries) EXPECT_EQ(e.probability, probs(e.modality));
}

TEST(PredictTopK, SmallerKIsPrefixAndRepeatsAreBitIdentical) {
  ModelBundle m = random_model(8, 12);
  const ObsPath obs = walk(Vec2(0.5, 7), Vec2(-0.2, 0.3));
  const PredictionSet full = predict_topk(obs, 8, m);
  for (int k = 1; k <= 8; ++k) {
    const PredictionSet part = predict_topk(obs, k, m);
    PredictionSet prefix;
    prefix.entries.assign(full.entries.begin(), full.entries.begin() + k);
    EXPECT_TRUE(same(part, prefix)) << k;
  }
  EXPECT_TRUE(same(predict_topk(obs, 5, m), predict_topk(obs, 5, m)));
  EXPECT_THROW(predict_topk(obs, 9, m), std::invalid_argument);
  EXPECT_THROW(predict_topk(obs, 0, m), std::invalid_argument);
}

TEST(PredictTopK, TranslationMovesPredictions) {
  ModelBundle m = random_model(4, 13);
  const ObsPath a = walk(Vec2(0, 0), Vec2(0.25, 0.5));
  const ObsPath b = walk(Vec2(64, -32), Vec2(0.25, 0.5));
  const PredictionSet pa = predict_topk(a, 4, m);
  const PredictionSet pb = predict_topk(b, 4, m);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(pa.entries[i].probability, pb.entries[i].probability);
    for (int t = 0; t < kPredLen; ++t)
      EXPECT_LE((pb.entries[i].trajectory[t] - pa.entries[i].trajectory[t] - Vec2(64, -32)).norm(), 1e-12);
  }
}

TEST(RankModalities, TiesGoToLowerId) {
  Vector p(5);
  p << 0.1, 0.3, 0.1, 0.3, 0.2;
  EXPECT_EQ(rank_modalities(p), (std::vector<int>{1, 3, 4, 0, 2}));
}

TEST(ModelBundle, ConsistencyChecks) {
  ModelBundle m = random_model(5, 14);
  EXPECT_NO_THROW(m.check_consistency());
  ModelBundle bad = m;
  bad.classifier = Classifier(4);
  EXPECT_THROW(bad.check_consistency(), DimensionError);
  bad = m;
  bad.modalities.modalities[2].center_f = Vector::Zero(47);
  EXPECT_THROW(bad.check_consistency(), DimensionError);
}
