/*
 * Copyright 2026 The calseg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "calseg/losses.hpp"
#include "calseg/theory.hpp"
#include "gradcheck.hpp"

namespace calseg {
namespace {

LabelField labels_of(std::mt19937_64& rng, std::size_t b, std::size_t h, std::size_t w, int c) {
  std::uniform_int_distribution<int> cls(0, c - 1);
  std::vector<std::int32_t> v(b * h * w);
  for (auto& x : v) x = cls(rng);
  return LabelField(b, h, w, c, v);
}

LogitField logits_of(std::mt19937_64& rng, Shape4 s) {
  std::normal_distribution<double> n(0.0, 1.5);
  Tensor4 t(s);
  for (double& v : t.data()) v = n(rng);
  return LogitField(std::move(t));
}

void expect_same(const LossResult& a, const LossResult& b) {
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.grad, b.grad);
}

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  const LabelField y(1, 2, 2, 4, {0, 1, 2, 3});
  const LossResult r = cross_entropy(LogitField(Tensor4({1, 4, 2, 2}, 0.0)), y);
  EXPECT_NEAR(r.value, std::log(4.0), 1e-15);
}

TEST(CrossEntropy, ConfidentCorrectTendsToZero) {
  const LabelField y(1, 1, 1, 2, {1});
  const LossResult r = cross_entropy(LogitField(Tensor4({1, 2, 1, 1}, {-40.0, 40.0})), y);
  EXPECT_LT(r.value, 1e-30);
  EXPECT_GE(r.value, 0.0);
}

TEST(CrossEntropy, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(41);
  const LabelField y = labels_of(rng, 1, 4, 4, 2);
  const LogitField z = logits_of(rng, y.field_shape());
  const auto r = gradcheck::check(
      [&](const LogitField& x) { return cross_entropy(x, y); }, z,
      [](const LogitField&) { return std::vector<int>{}; }, 1e-5);
  EXPECT_LE(r.rel_error, 1e-6);
}

TEST(ConfTerm, Examples) {
  const ProbabilityField p(Tensor4({1, 2, 1, 1}, {1.0, 0.0}));
  const SoftTargetField t(Tensor4({1, 2, 1, 1}, {0.5, 0.5}));
  EXPECT_DOUBLE_EQ(conf_term(p, t, ConfNorm::kL1).value, 0.5);
  EXPECT_DOUBLE_EQ(conf_term(p, t, ConfNorm::kL2).value, 0.25);
  EXPECT_EQ(conf_term(t, t, ConfNorm::kL1).value, 0.0);
}

TEST(SdfTerm, ConsistentWithSigmoidMapping) {
  // p_fg = sigmoid(-scale s*) reproduces s* inside the clamp.
  const std::vector<double> s = {-2.5, -1.0, -0.2, 0.3, 1.0, 2.9};
  const double scale = 1.0;
  Tensor4 z({1, 2, 1, 6});
  Tensor4 ref({1, 2, 1, 6});
  for (std::size_t i = 0; i < s.size(); ++i) {
    z(0, 1, 0, i) = -scale * s[i];  // logit of the foreground probability
    ref(0, 1, 0, i) = s[i];
    ref(0, 0, 0, i) = -s[i];
  }
  SdcConfig cfg;
  const LossResult r =
      sdf_term(LogitField(z), SignedDistanceField{ref, cfg.sdf_normalization}, cfg);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(Sdc, ZeroWeightsIsCrossEntropy) {
  std::mt19937_64 rng(42);
  const LabelField y = labels_of(rng, 2, 5, 5, 3);
  const LogitField z = logits_of(rng, y.field_shape());
  SdcConfig cfg;
  cfg.alpha = 0.0;
  cfg.lambda_sdf = 0.0;
  expect_same(sdc_loss(z, y, cfg), cross_entropy(z, y));
}

TEST(Sdc, ValueIsWeightedSumOfComponents) {
  std::mt19937_64 rng(43);
  for (int k = 0; k < 10; ++k) {
    const LabelField y = labels_of(rng, 1, 8, 8, 2);
    const LogitField z = logits_of(rng, y.field_shape());
    const SdcConfig cfg;
    const LossResult r = sdc_loss(z, y, cfg);
    const auto& c = r.components;
    EXPECT_NEAR(r.value - (c.ce + 0.1 * c.conf + 0.1 * c.sdf), 0.0, 1e-12);
    EXPECT_GE(r.value, 0.0);
  }
}

TEST(Sdc, AffineInLambda) {
  std::mt19937_64 rng(44);
  const LabelField y = labels_of(rng, 1, 6, 6, 2);
  const LogitField z = logits_of(rng, y.field_shape());
  SdcConfig cfg;
  cfg.lambda_sdf = 0.0;
  const double base = sdc_loss(z, y, cfg).value;
  cfg.lambda_sdf = 1.0;
  const LossResult one = sdc_loss(z, y, cfg);
  cfg.lambda_sdf = 2.5;
  EXPECT_NEAR(sdc_loss(z, y, cfg).value, base + 2.5 * one.components.sdf, 1e-12);
  EXPECT_GE(one.components.sdf, 0.0);
}

TEST(Sdc, DefaultConfigurationGradient) {
  std::mt19937_64 rng(45);
  const gradcheck::Instance inst = gradcheck::random_instance(rng, 1, 2, 8, 8);
  const auto r = gradcheck::check(gradcheck::make_loss("sdc", inst.labels), inst.logits,
                                  gradcheck::make_state("sdc", inst.labels));
  EXPECT_LE(r.rel_error, 1e-4);
  EXPECT_GT(r.kept, r.skipped);
}

TEST(Margin, IdentityEqualsSdcWithoutDistance) {
  std::mt19937_64 rng(46);
  const LabelField y = labels_of(rng, 1, 7, 7, 3);
  const LogitField z = logits_of(rng, y.field_shape());
  SdcConfig cfg;
  cfg.morph = MorphSpec{MorphOp::kIdentity, StructuringElement::square(3)};
  SdcConfig plain = cfg;
  plain.morph.reset();
  plain.lambda_sdf = 0.0;
  const LossResult want = sdc_loss(z, y, plain);
  for (bool on_morphed : {false, true}) {
    cfg.ce_on_morphed = on_morphed;
    const LossResult got = margin_loss(z, y, cfg);
    EXPECT_NEAR(got.value, want.value, 1e-15);
    for (std::size_t i = 0; i < got.grad.data().size(); ++i) {
      EXPECT_NEAR(got.grad.data()[i], want.grad.data()[i], 1e-15);
    }
  }
}

TEST(Margin, ZeroAlphaIsCrossEntropy) {
  std::mt19937_64 rng(47);
  const LabelField y = labels_of(rng, 1, 6, 6, 2);
  const LogitField z = logits_of(rng, y.field_shape());
  SdcConfig cfg;
  cfg.alpha = 0.0;
  cfg.morph = MorphSpec{MorphOp::kClosing, StructuringElement::square(3)};
  expect_same(margin_loss(z, y, cfg), cross_entropy(z, y));
}

TEST(Margin, RequiresMorph) {
  const LabelField y(1, 1, 2, 2, {0, 1});
  EXPECT_THROW(margin_loss(LogitField(Tensor4({1, 2, 1, 2}, 0.0)), y, SdcConfig{}), DomainError);
}

TEST(Baselines, ReduceToCrossEntropy) {
  std::mt19937_64 rng(48);
  const LabelField y = labels_of(rng, 1, 5, 5, 3);
  const LogitField z = logits_of(rng, y.field_shape());
  const LossResult ce = cross_entropy(z, y);
  const LossResult ls = baseline_loss(z, y, Baseline::label_smoothing(0.0));
  const LossResult fl = baseline_loss(z, y, Baseline::focal(0.0));
  EXPECT_NEAR(ls.value, ce.value, 1e-15);
  EXPECT_NEAR(fl.value, ce.value, 1e-15);
  for (std::size_t i = 0; i < ce.grad.data().size(); ++i) {
    EXPECT_NEAR(ls.grad.data()[i], ce.grad.data()[i], 1e-15);
    EXPECT_NEAR(fl.grad.data()[i], ce.grad.data()[i], 1e-15);
  }
}

TEST(Baselines, RejectBadParameters) {
  const LabelField y(1, 1, 1, 2, {0});
  const LogitField z(Tensor4({1, 2, 1, 1}, 0.0));
  EXPECT_THROW(baseline_loss(z, y, Baseline::label_smoothing(1.0)), DomainError);
  EXPECT_THROW(baseline_loss(z, y, Baseline::label_smoothing(-0.1)), DomainError);
  EXPECT_THROW(baseline_loss(z, y, Baseline::focal(-1.0)), DomainError);
}

TEST(Gradients, AllLossesMultiClass) {
  std::mt19937_64 rng(49);
  for (const std::string& name : gradcheck::loss_names()) {
    for (int k = 0; k < 3; ++k) {
      const gradcheck::Instance inst = gradcheck::random_instance(rng, 2, 4, 5, 5);
      const auto r = gradcheck::check(gradcheck::make_loss(name, inst.labels), inst.logits,
                                      gradcheck::make_state(name, inst.labels));
      EXPECT_LE(r.rel_error, 1e-4) << name;
    }
  }
}

TEST(InverseMapping, RoundTripsInsideClamp) {
  // prob_from_sdf followed by the clamped inverse sigmoid is the identity.
  const double scale = 2.0, tau = 3.0;
  for (double p = sigmoid(-scale * tau); p <= sigmoid(scale * tau); p += 0.01) {
    const double s = -std::log(p / (1.0 - p)) / scale;
    EXPECT_NEAR(sigmoid(-scale * s), p, 1e-9);
  }
}

TEST(BoundLoss, MatchesDirectCalls) {
  std::mt19937_64 rng(50);
  const LabelField y = labels_of(rng, 2, 6, 6, 2);
  const LogitField z = logits_of(rng, y.field_shape());
  LossSpec spec;
  spec.kind = LossKind::kSdc;
  expect_same(BoundLoss(spec, y)(z), sdc_loss(z, y, spec.cfg));
  spec.kind = LossKind::kFocal;
  expect_same(BoundLoss(spec, y)(z), baseline_loss(z, y, Baseline::focal(3.0)));
  EXPECT_EQ(spec.label(), "fl");
}

}  // namespace
}  // namespace calseg
