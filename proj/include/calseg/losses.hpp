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

// Segmentation losses with analytic gradients with respect to the logits.
//
// Every loss is a mean. Cross-entropy and focal average over the N pixels of
// the batch; the local calibration term averages over N*C (pixel, class)
// entries; the distance term averages over N*(C-1) foreground entries.

#ifndef CALSEG_LOSSES_HPP_
#define CALSEG_LOSSES_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "calseg/distance_field.hpp"
#include "calseg/grid.hpp"
#include "calseg/morphology.hpp"
#include "calseg/smoothing.hpp"

namespace calseg {

enum class ConfNorm { kL1, kL2 };

std::string_view to_string(ConfNorm norm);
std::optional<ConfNorm> parse_conf_norm(std::string_view tag);

struct MorphSpec {
  MorphOp op = MorphOp::kIdentity;
  StructuringElement se = StructuringElement::square(3);
};

struct SdcConfig {
  double alpha = 0.1;       // weight of the local calibration term
  double lambda_sdf = 0.1;  // weight of the distance penalty
  ConfNorm conf_norm = ConfNorm::kL1;
  double sdf_scale = 1.0;   // slope of the distance -> probability sigmoid
  double sdf_clamp = 3.0;   // symmetric clamp on both distance fields
  Normalization sdf_normalization = Normalization::kMaxAbs;
  SmoothingKernel kernel = make_kernel(KernelKind::kMean, 3);
  std::optional<MorphSpec> morph;
  bool ce_on_morphed = false;

  void validate() const;
};

struct LossComponents {
  double ce = 0.0;
  double conf = 0.0;
  double sdf = 0.0;
};

struct LossResult {
  double value = 0.0;
  LossComponents components;
  Tensor4 grad;  // d value / d logits
};

// Gradient with respect to the logits given the gradient with respect to
// p = softmax(z): dz_j = p_j * (g_j - sum_c g_c p_c).
Tensor4 softmax_backward(const ProbabilityField& probs,
                         const Tensor4& grad_probs);

LossResult cross_entropy(const LogitField& logits,
                         const SoftTargetField& targets);
LossResult cross_entropy(const LogitField& logits, const LabelField& labels);

// Mean |p - t| (l1) or (p - t)^2 (l2) over (pixel, class) entries. The
// gradient is taken through the softmax, which depends on p alone.
LossResult conf_term(const ProbabilityField& probs,
                     const SoftTargetField& targets, ConfNorm norm);

// Predicted distance per foreground class is
//   clamp(-logit(p_c) / sdf_scale, -tau, tau), p_c clamped to [1e-7, 1-1e-7],
// compared in l1 against the clamped reference field.
LossResult sdf_term(const LogitField& logits,
                    const SignedDistanceField& reference,
                    const SdcConfig& cfg);

// Targets derived from the labels once, reusable across evaluations.
struct SdcTargets {
  SoftTargetField smoothed;
  SignedDistanceField distance;
};
SdcTargets prepare_sdc_targets(const LabelField& labels, const SdcConfig& cfg);

LossResult sdc_loss(const LogitField& logits, const LabelField& labels,
                    const SdcConfig& cfg);
LossResult sdc_loss(const LogitField& logits, const LabelField& labels,
                    const SdcTargets& targets, const SdcConfig& cfg);

struct MarginTargets {
  LabelField ce_labels;
  SoftTargetField smoothed;
  std::size_t uniform_pixels = 0;
};
// Requires cfg.morph.
MarginTargets prepare_margin_targets(const LabelField& labels,
                                     const SdcConfig& cfg);

// CE(z, t) + alpha * ||p - smoothed morphed targets||, with t the original
// labels unless cfg.ce_on_morphed.
LossResult margin_loss(const LogitField& logits, const LabelField& labels,
                       const SdcConfig& cfg);
LossResult margin_loss(const LogitField& logits, const MarginTargets& targets,
                       const SdcConfig& cfg);

struct Baseline {
  enum class Kind { kLabelSmoothing, kFocal };
  Kind kind;
  double param;  // epsilon in [0, 1) or gamma >= 0

  static Baseline label_smoothing(double epsilon) {
    return {Kind::kLabelSmoothing, epsilon};
  }
  static Baseline focal(double gamma) { return {Kind::kFocal, gamma}; }
};

LossResult baseline_loss(const LogitField& logits, const LabelField& labels,
                         const Baseline& baseline);

// A configured loss bound to one label batch; targets are computed once.
enum class LossKind { kCrossEntropy, kSdc, kMargin, kLabelSmoothing, kFocal };

struct LossSpec {
  LossKind kind = LossKind::kCrossEntropy;
  SdcConfig cfg;
  double epsilon = 0.1;
  double gamma = 3.0;

  // Short row label such as "ce", "sdc", "margin:closing", "fl".
  std::string label() const;
};

std::optional<LossKind> parse_loss_kind(std::string_view tag);

class BoundLoss {
 public:
  BoundLoss(LossSpec spec, LabelField labels);

  LossResult operator()(const LogitField& logits) const;
  const LossSpec& spec() const { return spec_; }
  const LabelField& labels() const { return labels_; }

 private:
  LossSpec spec_;
  LabelField labels_;
  std::optional<SdcTargets> sdc_;
  std::optional<MarginTargets> margin_;
};

}  // namespace calseg

#endif  // CALSEG_LOSSES_HPP_
