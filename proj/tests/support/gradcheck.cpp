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


#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "calseg/smoothing.hpp"

namespace gradcheck {
namespace {

using namespace calseg;

constexpr double kClip = 1e-7;

int sign(double v) { return (v > 0.0) - (v < 0.0); }

void conf_state(const ProbabilityField& p, const SoftTargetField& t,
                std::vector<int>& out) {
  for (std::size_t i = 0; i < p.data().size(); ++i) {
    out.push_back(sign(p.data()[i] - t.data()[i]));
  }
}

// Clip, clamp and residual-sign state of the distance term.
void sdf_state(const ProbabilityField& p, const SignedDistanceField& ref,
               double scale, double tau, std::vector<int>& out) {
  const Shape4& s = p.shape();
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t c = 1; c < s.classes; ++c) {
      auto pc = p.plane(b, c);
      auto rc = ref.values.plane(b, c);
      for (std::size_t i = 0; i < pc.size(); ++i) {
        const double q = pc[i];
        out.push_back(q < kClip ? -1 : (q > 1.0 - kClip ? 1 : 0));
        const double qc = std::clamp(q, kClip, 1.0 - kClip);
        const double raw = -std::log(qc / (1.0 - qc)) / scale;
        out.push_back(raw < -tau ? -1 : (raw > tau ? 1 : 0));
        const double shat = std::clamp(raw, -tau, tau);
        out.push_back(sign(shat - std::clamp(rc[i], -tau, tau)));
      }
    }
  }
}

SdcConfig default_cfg() { return SdcConfig{}; }

}  // namespace

Result check(const LossFn& loss, const LogitField& z, const StateFn& state,
             double step) {
  const LossResult base = loss(z);
  const std::vector<int> s0 = state ? state(z) : std::vector<int>{};
  std::vector<double> x(z.data().begin(), z.data().end());
  const Shape4 shape = z.shape();
  Result r;
  double diff2 = 0.0, num2 = 0.0, ana2 = 0.0;
  std::vector<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const LogitField up(Tensor4(shape, probe));
    probe[i] = x[i] - step;
    const LogitField down(Tensor4(shape, probe));
    probe[i] = x[i];
    if (state && (state(up) != s0 || state(down) != s0)) {
      ++r.skipped;
      continue;
    }
    const double numeric = (loss(up).value - loss(down).value) / (2.0 * step);
    const double analytic = base.grad.data()[i];
    diff2 += (numeric - analytic) * (numeric - analytic);
    num2 += numeric * numeric;
    ana2 += analytic * analytic;
    ++r.kept;
  }
  const double scale = std::max({std::sqrt(num2), std::sqrt(ana2), 1e-12});
  r.rel_error = std::sqrt(diff2) / scale;
  return r;
}

Instance random_instance(std::mt19937_64& rng, std::size_t batch,
                         std::size_t classes, std::size_t h, std::size_t w,
                         double spread) {
  std::normal_distribution<double> normal(0.0, spread);
  std::uniform_int_distribution<int> cls(0, static_cast<int>(classes) - 1);
  Tensor4 z(Shape4{batch, classes, h, w});
  for (double& v : z.data()) v = normal(rng);
  std::vector<std::int32_t> y(batch * h * w);
  for (auto& v : y) v = cls(rng);
  return Instance{LogitField(std::move(z)),
                  LabelField(batch, h, w, static_cast<int>(classes), std::move(y))};
}

std::vector<std::string> loss_names() {
  return {"ce", "conf_l1", "conf_l2", "sdf", "sdc", "margin_closing", "ls", "fl"};
}

LossFn make_loss(const std::string& name, const LabelField& labels) {
  if (name == "ce") {
    return [labels](const LogitField& z) { return cross_entropy(z, labels); };
  }
  if (name == "conf_l1" || name == "conf_l2") {
    const ConfNorm norm = name == "conf_l1" ? ConfNorm::kL1 : ConfNorm::kL2;
    const SoftTargetField t =
        smooth_targets(one_hot(labels), make_kernel(KernelKind::kMean, 3));
    return [t, norm](const LogitField& z) {
      return conf_term(softmax(z), t, norm);
    };
  }
  if (name == "sdf") {
    const SdcConfig cfg = default_cfg();
    const SignedDistanceField ref = sdf_from_labels(labels, cfg.sdf_normalization);
    return [ref, cfg](const LogitField& z) { return sdf_term(z, ref, cfg); };
  }
  if (name == "sdc" || name == "margin_closing" || name == "ls" || name == "fl") {
    LossSpec spec;
    if (name == "sdc") spec.kind = LossKind::kSdc;
    if (name == "ls") spec.kind = LossKind::kLabelSmoothing;
    if (name == "fl") spec.kind = LossKind::kFocal;
    if (name == "margin_closing") {
      spec.kind = LossKind::kMargin;
      spec.cfg.morph = MorphSpec{MorphOp::kClosing, StructuringElement::square(3)};
    }
    const auto bound = std::make_shared<BoundLoss>(spec, labels);
    return [bound](const LogitField& z) { return (*bound)(z); };
  }
  return {};
}

StateFn make_state(const std::string& name, const LabelField& labels) {
  const SdcConfig cfg = default_cfg();
  if (name == "conf_l1" || name == "sdc") {
    const SdcTargets t = prepare_sdc_targets(labels, cfg);
    const bool with_sdf = name == "sdc";
    return [t, cfg, with_sdf](const LogitField& z) {
      std::vector<int> out;
      const ProbabilityField p = softmax(z);
      conf_state(p, t.smoothed, out);
      if (with_sdf) sdf_state(p, t.distance, cfg.sdf_scale, cfg.sdf_clamp, out);
      return out;
    };
  }
  if (name == "sdf") {
    const SignedDistanceField ref = sdf_from_labels(labels, cfg.sdf_normalization);
    return [ref, cfg](const LogitField& z) {
      std::vector<int> out;
      sdf_state(softmax(z), ref, cfg.sdf_scale, cfg.sdf_clamp, out);
      return out;
    };
  }
  if (name == "margin_closing") {
    SdcConfig mc = cfg;
    mc.morph = MorphSpec{MorphOp::kClosing, StructuringElement::square(3)};
    const MarginTargets t = prepare_margin_targets(labels, mc);
    return [t](const LogitField& z) {
      std::vector<int> out;
      conf_state(softmax(z), t.smoothed, out);
      return out;
    };
  }
  return {};
}

}  // namespace gradcheck
