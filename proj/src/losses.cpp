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

#include "calseg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace calseg {
namespace {

constexpr double kProbFloor = 1e-7;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_same(const Shape4& a, const Shape4& b, const char* what) {
  if (!(a == b)) {
    throw ShapeError(std::string(what) + ": shape " + to_string(a) +
                     " does not match " + to_string(b));
  }
}

// log softmax of the class vector at one pixel.
void log_softmax_at(const Tensor4& z, std::size_t b, std::size_t h,
                    std::size_t w, std::vector<double>& out) {
  const std::size_t classes = z.shape().classes;
  double top = z(b, 0, h, w);
  for (std::size_t c = 1; c < classes; ++c) top = std::max(top, z(b, c, h, w));
  double total = 0.0;
  for (std::size_t c = 0; c < classes; ++c) total += std::exp(z(b, c, h, w) - top);
  const double lse = top + std::log(total);
  for (std::size_t c = 0; c < classes; ++c) out[c] = z(b, c, h, w) - lse;
}

LossResult combine(const LossResult& ce, double alpha, const LossResult& conf,
                   double lambda, const LossResult* sdf) {
  LossResult out;
  out.components.ce = ce.value;
  out.components.conf = conf.value;
  out.components.sdf = sdf ? sdf->value : 0.0;
  out.value = ce.value + alpha * conf.value;
  if (sdf) out.value = out.value + lambda * sdf->value;
  out.grad = ce.grad;
  auto g = out.grad.data();
  auto gc = conf.grad.data();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] + alpha * gc[i];
  if (sdf) {
    auto gs = sdf->grad.data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] + lambda * gs[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(ConfNorm norm) {
  return norm == ConfNorm::kL2 ? "l2" : "l1";
}

std::optional<ConfNorm> parse_conf_norm(std::string_view tag) {
  if (tag == "l1") return ConfNorm::kL1;
  if (tag == "l2") return ConfNorm::kL2;
  return std::nullopt;
}

void SdcConfig::validate() const {
  if (!(alpha >= 0.0) || !(lambda_sdf >= 0.0)) {
    throw DomainError("loss weights must be nonnegative");
  }
  if (!(sdf_scale > 0.0)) throw DomainError("sdf_scale must be positive");
  if (!(sdf_clamp > 0.0)) throw DomainError("sdf_clamp must be positive");
  if (kernel.weights.size() != kernel.size * kernel.size || kernel.size % 2 == 0) {
    throw DomainError("smoothing kernel is malformed");
  }
}

Tensor4 softmax_backward(const ProbabilityField& probs,
                         const Tensor4& grad_probs) {
  const Shape4& s = probs.shape();
  require_same(s, grad_probs.shape(), "softmax_backward");
  Tensor4 out(s);
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t h = 0; h < s.height; ++h) {
      for (std::size_t w = 0; w < s.width; ++w) {
        double dot = 0.0;
        for (std::size_t c = 0; c < s.classes; ++c) {
          dot += grad_probs(b, c, h, w) * probs(b, c, h, w);
        }
        for (std::size_t c = 0; c < s.classes; ++c) {
          out(b, c, h, w) = probs(b, c, h, w) * (grad_probs(b, c, h, w) - dot);
        }
      }
    }
  }
  return out;
}

LossResult cross_entropy(const LogitField& logits,
                         const SoftTargetField& targets) {
  const Shape4& s = logits.shape();
  require_same(s, targets.shape(), "cross_entropy");
  const double n = static_cast<double>(s.pixels());
  LossResult out;
  out.grad = Tensor4(s);
  std::vector<double> logp(s.classes);
  double total = 0.0;
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t h = 0; h < s.height; ++h) {
      for (std::size_t w = 0; w < s.width; ++w) {
        log_softmax_at(logits, b, h, w, logp);
        double mass = 0.0;
        for (std::size_t c = 0; c < s.classes; ++c) {
          const double t = targets(b, c, h, w);
          if (t != 0.0) total -= t * logp[c];
          mass += t;
        }
        for (std::size_t c = 0; c < s.classes; ++c) {
          out.grad(b, c, h, w) =
              (std::exp(logp[c]) * mass - targets(b, c, h, w)) / n;
        }
      }
    }
  }
  out.value = total / n;
  out.components.ce = out.value;
  return out;
}

LossResult cross_entropy(const LogitField& logits, const LabelField& labels) {
  return cross_entropy(logits, one_hot(labels));
}

LossResult conf_term(const ProbabilityField& probs,
                     const SoftTargetField& targets, ConfNorm norm) {
  const Shape4& s = probs.shape();
  require_same(s, targets.shape(), "conf_term");
  const double count = static_cast<double>(s.size());
  Tensor4 grad_p(s);
  auto p = probs.data();
  auto t = targets.data();
  auto g = grad_p.data();
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    if (norm == ConfNorm::kL1) {
      total += std::abs(d);
      g[i] = sign(d) / count;
    } else {
      total += d * d;
      g[i] = 2.0 * d / count;
    }
  }
  LossResult out;
  out.value = total / count;
  out.components.conf = out.value;
  out.grad = softmax_backward(probs, grad_p);
  return out;
}

LossResult sdf_term(const LogitField& logits,
                    const SignedDistanceField& reference,
                    const SdcConfig& cfg) {
  const Shape4& s = logits.shape();
  require_same(s, reference.values.shape(), "sdf_term");
  const ProbabilityField probs = softmax(logits);
  const double tau = cfg.sdf_clamp;
  const double inv_scale = 1.0 / cfg.sdf_scale;
  const double count = static_cast<double>(s.pixels() * (s.classes - 1));
  Tensor4 grad_p(s);
  double total = 0.0;
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t c = 1; c < s.classes; ++c) {
      auto p = probs.plane(b, c);
      auto ref = reference.values.plane(b, c);
      auto g = grad_p.plane(b, c);
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double pc = std::clamp(p[i], kProbFloor, 1.0 - kProbFloor);
        const double raw = -inv_scale * std::log(pc / (1.0 - pc));
        const double predicted = std::clamp(raw, -tau, tau);
        const double diff = predicted - std::clamp(ref[i], -tau, tau);
        total += std::abs(diff);
        const bool live = p[i] > kProbFloor && p[i] < 1.0 - kProbFloor &&
                          raw > -tau && raw < tau;
        if (live) {
          g[i] = sign(diff) * (-inv_scale / (pc * (1.0 - pc))) / count;
        }
      }
    }
  }
  LossResult out;
  out.value = total / count;
  out.components.sdf = out.value;
  out.grad = softmax_backward(probs, grad_p);
  return out;
}

SdcTargets prepare_sdc_targets(const LabelField& labels, const SdcConfig& cfg) {
  return SdcTargets{smooth_targets(one_hot(labels), cfg.kernel),
                    sdf_from_labels(labels, cfg.sdf_normalization)};
}

LossResult sdc_loss(const LogitField& logits, const LabelField& labels,
                    const SdcConfig& cfg) {
  cfg.validate();
  return sdc_loss(logits, labels, prepare_sdc_targets(labels, cfg), cfg);
}

LossResult sdc_loss(const LogitField& logits, const LabelField& labels,
                    const SdcTargets& targets, const SdcConfig& cfg) {
  const LossResult ce = cross_entropy(logits, labels);
  const LossResult conf =
      conf_term(softmax(logits), targets.smoothed, cfg.conf_norm);
  const LossResult sdf = sdf_term(logits, targets.distance, cfg);
  return combine(ce, cfg.alpha, conf, cfg.lambda_sdf, &sdf);
}

MarginTargets prepare_margin_targets(const LabelField& labels,
                                     const SdcConfig& cfg) {
  if (!cfg.morph) throw DomainError("margin loss needs a morphological op");
  MorphTargets m =
      morph_smooth_targets(labels, cfg.morph->op, cfg.morph->se, cfg.kernel);
  LabelField ce_labels = cfg.ce_on_morphed
                             ? morph_labels(labels, cfg.morph->op, cfg.morph->se)
                             : labels;
  return MarginTargets{std::move(ce_labels), std::move(m.targets),
                       m.uniform_pixels};
}

LossResult margin_loss(const LogitField& logits, const LabelField& labels,
                       const SdcConfig& cfg) {
  cfg.validate();
  return margin_loss(logits, prepare_margin_targets(labels, cfg), cfg);
}

LossResult margin_loss(const LogitField& logits, const MarginTargets& targets,
                       const SdcConfig& cfg) {
  const LossResult ce = cross_entropy(logits, targets.ce_labels);
  const LossResult conf =
      conf_term(softmax(logits), targets.smoothed, cfg.conf_norm);
  return combine(ce, cfg.alpha, conf, 0.0, nullptr);
}

LossResult baseline_loss(const LogitField& logits, const LabelField& labels,
                         const Baseline& baseline) {
  const Shape4& s = logits.shape();
  require_same(s, labels.field_shape(), "baseline_loss");
  if (baseline.kind == Baseline::Kind::kLabelSmoothing) {
    const double eps = baseline.param;
    if (!(eps >= 0.0 && eps < 1.0)) {
      throw DomainError("label smoothing epsilon must lie in [0, 1)");
    }
    if (eps == 0.0) return cross_entropy(logits, labels);
    ProbabilityField t = one_hot(labels);
    const double floor = eps / static_cast<double>(s.classes);
    for (double& v : t.data()) v = (1.0 - eps) * v + floor;
    return cross_entropy(logits, t);
  }

  const double gamma = baseline.param;
  if (!(gamma >= 0.0)) throw DomainError("focal gamma must be nonnegative");
  if (gamma == 0.0) return cross_entropy(logits, labels);
  const double n = static_cast<double>(s.pixels());
  LossResult out;
  out.grad = Tensor4(s);
  std::vector<double> logp(s.classes);
  double total = 0.0;
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t h = 0; h < s.height; ++h) {
      for (std::size_t w = 0; w < s.width; ++w) {
        log_softmax_at(logits, b, h, w, logp);
        const auto y = static_cast<std::size_t>(labels(b, h, w));
        const double lq = logp[y];
        const double q = std::exp(lq);
        const double miss = 1.0 - q;
        total -= std::pow(miss, gamma) * lq;
        // dL/dq for L = -(1-q)^gamma log q.
        double dq = -std::pow(miss, gamma) / q;
        if (miss > 0.0) dq += gamma * std::pow(miss, gamma - 1.0) * lq;
        for (std::size_t c = 0; c < s.classes; ++c) {
          const double pc = std::exp(logp[c]);
          const double dqdz = q * ((c == y ? 1.0 : 0.0) - pc);
          out.grad(b, c, h, w) = dq * dqdz / n;
        }
      }
    }
  }
  out.value = total / n;
  out.components.ce = out.value;
  return out;
}

std::string LossSpec::label() const {
  switch (kind) {
    case LossKind::kCrossEntropy: return "ce";
    case LossKind::kSdc: return "sdc";
    case LossKind::kMargin:
      return "margin:" +
             std::string(to_string(cfg.morph ? cfg.morph->op : MorphOp::kIdentity));
    case LossKind::kLabelSmoothing: return "ls";
    case LossKind::kFocal: return "fl";
  }
  return "unknown";
}

std::optional<LossKind> parse_loss_kind(std::string_view tag) {
  if (tag == "ce") return LossKind::kCrossEntropy;
  if (tag == "sdc") return LossKind::kSdc;
  if (tag == "margin") return LossKind::kMargin;
  if (tag == "ls") return LossKind::kLabelSmoothing;
  if (tag == "fl") return LossKind::kFocal;
  return std::nullopt;
}

BoundLoss::BoundLoss(LossSpec spec, LabelField labels)
    : spec_(std::move(spec)), labels_(std::move(labels)) {
  spec_.cfg.validate();
  if (spec_.kind == LossKind::kSdc) {
    sdc_ = prepare_sdc_targets(labels_, spec_.cfg);
  } else if (spec_.kind == LossKind::kMargin) {
    margin_ = prepare_margin_targets(labels_, spec_.cfg);
  }
}

LossResult BoundLoss::operator()(const LogitField& logits) const {
  switch (spec_.kind) {
    case LossKind::kCrossEntropy: return cross_entropy(logits, labels_);
    case LossKind::kSdc: return sdc_loss(logits, labels_, *sdc_, spec_.cfg);
    case LossKind::kMargin: return margin_loss(logits, *margin_, spec_.cfg);
    case LossKind::kLabelSmoothing:
      return baseline_loss(logits, labels_, Baseline::label_smoothing(spec_.epsilon));
    case LossKind::kFocal:
      return baseline_loss(logits, labels_, Baseline::focal(spec_.gamma));
  }
  throw DomainError("unknown loss kind");
}

}  // namespace calseg
