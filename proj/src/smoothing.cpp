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

#include "calseg/smoothing.hpp"

#include <algorithm>
#include <cmath>

namespace calseg {

std::string_view to_string(KernelKind kind) {
  return kind == KernelKind::kGaussian ? "gaussian" : "mean";
}

std::optional<KernelKind> parse_kernel_kind(std::string_view tag) {
  if (tag == "mean") return KernelKind::kMean;
  if (tag == "gaussian") return KernelKind::kGaussian;
  return std::nullopt;
}

SmoothingKernel make_kernel(KernelKind kind, std::size_t size, double sigma) {
  if (size == 0 || size % 2 == 0) {
    throw DomainError("kernel size must be odd, got " + std::to_string(size));
  }
  if (kind == KernelKind::kGaussian && !(sigma > 0.0)) {
    throw DomainError("gaussian kernel sigma must be positive");
  }
  SmoothingKernel k{kind, size, sigma, std::vector<double>(size * size)};
  if (kind == KernelKind::kMean) {
    std::fill(k.weights.begin(), k.weights.end(),
              1.0 / static_cast<double>(size * size));
    return k;
  }
  const double r = static_cast<double>(size / 2);
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      const double dy = static_cast<double>(i) - r;
      const double dx = static_cast<double>(j) - r;
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      k.weights[i * size + j] = v;
      total += v;
    }
  }
  for (double& v : k.weights) v /= total;
  return k;
}

SoftTargetField smooth_targets(const ProbabilityField& one_hot_field,
                               const SmoothingKernel& kernel) {
  const Shape4& s = one_hot_field.shape();
  Tensor4 out(s);
  const long radius = static_cast<long>(kernel.size / 2);
  const long h = static_cast<long>(s.height);
  const long w = static_cast<long>(s.width);
  // Summed in the same order as the correlation so a constant input maps to
  // itself exactly.
  double total = 0.0;
  for (double v : kernel.weights) total += v;
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t c = 0; c < s.classes; ++c) {
      auto src = one_hot_field.plane(b, c);
      auto dst = out.plane(b, c);
      for (long r = 0; r < h; ++r) {
        for (long col = 0; col < w; ++col) {
          double acc = 0.0;
          for (long i = -radius; i <= radius; ++i) {
            const long sr = std::clamp(r + i, 0L, h - 1);
            for (long j = -radius; j <= radius; ++j) {
              const long sc = std::clamp(col + j, 0L, w - 1);
              acc += kernel.weight(static_cast<std::size_t>(i + radius),
                                   static_cast<std::size_t>(j + radius)) *
                     src[static_cast<std::size_t>(sr * w + sc)];
            }
          }
          dst[static_cast<std::size_t>(r * w + col)] = acc / total;
        }
      }
    }
  }
  return SoftTargetField(std::move(out));
}

MorphTargets morph_smooth_targets(const LabelField& labels, MorphOp op,
                                  const StructuringElement& se,
                                  const SmoothingKernel& kernel) {
  const Shape4 shape = labels.field_shape();
  Tensor4 stack(shape);
  std::size_t uniform = 0;
  for (std::size_t b = 0; b < shape.batch; ++b) {
    const MorphedClasses m = morph_classes(labels, b, op, se);
    for (std::size_t i = 0; i < shape.plane(); ++i) {
      std::size_t claims = 0;
      for (std::size_t c = 0; c < shape.classes; ++c) {
        claims += m.stack[c].data()[i];
      }
      for (std::size_t c = 0; c < shape.classes; ++c) {
        double v;
        if (claims == 0) {
          v = 1.0 / static_cast<double>(shape.classes);
        } else {
          v = static_cast<double>(m.stack[c].data()[i]) /
              static_cast<double>(claims);
        }
        stack.plane(b, c)[i] = v;
      }
      if (claims == 0) ++uniform;
    }
  }
  return MorphTargets{smooth_targets(ProbabilityField(std::move(stack)), kernel),
                      uniform};
}

}  // namespace calseg
