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

// Neighborhood-filtered soft targets for the local calibration and margin
// terms.

#ifndef CALSEG_SMOOTHING_HPP_
#define CALSEG_SMOOTHING_HPP_

#include <optional>
#include <string_view>
#include <vector>

#include "calseg/grid.hpp"
#include "calseg/morphology.hpp"

namespace calseg {

enum class KernelKind { kMean, kGaussian };

std::string_view to_string(KernelKind kind);
std::optional<KernelKind> parse_kernel_kind(std::string_view tag);

// Normalized square filter; weights are nonnegative and sum to 1.
struct SmoothingKernel {
  KernelKind kind = KernelKind::kMean;
  std::size_t size = 3;
  double sigma = 1.0;
  std::vector<double> weights;  // size * size, row-major

  double weight(std::size_t r, std::size_t c) const {
    return weights[r * size + c];
  }
};

// Throws DomainError on even size or (gaussian) nonpositive sigma.
SmoothingKernel make_kernel(KernelKind kind, std::size_t size,
                            double sigma = 1.0);

// Per-class correlation with replicate-border padding.
SoftTargetField smooth_targets(const ProbabilityField& one_hot_field,
                               const SmoothingKernel& kernel);

struct MorphTargets {
  SoftTargetField targets;
  // Pixels whose morphed class stack was empty and got a uniform vector.
  std::size_t uniform_pixels = 0;
};

// y -> per-class morphology -> per-pixel renormalized stack -> smoothing.
// Overlapping claims are split evenly; empty stacks become uniform.
MorphTargets morph_smooth_targets(const LabelField& labels, MorphOp op,
                                  const StructuringElement& se,
                                  const SmoothingKernel& kernel);

}  // namespace calseg

#endif  // CALSEG_SMOOTHING_HPP_
