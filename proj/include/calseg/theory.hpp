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

// Sampled checks of the bounds linking distance-field error to probability
// error under the map p = sigmoid(-scale * s).

#ifndef CALSEG_THEORY_HPP_
#define CALSEG_THEORY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "calseg/distance_field.hpp"
#include "calseg/grid.hpp"

namespace calseg {

double sigmoid(double z);

// Binary field: channel 1 is sigmoid(-scale * s), channel 0 its complement.
// `s` holds one plane per batch element (shape (B, 1, H, W)).
ProbabilityField prob_from_sdf(const Tensor4& s, double scale);

struct BoundReport {
  std::string name;
  std::size_t samples = 0;
  double max_violation = 0.0;  // sup(lhs - rhs); <= 0 means the bound held
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;
  double witness_a = 0.0;      // worst-case input pair
  double witness_b = 0.0;
  double scale = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

// |sigmoid(-scale z1) - sigmoid(-scale z2)| <= scale/4 |z1 - z2| + 1e-12 on
// pairs drawn uniformly from [-50, 50]^2.
BoundReport check_lipschitz(double scale, std::size_t samples,
                            std::uint64_t seed);

// Perturbs the reference by uniform noise in [-delta, delta] and checks
// sup_x |p - p*| <= scale * delta / 4 + 1e-12.
BoundReport check_sdf_discrepancy(const RealGrid& reference, double delta,
                                  double scale, std::uint64_t seed);

struct TransferRow {
  double delta = 0.0;
  double median_ece = 0.0;
  double median_pece = 0.0;
  std::vector<double> ece;   // per (mask, noise seed) pair average, mask-major
  std::vector<double> pece;
};

struct TransferTable {
  std::vector<TransferRow> rows;
  // Median ECE never decreased along the delta schedule.
  bool monotone = true;
};

// For each mask k: p* = sigmoid(-scale s*_k) with s* unnormalized. For each
// delta and each noise seed r < noise_seeds, a noise field u with entries in
// U[-delta, delta] is drawn from seed (seed + k * noise_seeds + r). ECE and
// pECE of the binary predictions from s* + u and s* - u are measured against
// the mask and averaged into one sample. The same draws are reused across
// deltas, so the perturbation scales with delta.
TransferTable calibration_transfer_demo(const std::vector<BinaryMask>& masks,
                                        const std::vector<double>& deltas,
                                        double scale, int bins,
                                        std::uint64_t seed,
                                        std::size_t noise_seeds = 20);

}  // namespace calseg

#endif  // CALSEG_THEORY_HPP_
