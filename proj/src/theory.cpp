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

#include "calseg/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "calseg/metrics.hpp"

namespace calseg {
namespace {

constexpr double kSlack = 1e-12;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

ProbabilityField prob_from_sdf(const Tensor4& s, double scale) {
  if (!(scale > 0.0)) throw DomainError("sigmoid scale must be positive");
  if (s.shape().classes != 1) {
    throw ShapeError("prob_from_sdf expects one distance plane per image");
  }
  Shape4 shape = s.shape();
  shape.classes = 2;
  Tensor4 out(shape);
  for (std::size_t b = 0; b < shape.batch; ++b) {
    auto src = s.plane(b, 0);
    auto bg = out.plane(b, 0);
    auto fg = out.plane(b, 1);
    for (std::size_t i = 0; i < src.size(); ++i) {
      fg[i] = sigmoid(-scale * src[i]);
      bg[i] = 1.0 - fg[i];
    }
  }
  return ProbabilityField(std::move(out));
}

BoundReport check_lipschitz(double scale, std::size_t samples,
                            std::uint64_t seed) {
  if (samples < 1) throw DomainError("need at least one sample");
  if (!(scale > 0.0)) throw DomainError("sigmoid scale must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(-50.0, 50.0);
  BoundReport r{"lipschitz", samples};
  r.scale = scale;
  r.seed = seed;
  r.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    const double z1 = draw(rng);
    const double z2 = draw(rng);
    const double lhs = std::abs(sigmoid(-scale * z1) - sigmoid(-scale * z2));
    const double rhs = scale / 4.0 * std::abs(z1 - z2) + kSlack;
    if (lhs - rhs > r.max_violation) {
      r.max_violation = lhs - rhs;
      r.worst_lhs = lhs;
      r.worst_rhs = rhs;
      r.witness_a = z1;
      r.witness_b = z2;
    }
  }
  return r;
}

BoundReport check_sdf_discrepancy(const RealGrid& reference, double delta,
                                  double scale, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw DomainError("delta must be nonnegative");
  if (!(scale > 0.0)) throw DomainError("sigmoid scale must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-delta, delta);
  double sup = 0.0;
  BoundReport r{"sdf_discrepancy", reference.size()};
  r.scale = scale;
  r.delta = delta;
  r.seed = seed;
  for (double s_star : reference) {
    const double s = delta > 0.0 ? s_star + noise(rng) : s_star;
    const double gap = std::abs(sigmoid(-scale * s) - sigmoid(-scale * s_star));
    if (gap >= sup) {
      sup = gap;
      r.witness_a = s;
      r.witness_b = s_star;
    }
  }
  r.worst_lhs = sup;
  r.worst_rhs = scale * delta / 4.0 + kSlack;
  r.max_violation = r.worst_lhs - r.worst_rhs;
  return r;
}

TransferTable calibration_transfer_demo(const std::vector<BinaryMask>& masks,
                                        const std::vector<double>& deltas,
                                        double scale, int bins,
                                        std::uint64_t seed,
                                        std::size_t noise_seeds) {
  if (masks.empty()) throw DomainError("calibration demo needs masks");
  if (noise_seeds < 1) throw DomainError("calibration demo needs noise seeds");
  std::vector<RealGrid> references;
  std::vector<LabelField> labels;
  for (const BinaryMask& mask : masks) {
    references.push_back(sdf_from_mask(mask, Normalization::kNone));
    labels.emplace_back(1, mask.height(), mask.width(), 2,
                        std::vector<std::int32_t>(mask.begin(), mask.end()));
  }
  TransferTable table;
  for (double delta : deltas) {
    if (!(delta >= 0.0)) throw DomainError("delta must be nonnegative");
    TransferRow row;
    row.delta = delta;
    for (std::size_t k = 0; k < masks.size(); ++k) {
      const RealGrid& s_star = references[k];
      for (std::size_t r = 0; r < noise_seeds; ++r) {
        std::mt19937_64 rng(seed + k * noise_seeds + r);
        std::uniform_real_distribution<double> noise(-delta, delta);
        std::vector<double> u(s_star.size(), 0.0);
        if (delta > 0.0) {
          for (double& v : u) v = noise(rng);
        }
        // Antithetic pair: +u and -u.
        double e = 0.0, pe = 0.0;
        for (double sign : {1.0, -1.0}) {
          Tensor4 s(Shape4{1, 1, s_star.height(), s_star.width()});
          auto dst = s.plane(0, 0);
          for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] = s_star.data()[i] + sign * u[i];
          }
          const ProbabilityField p = prob_from_sdf(s, scale);
          e += ece(p, labels[k], bins).value_or(0.0);
          pe += pece(p, labels[k], bins, 2.0);
        }
        row.ece.push_back(0.5 * e);
        row.pece.push_back(0.5 * pe);
      }
    }
    row.median_ece = median(row.ece);
    row.median_pece = median(row.pece);
    if (!table.rows.empty() && row.median_ece < table.rows.back().median_ece) {
      table.monotone = false;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace calseg
