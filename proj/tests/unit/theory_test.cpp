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

#include "calseg/distance_field.hpp"
#include "calseg/metrics.hpp"
#include "calseg/theory.hpp"

namespace calseg {
namespace {

BinaryMask disk(std::size_t n, double cr, double cc, double rad) {
  BinaryMask m(n, n, std::uint8_t{0});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      m(r, c) = std::hypot(r - cr, c - cc) <= rad;
    }
  }
  return m;
}

TEST(ProbFromSdf, Examples) {
  const Tensor4 s({1, 1, 1, 3}, {0.0, -std::log(3.0), 2.0});
  const ProbabilityField p = prob_from_sdf(s, 1.0);
  EXPECT_EQ(p(0, 1, 0, 0), 0.5);
  EXPECT_NEAR(p(0, 1, 0, 1), 0.75, 1e-15);
  EXPECT_NEAR(p(0, 0, 0, 2) + p(0, 1, 0, 2), 1.0, 1e-15);
  EXPECT_THROW(prob_from_sdf(s, 0.0), DomainError);
}

TEST(ProbFromSdf, Monotone) {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> n(0.0, 3.0);
  std::uniform_real_distribution<double> gap(1e-3, 2.0);
  Tensor4 a({1, 1, 5, 5}), b({1, 1, 5, 5});
  for (std::size_t i = 0; i < 25; ++i) {
    a.data()[i] = n(rng);
    b.data()[i] = a.data()[i] + gap(rng);
  }
  const ProbabilityField pa = prob_from_sdf(a, 1.5), pb = prob_from_sdf(b, 1.5);
  for (std::size_t i = 0; i < 25; ++i) EXPECT_GT(pa.plane(0, 1)[i], pb.plane(0, 1)[i]);
}

TEST(Lipschitz, HoldsAtEveryScale) {
  for (double scale : {0.5, 1.0, 2.0, 4.0}) {
    const BoundReport r = check_lipschitz(scale, 100000, 7);
    EXPECT_LE(r.max_violation, 0.0) << scale;
    EXPECT_EQ(r.samples, 100000u);
  }
}

TEST(Lipschitz, TightAtOrigin) {
  const double h = 1e-6;
  for (double scale : {0.5, 1.0, 4.0}) {
    const double slope = (sigmoid(-scale * -h) - sigmoid(-scale * h)) / (2 * h);
    EXPECT_NEAR(slope / (scale / 4.0), 1.0, 1e-6);
  }
  EXPECT_EQ(sigmoid(0.3) - sigmoid(0.3), 0.0);
}

TEST(Discrepancy, ZeroDeltaAndBound) {
  const RealGrid ref = sdf_from_mask(disk(24, 11.5, 12, 6), Normalization::kNone);
  const BoundReport zero = check_sdf_discrepancy(ref, 0.0, 1.0, 3);
  EXPECT_EQ(zero.worst_lhs, 0.0);
  const BoundReport half = check_sdf_discrepancy(ref, 0.5, 1.0, 3);
  EXPECT_LE(half.max_violation, 0.0);
  const BoundReport twice = check_sdf_discrepancy(ref, 0.5, 2.0, 3);
  EXPECT_NEAR(twice.worst_rhs - 1e-12, 2.0 * (half.worst_rhs - 1e-12), 1e-15);
}

TEST(Transfer, BaselineRowAndTrend) {
  std::vector<BinaryMask> masks;
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> u(9.0, 22.0), r(4.0, 9.0);
  for (int k = 0; k < 20; ++k) masks.push_back(disk(32, u(rng), u(rng), r(rng)));
  const TransferTable t = calibration_transfer_demo(masks, {0.0, 0.25, 0.5, 1.0}, 1.0, 10, 5);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_TRUE(t.monotone);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_GT(t.rows[i].median_ece, t.rows[i - 1].median_ece);
  // Delta 0 is p* itself.
  Tensor4 s({1, 1, 32, 32});
  const RealGrid ref = sdf_from_mask(masks[0], Normalization::kNone);
  std::copy(ref.begin(), ref.end(), s.data().begin());
  const LabelField y(1, 32, 32, 2, std::vector<std::int32_t>(masks[0].begin(), masks[0].end()));
  EXPECT_EQ(t.rows[0].ece[0], *ece(prob_from_sdf(s, 1.0), y, 10));
}

TEST(Transfer, ContinuousAtZero) {
  const std::vector<BinaryMask> masks = {disk(32, 15, 16, 8)};
  const TransferTable t = calibration_transfer_demo(masks, {0.0, 1e-3}, 1.0, 10, 9);
  EXPECT_LE(std::abs(t.rows[1].median_ece - t.rows[0].median_ece), 1e-3);
}

}  // namespace
}  // namespace calseg
