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


#include <random>

#include <gtest/gtest.h>

#include "calseg/morphology.hpp"
#include "oracles.hpp"

namespace calseg {
namespace {

BinaryMask from(const oracle::Mask& m) {
  return BinaryMask(static_cast<std::size_t>(m.h), static_cast<std::size_t>(m.w), m.v);
}

BinaryMask square_in(std::size_t n, std::size_t lo, std::size_t hi) {
  BinaryMask m(n, n, std::uint8_t{0});
  for (std::size_t r = lo; r <= hi; ++r) {
    for (std::size_t c = lo; c <= hi; ++c) m(r, c) = 1;
  }
  return m;
}

TEST(StructuringElement, Validates) {
  EXPECT_THROW(StructuringElement::square(2), DomainError);
  EXPECT_THROW(StructuringElement(3, std::vector<std::uint8_t>(9, 0)), DomainError);
  EXPECT_NO_THROW(StructuringElement::square(1));
}

TEST(Dilate, SingleCenterPixelFillsGrid) {
  BinaryMask a(3, 3, std::uint8_t{0});
  a(1, 1) = 1;
  EXPECT_EQ(dilate(a, StructuringElement::square(3)), BinaryMask(3, 3, std::uint8_t{1}));
  const BinaryMask zero(4, 4, std::uint8_t{0});
  EXPECT_EQ(dilate(zero, StructuringElement::square(3)), zero);
}

TEST(Erode, BordersErode) {
  const BinaryMask ones(3, 3, std::uint8_t{1});
  BinaryMask center(3, 3, std::uint8_t{0});
  center(1, 1) = 1;
  EXPECT_EQ(erode(ones, StructuringElement::square(3)), center);
  const BinaryMask five(5, 5, std::uint8_t{1});
  EXPECT_EQ(erode(five, StructuringElement::square(1)), five);
}

TEST(Erode, DualOfDilation) {
  std::mt19937_64 rng(11);
  const StructuringElement se(3, {0, 1, 1, 0, 1, 0, 1, 0, 0});
  for (int k = 0; k < 50; ++k) {
    const BinaryMask a = from(oracle::random_mask(rng, 7, 9, 0.6));
    // Complements are taken inside the grid; outside stays background for
    // the eroded operand and foreground for the dilated one, so the identity
    // only holds away from the border.
    const BinaryMask lhs = erode(a, se);
    const BinaryMask rhs = complement(dilate(complement(a), se.reflect()));
    for (std::size_t r = 1; r + 1 < a.height(); ++r) {
      for (std::size_t c = 1; c + 1 < a.width(); ++c) EXPECT_EQ(lhs(r, c), rhs(r, c));
    }
  }
}

TEST(ApplyMorph, MatchesSetOracle) {
  std::mt19937_64 rng(12);
  const auto cross = oracle::cross_offsets(3);
  for (int k = 0; k < 30; ++k) {
    const oracle::Mask m = oracle::random_mask(rng, 8, 8, 0.45);
    for (std::size_t op = 0; op < kAllMorphOps.size(); ++op) {
      const BinaryMask got = apply_morph(from(m), kAllMorphOps[op], StructuringElement::cross(3));
      const oracle::Mask want =
          oracle::to_mask(oracle::morph(oracle::to_set(m), static_cast<int>(op), cross, 8, 8), 8, 8);
      EXPECT_EQ(got.values(), want.v) << to_string(kAllMorphOps[op]);
    }
  }
}

TEST(ApplyMorph, GradientOfSquare) {
  const BinaryMask sq = square_in(5, 1, 3);
  const BinaryMask g = apply_morph(sq, MorphOp::kGradient, StructuringElement::square(3));
  // Everything except the center pixel.
  BinaryMask want(5, 5, std::uint8_t{1});
  want(2, 2) = 0;
  EXPECT_EQ(g, want);
}

TEST(ApplyMorph, Properties) {
  std::mt19937_64 rng(13);
  const StructuringElement se = StructuringElement::square(3);
  for (int k = 0; k < 30; ++k) {
    const BinaryMask a = from(oracle::random_mask(rng, 10, 10, 0.5));
    const BinaryMask d = dilate(a, se);
    const BinaryMask e = erode(a, se);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_LE(e.data()[i], a.data()[i]);
      EXPECT_LE(a.data()[i], d.data()[i]);
    }
    const BinaryMask open = apply_morph(a, MorphOp::kOpening, se);
    const BinaryMask close = apply_morph(a, MorphOp::kClosing, se);
    EXPECT_EQ(apply_morph(open, MorphOp::kOpening, se), open);
    EXPECT_EQ(apply_morph(close, MorphOp::kClosing, se), close);
    const BinaryMask grad = apply_morph(a, MorphOp::kGradient, se);
    const BinaryMask in = apply_morph(a, MorphOp::kInternalBoundary, se);
    const BinaryMask out = apply_morph(a, MorphOp::kExternalBoundary, se);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(grad.data()[i], in.data()[i] + out.data()[i]);
    }
  }
  const BinaryMask zero(4, 4, std::uint8_t{0});
  EXPECT_EQ(apply_morph(zero, MorphOp::kInternalBoundary, se), zero);
}

TEST(MorphOp, Tags) {
  for (MorphOp op : kAllMorphOps) EXPECT_EQ(parse_morph_op(to_string(op)), op);
  EXPECT_FALSE(parse_morph_op("tophat"));
  EXPECT_EQ(morph_op_tags(),
            "identity, erosion, dilation, opening, closing, gradient, "
            "internal_boundary, external_boundary");
}

TEST(MorphLabels, LowerClassWinsOverlap) {
  // Classes 1 and 2 side by side; dilation makes both claim the seam.
  const LabelField y(1, 1, 4, 3, {1, 1, 2, 2});
  const MorphedClasses m = morph_classes(y, 0, MorphOp::kDilation, StructuringElement::square(3));
  EXPECT_EQ(m.labels.values(), (std::vector<std::int32_t>{1, 1, 1, 2}));
  EXPECT_EQ(m.stack[0].values(), (std::vector<std::uint8_t>{0, 0, 0, 0}));
}

TEST(MorphLabels, BackgroundIsComplement) {
  const LabelField y(1, 3, 3, 2, {0, 0, 0, 0, 1, 0, 0, 0, 0});
  const LabelField e = morph_labels(y, MorphOp::kErosion, StructuringElement::square(3));
  EXPECT_EQ(std::vector<std::int32_t>(e.data().begin(), e.data().end()),
            std::vector<std::int32_t>(9, 0));
}

}  // namespace
}  // namespace calseg
