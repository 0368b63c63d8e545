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

// Flat binary morphology with a centered odd structuring element.
// Pixels outside the grid count as background for every operator.

#ifndef CALSEG_MORPHOLOGY_HPP_
#define CALSEG_MORPHOLOGY_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "calseg/grid.hpp"

namespace calseg {

class StructuringElement {
 public:
  // k x k entries in {0,1}; k odd, origin (center) set.
  StructuringElement(std::size_t k, std::vector<std::uint8_t> data);

  static StructuringElement square(std::size_t k);
  static StructuringElement cross(std::size_t k);

  std::size_t size() const { return k_; }
  std::size_t radius() const { return k_ / 2; }
  // Offset (dr, dc) relative to the origin, each in [-radius, radius].
  bool contains(int dr, int dc) const;
  StructuringElement reflect() const;

  friend bool operator==(const StructuringElement&,
                         const StructuringElement&) = default;

 private:
  std::size_t k_;
  std::vector<std::uint8_t> data_;
};

enum class MorphOp {
  kIdentity,
  kErosion,
  kDilation,
  kOpening,
  kClosing,
  kGradient,
  kInternalBoundary,
  kExternalBoundary,
};

inline constexpr std::array<MorphOp, 8> kAllMorphOps = {
    MorphOp::kIdentity,         MorphOp::kErosion,
    MorphOp::kDilation,         MorphOp::kOpening,
    MorphOp::kClosing,          MorphOp::kGradient,
    MorphOp::kInternalBoundary, MorphOp::kExternalBoundary,
};

// Tags as spelled on the command line ("identity", "internal_boundary", ...).
std::string_view to_string(MorphOp op);
std::optional<MorphOp> parse_morph_op(std::string_view tag);
// "identity, erosion, ..." for diagnostics.
std::string morph_op_tags();

// A ⊕ B: 1 where the reflected element placed at the pixel meets a 1 of `a`.
BinaryMask dilate(const BinaryMask& a, const StructuringElement& se);
// A ⊖ B: 1 where the element placed at the pixel fits inside the 1-region.
BinaryMask erode(const BinaryMask& a, const StructuringElement& se);

BinaryMask apply_morph(const BinaryMask& a, MorphOp op,
                       const StructuringElement& se);

// Per-class morphology on one label image.
//
// Every foreground class is morphed on its own binary slice. The stack keeps
// those raw masks (index = class) and sets the background entry to the
// complement of their union, so two foreground classes may both claim a
// pixel. `labels` resolves such overlaps to the lower class index.
struct MorphedClasses {
  std::vector<BinaryMask> stack;
  Grid<std::int32_t> labels;
};

MorphedClasses morph_classes(const LabelField& labels, std::size_t b,
                             MorphOp op, const StructuringElement& se);

// Reassembled labels for the whole batch.
LabelField morph_labels(const LabelField& labels, MorphOp op,
                        const StructuringElement& se);

}  // namespace calseg

#endif  // CALSEG_MORPHOLOGY_HPP_
