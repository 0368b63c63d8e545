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

// Exact Euclidean distance transforms and signed distance fields.
//
// Distances are between pixel centers, in pixel units. The squared transform
// is computed separably (rows, then columns) with the lower envelope of
// parabolas, so every squared distance is an exact integer.

#ifndef CALSEG_DISTANCE_FIELD_HPP_
#define CALSEG_DISTANCE_FIELD_HPP_

#include <optional>
#include <string_view>

#include "calseg/grid.hpp"

namespace calseg {

enum class Normalization { kNone, kMaxAbs };

std::string_view to_string(Normalization n);
std::optional<Normalization> parse_normalization(std::string_view tag);

// Squared distance to the nearest 1-pixel. Throws EmptySetError on an
// all-zero mask.
RealGrid squared_edt(const BinaryMask& mask);
RealGrid edt(const BinaryMask& mask);

// s = d(x, foreground) - d(x, background): negative inside, positive outside,
// magnitude at least 1 on both sides of the boundary. An absent class gives
// +D everywhere and a full class -D, with D the grid diagonal.
RealGrid sdf_from_mask(const BinaryMask& mask, Normalization normalization);

// Per-class fields over a label batch, shape (batch, classes, height, width).
struct SignedDistanceField {
  Tensor4 values;
  Normalization normalization = Normalization::kNone;
};

SignedDistanceField sdf_from_labels(const LabelField& labels,
                                    Normalization normalization);

}  // namespace calseg

#endif  // CALSEG_DISTANCE_FIELD_HPP_
