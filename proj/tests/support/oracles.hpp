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


// Slow reference implementations used only by the tests. Each follows the
// textbook definition directly and shares no code with the library.

#ifndef CALSEG_TESTS_ORACLES_HPP_
#define CALSEG_TESTS_ORACLES_HPP_

#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

// Row-major 0/1 image.
struct Mask {
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> v;

  std::uint8_t at(int y, int x) const { return v[y * w + x]; }
};

using Point = std::pair<int, int>;  // (row, col)
using PointSet = std::set<Point>;

PointSet to_set(const Mask& m);
Mask to_mask(const PointSet& s, int h, int w);

// Offsets (dr, dc) of the element relative to its centre.
std::vector<Point> square_offsets(int k);
std::vector<Point> cross_offsets(int k);

// Set definitions on the grid; points outside the grid never belong to A.
// Dilation: {x : x - b in A for some b}. Erosion: {x : x + b in A for all b}.
PointSet dilation(const PointSet& a, const std::vector<Point>& b, int h, int w);
PointSet erosion(const PointSet& a, const std::vector<Point>& b, int h, int w);
PointSet set_minus(const PointSet& a, const PointSet& b);

// Tag-compatible op table: identity, erosion, dilation, opening, closing,
// gradient, internal_boundary, external_boundary.
PointSet morph(const PointSet& a, int op, const std::vector<Point>& b, int h,
               int w);

// Squared distance from each pixel to the nearest 1 pixel, by exhaustive
// search. -1 everywhere if the mask is empty.
std::vector<std::int64_t> brute_squared_edt(const Mask& m);

// Nearest-rank 95th percentile of the pooled directed boundary distances,
// boundaries taken as A minus its 3x3 erosion. Negative if either is empty.
double brute_hd95(const Mask& pred, const Mask& gt);

// pECE by enumeration of the binned sum; bin b holds lo < p <= hi with edges
// b/B, and p = 0 joins the first bin.
double enumerate_pece(const std::vector<double>& conf,
                      const std::vector<std::uint8_t>& truth, int bins,
                      double fp_weight);

// Central differences of f at x, one coordinate at a time.
std::vector<double> central_difference(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double step);

Mask random_mask(std::mt19937_64& rng, int h, int w, double density);

}  // namespace oracle

#endif  // CALSEG_TESTS_ORACLES_HPP_
