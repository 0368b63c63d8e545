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


// Regenerates the checked-in fixtures:
//
//   make_fixtures OUT_DIR
//
// golden16_pred.calt / golden16_labels.pgm: a 3-class 16x16 prediction and
// its label image. square5.pgm: a centered 5x5 square in a 9x9 image.
// row.pgm: the 1x5 row 0 1 1 1 0.

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "calseg/io.hpp"

using namespace calseg;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_fixtures OUT_DIR\n");
    return 2;
  }
  const std::string dir = argv[1];
  constexpr int kSize = 16;
  constexpr int kClasses = 3;

  PgmImage labels{kSize, kSize, 255, std::vector<std::uint8_t>(kSize * kSize, 0)};
  for (int r = 0; r < kSize; ++r) {
    for (int c = 0; c < kSize; ++c) {
      const double dr = r - 5.0, dc = c - 5.5;
      if (dr * dr + dc * dc <= 12.0) labels.pixels[r * kSize + c] = 1;
      if (r >= 9 && r <= 13 && c >= 8 && c <= 14) labels.pixels[r * kSize + c] = 2;
    }
  }

  std::mt19937_64 rng(16);
  std::normal_distribution<double> noise(0.0, 1.2);
  TensorFile pred{{kClasses, kSize, kSize},
                  std::vector<double>(kClasses * kSize * kSize)};
  for (int i = 0; i < kSize * kSize; ++i) {
    double z[kClasses];
    double total = 0.0;
    for (int k = 0; k < kClasses; ++k) {
      z[k] = noise(rng) + (labels.pixels[i] == k ? 2.0 : 0.0);
      z[k] = std::exp(z[k]);
      total += z[k];
    }
    for (int k = 0; k < kClasses; ++k) {
      pred.values[k * kSize * kSize + i] = z[k] / total;
    }
  }
  write_tensor(dir + "/golden16_pred.calt", pred);
  write_pgm(dir + "/golden16_labels.pgm", labels);

  PgmImage square{9, 9, 255, std::vector<std::uint8_t>(81, 0)};
  for (int r = 2; r <= 6; ++r) {
    for (int c = 2; c <= 6; ++c) square.pixels[r * 9 + c] = 1;
  }
  write_pgm(dir + "/square5.pgm", square);
  write_pgm(dir + "/row.pgm", PgmImage{1, 5, 255, {0, 1, 1, 1, 0}});
  return 0;
}
