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

// Overlap, surface-distance and calibration metrics for segmentation.
//
// Confidence bins are the B equal intervals over [0, 1] with edges i/B.
// Membership is half-open, (lo, hi], and a confidence of exactly 0 falls in
// the first bin. Every sum runs in pixel index order so reports are
// reproducible byte for byte.

#ifndef CALSEG_METRICS_HPP_
#define CALSEG_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "calseg/grid.hpp"

namespace calseg {

struct BinRow {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double mean_conf = 0.0;
  double mean_acc = 0.0;
  std::size_t fp_count = 0;
  double fp_conf = 0.0;  // mean confidence of y = 0 pixels, 0 if none
};

struct CalibrationBins {
  std::vector<BinRow> rows;

  std::size_t total() const;
};

// Index in [0, bins) of the interval holding `conf`.
std::size_t bin_index(double conf, int bins);

// Reliability table: per-bin confidence, accuracy (mean of `correct`) and
// the statistics of entries with correct == 0.
CalibrationBins bin_statistics(std::span<const double> conf,
                               std::span<const std::uint8_t> correct, int bins);

// Standard binned ECE: sum_b (n_b / n) |mean_conf_b - mean_acc_b|.
// Returns nullopt for an empty input.
std::optional<double> binned_ece(std::span<const double> conf,
                                 std::span<const std::uint8_t> correct,
                                 int bins);

double dsc(const BinaryMask& pred, const BinaryMask& gt);

// Nearest-rank 95th percentile of the union of both directed
// boundary-to-nearest-boundary distance multisets. Boundaries are internal
// boundaries under the 3x3 square element. nullopt when either mask is
// empty.
std::optional<double> hd95(const BinaryMask& pred, const BinaryMask& gt);

// Foreground ECE: pixels whose label is not background, confidence = max
// class probability, correct = argmax matches. nullopt with no foreground.
std::optional<double> ece(const ProbabilityField& probs,
                          const LabelField& labels, int bins);

// Mean over all classes of the per-class ECE on pixels with p_c > threshold.
double cece(const ProbabilityField& probs, const LabelField& labels, int bins,
            double threshold);

struct PeceResult {
  double value = 0.0;
  CalibrationBins bins;
};

// Pixel-wise ECE with the false-positive confidence offset, normalized by
// the number of entries in `conf`.
PeceResult pece_binary(std::span<const double> conf,
                       std::span<const std::uint8_t> truth, int bins = 10,
                       double fp_weight = 2.0);

// Mean of pece_binary over foreground classes, each class channel against
// its indicator, over all pixels of the batch.
double pece(const ProbabilityField& probs, const LabelField& labels,
            int bins = 10, double fp_weight = 2.0);

enum class Orientation { kHigherBetter, kLowerBetter };

struct FriedmanResult {
  std::vector<double> mean_rank;   // per method
  std::vector<std::size_t> order;  // method indices, best first
  std::vector<std::size_t> place;  // 1-based position of each method
};

// table[method][metric]. Ties share the average of their rank positions.
FriedmanResult friedman_ranks(const std::vector<std::vector<double>>& table,
                              std::span<const Orientation> orientation);

struct MetricConfig {
  int bins = 10;
  double fp_weight = 2.0;
  double threshold = 1e-3;
};

struct ClassMetrics {
  int cls = 0;
  double dsc = 0.0;                 // mean over images
  std::optional<double> hd95;       // mean over images where defined
  std::size_t hd95_undefined = 0;   // images where it was not
  double pece = 0.0;
  CalibrationBins bins;             // pECE reliability table
};

struct MetricReport {
  MetricConfig config;
  int num_classes = 0;
  std::vector<ClassMetrics> per_class;  // foreground classes only
  double mean_dsc = 0.0;
  std::optional<double> mean_hd95;
  std::optional<double> ece;
  double cece = 0.0;
  double pece = 0.0;
};

// Hard predictions are the per-pixel argmax.
MetricReport evaluate(const ProbabilityField& probs, const LabelField& labels,
                      const MetricConfig& config);

}  // namespace calseg

#endif  // CALSEG_METRICS_HPP_
