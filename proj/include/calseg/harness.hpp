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

// Desk-scale experiments: synthetic shapes, a pixel-wise linear scorer over
// fixed local features, gradient-descent training with the calseg losses,
// and the comparison / ablation / sweep drivers built on top.
//
// Every result is a pure function of its inputs and seeds. Training is
// single-threaded and sums run in a fixed order.

#ifndef CALSEG_HARNESS_HPP_
#define CALSEG_HARNESS_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "calseg/grid.hpp"
#include "calseg/losses.hpp"
#include "calseg/metrics.hpp"

namespace calseg {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ShapeFamily { kDisk, kEllipse, kAnnulus };

std::string_view to_string(ShapeFamily family);
std::optional<ShapeFamily> parse_shape_family(std::string_view tag);

struct SynthSpec {
  std::size_t image_size = 64;
  std::size_t n_images = 200;
  ShapeFamily shape = ShapeFamily::kDisk;
  double noise_sigma = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Sample {
  RealGrid intensity;
  Grid<std::int32_t> labels;  // 0 background, 1 shape
};

// One shape per image at intensity 1 on a 0 background, plus gaussian
// noise. The label is the clean shape.
std::vector<Sample> generate_dataset(const SynthSpec& spec);

// Per-pixel inputs of the linear scorer, shape (batch, kFeatures, H, W).
class FeatureBatch {
 public:
  static constexpr std::size_t kFeatures = 6;
  static constexpr std::array<std::string_view, kFeatures> kNames = {
      "intensity", "box3", "box5", "grad_x", "grad_y", "bias"};

  FeatureBatch() = default;
  explicit FeatureBatch(const std::vector<const Sample*>& samples);

  const Tensor4& values() const { return values_; }
  std::size_t batch() const { return values_.shape().batch; }

 private:
  Tensor4 values_;
};

// z_c(x) = sum_f weight[c][f] * feature_f(x).
class ToyModel {
 public:
  explicit ToyModel(int num_classes = 2);
  ToyModel(int num_classes, std::vector<double> weights);

  int num_classes() const { return num_classes_; }
  std::span<const double> weights() const { return weights_; }
  std::span<double> weights() { return weights_; }

  LogitField forward(const FeatureBatch& features) const;
  // d loss / d weights given d loss / d logits.
  std::vector<double> backward(const FeatureBatch& features,
                               const Tensor4& grad_logits) const;

  friend bool operator==(const ToyModel&, const ToyModel&) = default;

 private:
  int num_classes_;
  std::vector<double> weights_;  // num_classes * kFeatures
};

struct TrainConfig {
  LossSpec loss;
  double learning_rate = 1.0;
  std::size_t epochs = 200;
  std::size_t batch_size = 0;  // 0: full batch
  bool halve_midway = false;   // halve the learning rate after epochs / 2
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  ToyModel model;
  std::vector<double> loss_trace;  // full training loss after each epoch
};

// Mini-batches are fixed once from a seeded permutation; their visiting order
// is reshuffled every epoch. Throws DivergenceError on a non-finite loss.
TrainResult train(ToyModel model, const std::vector<Sample>& data,
                  const TrainConfig& cfg);

// Mean loss of `model` over `data` under `loss`, batched like training.
double dataset_loss(const ToyModel& model, const std::vector<Sample>& data,
                    const LossSpec& loss, std::size_t batch_size);

ProbabilityField predict(const ToyModel& model,
                         const std::vector<Sample>& data);
LabelField stack_labels(const std::vector<Sample>& data, int num_classes = 2);

// Train / held-out split: the first 80% of images train.
struct Split {
  std::vector<Sample> train;
  std::vector<Sample> test;
};
Split split_dataset(std::vector<Sample> data);

struct ExperimentConfig {
  SynthSpec spec;
  TrainConfig train;
  MetricConfig metrics;
  std::size_t seeds = 1;  // runs use spec.seed + k and train.seed + k
};

// One (loss, seed) evaluation on the held-out split.
struct RunRow {
  std::string loss;
  std::size_t seed_index = 0;
  double dsc = 0.0;
  double hd95 = 0.0;  // image diagonal when undefined on every image
  double ece = 0.0;
  double cece = 0.0;
  double pece = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_trace;
};

struct SummaryRow {
  std::string loss;
  double dsc = 0.0;  // medians over seeds
  double hd95 = 0.0;
  double ece = 0.0;
  double cece = 0.0;
  double pece = 0.0;
  double friedman_rank = 0.0;
  std::size_t place = 0;
};

struct ComparisonTable {
  std::vector<RunRow> runs;        // sorted by (loss order, seed)
  std::vector<SummaryRow> summary; // one per loss, input order
};

inline constexpr std::array<Orientation, 5> kMetricOrientation = {
    Orientation::kHigherBetter, Orientation::kLowerBetter,
    Orientation::kLowerBetter, Orientation::kLowerBetter,
    Orientation::kLowerBetter};

RunRow run_once(const ExperimentConfig& cfg, const LossSpec& loss,
                std::size_t seed_index);

ComparisonTable compare_losses(const ExperimentConfig& cfg,
                               const std::vector<LossSpec>& losses);

// Margin loss under each of the eight operators, identity first.
ComparisonTable morph_ablation(const ExperimentConfig& cfg);

struct SweepRow {
  double lambda_sdf = 0.0;
  double dsc = 0.0;
  double hd95 = 0.0;
  double ece = 0.0;
  double cece = 0.0;
};

std::vector<SweepRow> lambda_sweep(const ExperimentConfig& cfg,
                                   const std::vector<double>& lambdas);

}  // namespace calseg

#endif  // CALSEG_HARNESS_HPP_
