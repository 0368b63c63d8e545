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

#include "calseg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace calseg {
namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Mean over a (2r+1)^2 window with replicate borders.
RealGrid box_mean(const RealGrid& src, long r) {
  const long h = static_cast<long>(src.height());
  const long w = static_cast<long>(src.width());
  RealGrid out(src.height(), src.width());
  const double norm = 1.0 / static_cast<double>((2 * r + 1) * (2 * r + 1));
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double acc = 0.0;
      for (long i = -r; i <= r; ++i) {
        const long sy = std::clamp(y + i, 0L, h - 1);
        for (long j = -r; j <= r; ++j) {
          const long sx = std::clamp(x + j, 0L, w - 1);
          acc += src(static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
        }
      }
      out(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = acc * norm;
    }
  }
  return out;
}

struct PreparedBatch {
  FeatureBatch features;
  BoundLoss loss;
  double pixels;
};

std::vector<PreparedBatch> prepare_batches(const std::vector<Sample>& data,
                                           const std::vector<std::size_t>& order,
                                           std::size_t batch_size,
                                           const LossSpec& spec) {
  const std::size_t step = batch_size == 0 ? order.size() : batch_size;
  std::vector<PreparedBatch> out;
  for (std::size_t start = 0; start < order.size(); start += step) {
    const std::size_t stop = std::min(order.size(), start + step);
    std::vector<Sample> members;
    std::vector<const Sample*> ptrs;
    for (std::size_t i = start; i < stop; ++i) ptrs.push_back(&data[order[i]]);
    for (const Sample* s : ptrs) members.push_back(*s);
    LabelField labels = stack_labels(members);
    const double pixels = static_cast<double>(labels.size());
    out.push_back(PreparedBatch{FeatureBatch(ptrs),
                                BoundLoss(spec, std::move(labels)), pixels});
  }
  return out;
}

double total_loss(const ToyModel& model,
                  const std::vector<PreparedBatch>& batches) {
  double weighted = 0.0;
  double pixels = 0.0;
  for (const PreparedBatch& b : batches) {
    weighted += b.loss(model.forward(b.features)).value * b.pixels;
    pixels += b.pixels;
  }
  return weighted / pixels;
}

SummaryRow summarize(const std::string& label, const std::vector<RunRow>& runs) {
  std::vector<double> dsc, hd, e, ce, pe;
  for (const RunRow& r : runs) {
    if (r.loss != label) continue;
    dsc.push_back(r.dsc);
    hd.push_back(r.hd95);
    e.push_back(r.ece);
    ce.push_back(r.cece);
    pe.push_back(r.pece);
  }
  SummaryRow s;
  s.loss = label;
  s.dsc = median(dsc);
  s.hd95 = median(hd);
  s.ece = median(e);
  s.cece = median(ce);
  s.pece = median(pe);
  return s;
}

ComparisonTable run_table(const ExperimentConfig& cfg,
                          const std::vector<LossSpec>& losses) {
  ComparisonTable table;
  std::vector<std::string> labels;
  for (const LossSpec& loss : losses) {
    labels.push_back(loss.label());
    for (std::size_t k = 0; k < cfg.seeds; ++k) {
      table.runs.push_back(run_once(cfg, loss, k));
    }
  }
  std::vector<std::vector<double>> values;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    // Repeated specs share a label; every row still gets its own summary.
    SummaryRow s = summarize(labels[i], table.runs);
    values.push_back({s.dsc, s.hd95, s.ece, s.cece, s.pece});
    table.summary.push_back(std::move(s));
  }
  const FriedmanResult ranks = friedman_ranks(values, kMetricOrientation);
  for (std::size_t i = 0; i < table.summary.size(); ++i) {
    table.summary[i].friedman_rank = ranks.mean_rank[i];
    table.summary[i].place = ranks.place[i];
  }
  return table;
}

}  // namespace

std::string_view to_string(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::kDisk: return "disk";
    case ShapeFamily::kEllipse: return "ellipse";
    case ShapeFamily::kAnnulus: return "annulus";
  }
  return "unknown";
}

std::optional<ShapeFamily> parse_shape_family(std::string_view tag) {
  if (tag == "disk") return ShapeFamily::kDisk;
  if (tag == "ellipse") return ShapeFamily::kEllipse;
  if (tag == "annulus") return ShapeFamily::kAnnulus;
  return std::nullopt;
}

void SynthSpec::validate() const {
  if (image_size < 8) throw DomainError("image_size must be at least 8");
  if (n_images < 1) throw DomainError("n_images must be at least 1");
  if (!(noise_sigma >= 0.0)) throw DomainError("noise_sigma must be >= 0");
}

std::vector<Sample> generate_dataset(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double n = static_cast<double>(spec.image_size);
  std::vector<Sample> out;
  out.reserve(spec.n_images);
  for (std::size_t k = 0; k < spec.n_images; ++k) {
    double a = 0.0, b = 0.0, theta = 0.0, inner = 0.0;
    switch (spec.shape) {
      case ShapeFamily::kDisk:
        a = b = n * (0.18 + 0.14 * unit(rng));
        break;
      case ShapeFamily::kEllipse:
        a = n * (0.15 + 0.17 * unit(rng));
        b = n * (0.10 + 0.12 * unit(rng));
        theta = std::numbers::pi * unit(rng);
        break;
      case ShapeFamily::kAnnulus:
        a = b = n * (0.22 + 0.10 * unit(rng));
        inner = 0.4 + 0.2 * unit(rng);
        break;
    }
    const double reach = std::max(a, b);
    const double cy = reach + (n - 1.0 - 2.0 * reach) * unit(rng);
    const double cx = reach + (n - 1.0 - 2.0 * reach) * unit(rng);
    const double ct = std::cos(theta);
    const double st = std::sin(theta);

    Sample s{RealGrid(spec.image_size, spec.image_size),
             Grid<std::int32_t>(spec.image_size, spec.image_size, 0)};
    for (std::size_t y = 0; y < spec.image_size; ++y) {
      for (std::size_t x = 0; x < spec.image_size; ++x) {
        const double dy = static_cast<double>(y) - cy;
        const double dx = static_cast<double>(x) - cx;
        const double u = (ct * dx + st * dy) / a;
        const double v = (-st * dx + ct * dy) / b;
        const double rho = u * u + v * v;
        const bool inside = rho <= 1.0 && rho >= inner * inner;
        s.labels(y, x) = inside ? 1 : 0;
        s.intensity(y, x) = inside ? 1.0 : 0.0;
      }
    }
    if (spec.noise_sigma > 0.0) {
      for (double& v : s.intensity) v += spec.noise_sigma * noise(rng);
    }
    out.push_back(std::move(s));
  }
  return out;
}

FeatureBatch::FeatureBatch(const std::vector<const Sample*>& samples) {
  if (samples.empty()) throw DomainError("feature batch needs samples");
  const std::size_t h = samples.front()->intensity.height();
  const std::size_t w = samples.front()->intensity.width();
  values_ = Tensor4(Shape4{samples.size(), kFeatures, h, w});
  for (std::size_t b = 0; b < samples.size(); ++b) {
    const RealGrid& img = samples[b]->intensity;
    if (img.height() != h || img.width() != w) {
      throw ShapeError("feature batch images differ in size");
    }
    const RealGrid m3 = box_mean(img, 1);
    const RealGrid m5 = box_mean(img, 2);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t xl = x > 0 ? x - 1 : x;
        const std::size_t xr = x + 1 < w ? x + 1 : x;
        const std::size_t yu = y > 0 ? y - 1 : y;
        const std::size_t yd = y + 1 < h ? y + 1 : y;
        values_(b, 0, y, x) = img(y, x);
        values_(b, 1, y, x) = m3(y, x);
        values_(b, 2, y, x) = m5(y, x);
        values_(b, 3, y, x) = 0.5 * std::abs(m3(y, xr) - m3(y, xl));
        values_(b, 4, y, x) = 0.5 * std::abs(m3(yd, x) - m3(yu, x));
        values_(b, 5, y, x) = 1.0;
      }
    }
  }
}

ToyModel::ToyModel(int num_classes)
    : ToyModel(num_classes,
               std::vector<double>(static_cast<std::size_t>(num_classes) *
                                       FeatureBatch::kFeatures,
                                   0.0)) {}

ToyModel::ToyModel(int num_classes, std::vector<double> weights)
    : num_classes_(num_classes), weights_(std::move(weights)) {
  if (num_classes_ < 2) throw DomainError("model needs at least 2 classes");
  if (weights_.size() !=
      static_cast<std::size_t>(num_classes_) * FeatureBatch::kFeatures) {
    throw ShapeError("model weight count does not match classes * features");
  }
  for (double v : weights_) {
    if (!std::isfinite(v)) throw DomainError("model weights must be finite");
  }
}

LogitField ToyModel::forward(const FeatureBatch& features) const {
  const Shape4& fs = features.values().shape();
  const std::size_t classes = static_cast<std::size_t>(num_classes_);
  Tensor4 z(Shape4{fs.batch, classes, fs.height, fs.width});
  for (std::size_t b = 0; b < fs.batch; ++b) {
    for (std::size_t c = 0; c < classes; ++c) {
      auto dst = z.plane(b, c);
      for (std::size_t f = 0; f < FeatureBatch::kFeatures; ++f) {
        const double wt = weights_[c * FeatureBatch::kFeatures + f];
        auto src = features.values().plane(b, f);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += wt * src[i];
      }
    }
  }
  return LogitField(std::move(z));
}

std::vector<double> ToyModel::backward(const FeatureBatch& features,
                                       const Tensor4& grad_logits) const {
  const Shape4& fs = features.values().shape();
  std::vector<double> grad(weights_.size(), 0.0);
  for (std::size_t b = 0; b < fs.batch; ++b) {
    for (std::size_t c = 0; c < static_cast<std::size_t>(num_classes_); ++c) {
      auto g = grad_logits.plane(b, c);
      for (std::size_t f = 0; f < FeatureBatch::kFeatures; ++f) {
        auto src = features.values().plane(b, f);
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * src[i];
        grad[c * FeatureBatch::kFeatures + f] += acc;
      }
    }
  }
  return grad;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) {
    throw DomainError("learning_rate must be nonnegative");
  }
  if (epochs < 1) throw DomainError("epochs must be at least 1");
  loss.cfg.validate();
}

TrainResult train(ToyModel model, const std::vector<Sample>& data,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw DomainError("training needs data");
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  if (cfg.batch_size != 0) std::shuffle(order.begin(), order.end(), rng);
  const std::vector<PreparedBatch> batches =
      prepare_batches(data, order, cfg.batch_size, cfg.loss);

  std::vector<std::size_t> visit(batches.size());
  std::iota(visit.begin(), visit.end(), 0);
  TrainResult out{model, {}};
  auto weights = out.model.weights();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = cfg.learning_rate;
    if (cfg.halve_midway && epoch >= cfg.epochs / 2) lr *= 0.5;
    if (batches.size() > 1) std::shuffle(visit.begin(), visit.end(), rng);
    for (std::size_t k : visit) {
      const PreparedBatch& b = batches[k];
      const LossResult res = b.loss(out.model.forward(b.features));
      if (!std::isfinite(res.value)) {
        throw DivergenceError("loss became non-finite at epoch " +
                              std::to_string(epoch) + " (" +
                              cfg.loss.label() + ")");
      }
      if (batches.size() == 1 && epoch > 0) out.loss_trace.push_back(res.value);
      const std::vector<double> g = out.model.backward(b.features, res.grad);
      for (std::size_t i = 0; i < weights.size(); ++i) weights[i] -= lr * g[i];
    }
    if (batches.size() > 1) out.loss_trace.push_back(total_loss(out.model, batches));
  }
  if (batches.size() == 1) out.loss_trace.push_back(total_loss(out.model, batches));
  if (!std::isfinite(out.loss_trace.back())) {
    throw DivergenceError("loss became non-finite after training (" +
                          cfg.loss.label() + ")");
  }
  for (double v : weights) {
    if (!std::isfinite(v)) throw DivergenceError("weights became non-finite");
  }
  return out;
}

double dataset_loss(const ToyModel& model, const std::vector<Sample>& data,
                    const LossSpec& loss, std::size_t batch_size) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  return total_loss(model, prepare_batches(data, order, batch_size, loss));
}

ProbabilityField predict(const ToyModel& model,
                         const std::vector<Sample>& data) {
  std::vector<const Sample*> ptrs;
  for (const Sample& s : data) ptrs.push_back(&s);
  return softmax(model.forward(FeatureBatch(ptrs)));
}

LabelField stack_labels(const std::vector<Sample>& data, int num_classes) {
  if (data.empty()) throw DomainError("no samples to stack");
  const std::size_t h = data.front().labels.height();
  const std::size_t w = data.front().labels.width();
  std::vector<std::int32_t> values;
  values.reserve(data.size() * h * w);
  for (const Sample& s : data) {
    values.insert(values.end(), s.labels.begin(), s.labels.end());
  }
  return LabelField(data.size(), h, w, num_classes, std::move(values));
}

Split split_dataset(std::vector<Sample> data) {
  const std::size_t n = data.size();
  std::size_t n_train = (4 * n + 4) / 5;
  if (n > 1 && n_train == n) n_train = n - 1;
  Split out;
  out.train.assign(std::make_move_iterator(data.begin()),
                   std::make_move_iterator(data.begin() + static_cast<long>(n_train)));
  out.test.assign(std::make_move_iterator(data.begin() + static_cast<long>(n_train)),
                  std::make_move_iterator(data.end()));
  if (out.test.empty()) out.test = out.train;
  return out;
}

RunRow run_once(const ExperimentConfig& cfg, const LossSpec& loss,
                std::size_t seed_index) {
  SynthSpec spec = cfg.spec;
  spec.seed += seed_index;
  TrainConfig tc = cfg.train;
  tc.loss = loss;
  tc.seed += seed_index;
  Split split = split_dataset(generate_dataset(spec));
  const TrainResult trained = train(ToyModel(2), split.train, tc);

  const ProbabilityField p = predict(trained.model, split.test);
  const LabelField y = stack_labels(split.test);
  const MetricReport report = evaluate(p, y, cfg.metrics);
  const double diagonal = std::sqrt(2.0) * static_cast<double>(spec.image_size);

  RunRow row;
  row.loss = loss.label();
  row.seed_index = seed_index;
  row.dsc = report.mean_dsc;
  row.hd95 = report.mean_hd95.value_or(diagonal);
  row.ece = report.ece.value_or(0.0);
  row.cece = report.cece;
  row.pece = report.pece;
  row.final_loss = trained.loss_trace.back();
  row.loss_trace = trained.loss_trace;
  return row;
}

ComparisonTable compare_losses(const ExperimentConfig& cfg,
                               const std::vector<LossSpec>& losses) {
  if (losses.size() < 2) throw DomainError("comparison needs at least 2 losses");
  return run_table(cfg, losses);
}

ComparisonTable morph_ablation(const ExperimentConfig& cfg) {
  std::vector<LossSpec> losses;
  const StructuringElement se =
      cfg.train.loss.cfg.morph ? cfg.train.loss.cfg.morph->se
                               : StructuringElement::square(3);
  for (MorphOp op : kAllMorphOps) {
    LossSpec spec = cfg.train.loss;
    spec.kind = LossKind::kMargin;
    spec.cfg.morph = MorphSpec{op, se};
    losses.push_back(std::move(spec));
  }
  return run_table(cfg, losses);
}

std::vector<SweepRow> lambda_sweep(const ExperimentConfig& cfg,
                                   const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw DomainError("lambda grid is empty");
  std::vector<SweepRow> out;
  for (double lambda : lambdas) {
    LossSpec spec = cfg.train.loss;
    spec.kind = LossKind::kSdc;
    spec.cfg.lambda_sdf = lambda;
    std::vector<RunRow> runs;
    for (std::size_t k = 0; k < cfg.seeds; ++k) {
      runs.push_back(run_once(cfg, spec, k));
    }
    const SummaryRow s = summarize(spec.label(), runs);
    out.push_back(SweepRow{lambda, s.dsc, s.hd95, s.ece, s.cece});
  }
  return out;
}

}  // namespace calseg
