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

#include "calseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "calseg/distance_field.hpp"
#include "calseg/morphology.hpp"

namespace calseg {
namespace {

double edge(std::size_t i, int bins) {
  return static_cast<double>(i) / static_cast<double>(bins);
}

void check_bins(int bins) {
  if (bins < 1) throw DomainError("bin count must be at least 1");
}

void require_match(const ProbabilityField& probs, const LabelField& labels) {
  if (!(probs.shape() == labels.field_shape())) {
    throw ShapeError("probability shape " + to_string(probs.shape()) +
                     " does not match labels " +
                     to_string(labels.field_shape()));
  }
}

// Squared distances from every 1 of `from` to the nearest 1 of `to`.
void directed_squared(const BinaryMask& from, const BinaryMask& to,
                      std::vector<double>& out) {
  const RealGrid d = squared_edt(to);
  auto f = from.data();
  auto dd = d.data();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i]) out.push_back(dd[i]);
  }
}

}  // namespace

std::size_t CalibrationBins::total() const {
  std::size_t n = 0;
  for (const BinRow& r : rows) n += r.count;
  return n;
}

std::size_t bin_index(double conf, int bins) {
  check_bins(bins);
  const auto last = static_cast<std::size_t>(bins - 1);
  double guess = std::ceil(conf * bins) - 1.0;
  std::size_t k = guess <= 0.0 ? 0 : std::min(last, static_cast<std::size_t>(guess));
  // The arithmetic guess can be off by one next to an edge.
  while (k > 0 && conf <= edge(k, bins)) --k;
  while (k < last && conf > edge(k + 1, bins)) ++k;
  return k;
}

CalibrationBins bin_statistics(std::span<const double> conf,
                               std::span<const std::uint8_t> correct,
                               int bins) {
  check_bins(bins);
  if (conf.size() != correct.size()) {
    throw ShapeError("confidence and indicator lengths differ");
  }
  CalibrationBins out;
  out.rows.resize(static_cast<std::size_t>(bins));
  std::vector<double> conf_sum(out.rows.size(), 0.0);
  std::vector<double> acc_sum(out.rows.size(), 0.0);
  std::vector<double> fp_sum(out.rows.size(), 0.0);
  for (std::size_t i = 0; i < conf.size(); ++i) {
    const std::size_t k = bin_index(conf[i], bins);
    BinRow& row = out.rows[k];
    ++row.count;
    conf_sum[k] += conf[i];
    acc_sum[k] += correct[i] ? 1.0 : 0.0;
    if (!correct[i]) {
      ++row.fp_count;
      fp_sum[k] += conf[i];
    }
  }
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    BinRow& row = out.rows[k];
    row.lo = edge(k, bins);
    row.hi = edge(k + 1, bins);
    if (row.count > 0) {
      row.mean_conf = conf_sum[k] / static_cast<double>(row.count);
      row.mean_acc = acc_sum[k] / static_cast<double>(row.count);
    }
    if (row.fp_count > 0) {
      row.fp_conf = fp_sum[k] / static_cast<double>(row.fp_count);
    }
  }
  return out;
}

std::optional<double> binned_ece(std::span<const double> conf,
                                 std::span<const std::uint8_t> correct,
                                 int bins) {
  if (conf.empty()) return std::nullopt;
  const CalibrationBins table = bin_statistics(conf, correct, bins);
  const double n = static_cast<double>(conf.size());
  double total = 0.0;
  for (const BinRow& row : table.rows) {
    if (row.count == 0) continue;
    total += static_cast<double>(row.count) / n *
             std::abs(row.mean_conf - row.mean_acc);
  }
  return total;
}

double dsc(const BinaryMask& pred, const BinaryMask& gt) {
  if (!pred.same_shape(gt)) throw ShapeError("dsc: mask shapes differ");
  std::size_t p = 0, g = 0, both = 0;
  auto a = pred.data();
  auto b = gt.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    p += a[i];
    g += b[i];
    both += a[i] & b[i];
  }
  if (p + g == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(p + g);
}

std::optional<double> hd95(const BinaryMask& pred, const BinaryMask& gt) {
  if (!pred.same_shape(gt)) throw ShapeError("hd95: mask shapes differ");
  const auto nonempty = [](const BinaryMask& m) {
    return std::find(m.begin(), m.end(), 1) != m.end();
  };
  if (!nonempty(pred) || !nonempty(gt)) return std::nullopt;

  const auto se = StructuringElement::square(3);
  const BinaryMask bp = apply_morph(pred, MorphOp::kInternalBoundary, se);
  const BinaryMask bg = apply_morph(gt, MorphOp::kInternalBoundary, se);
  std::vector<double> sq;
  directed_squared(bp, bg, sq);
  directed_squared(bg, bp, sq);
  std::sort(sq.begin(), sq.end());
  const std::size_t rank = (95 * sq.size() + 99) / 100;  // ceil(0.95 n)
  return std::sqrt(sq[rank - 1]);
}

std::optional<double> ece(const ProbabilityField& probs,
                          const LabelField& labels, int bins) {
  require_match(probs, labels);
  const Shape4& s = probs.shape();
  std::vector<double> conf;
  std::vector<std::uint8_t> correct;
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t h = 0; h < s.height; ++h) {
      for (std::size_t w = 0; w < s.width; ++w) {
        const std::int32_t y = labels(b, h, w);
        if (y == 0) continue;
        std::size_t best = 0;
        for (std::size_t c = 1; c < s.classes; ++c) {
          if (probs(b, c, h, w) > probs(b, best, h, w)) best = c;
        }
        conf.push_back(probs(b, best, h, w));
        correct.push_back(static_cast<std::int32_t>(best) == y ? 1 : 0);
      }
    }
  }
  return binned_ece(conf, correct, bins);
}

double cece(const ProbabilityField& probs, const LabelField& labels, int bins,
            double threshold) {
  require_match(probs, labels);
  check_bins(bins);
  if (!(threshold >= 0.0)) throw DomainError("cece threshold must be >= 0");
  const Shape4& s = probs.shape();
  double total = 0.0;
  std::vector<double> conf;
  std::vector<std::uint8_t> correct;
  for (std::size_t c = 0; c < s.classes; ++c) {
    conf.clear();
    correct.clear();
    for (std::size_t b = 0; b < s.batch; ++b) {
      auto plane = probs.plane(b, c);
      auto y = labels.image_span(b);
      for (std::size_t i = 0; i < plane.size(); ++i) {
        if (plane[i] > threshold) {
          conf.push_back(plane[i]);
          correct.push_back(y[i] == static_cast<std::int32_t>(c) ? 1 : 0);
        }
      }
    }
    total += binned_ece(conf, correct, bins).value_or(0.0);
  }
  return total / static_cast<double>(s.classes);
}

PeceResult pece_binary(std::span<const double> conf,
                       std::span<const std::uint8_t> truth, int bins,
                       double fp_weight) {
  PeceResult out;
  out.bins = bin_statistics(conf, truth, bins);
  const double total = static_cast<double>(conf.size());
  for (const BinRow& row : out.bins.rows) {
    if (row.count == 0) continue;
    const double offset = fp_weight * row.fp_conf;
    out.value += static_cast<double>(row.count) / total *
                 std::abs((row.mean_conf - row.mean_acc) + offset);
  }
  return out;
}

double pece(const ProbabilityField& probs, const LabelField& labels, int bins,
            double fp_weight) {
  require_match(probs, labels);
  const Shape4& s = probs.shape();
  if (s.classes < 2) throw DomainError("pece needs a foreground class");
  std::vector<double> conf(s.pixels());
  std::vector<std::uint8_t> truth(s.pixels());
  double total = 0.0;
  for (std::size_t c = 1; c < s.classes; ++c) {
    std::size_t i = 0;
    for (std::size_t b = 0; b < s.batch; ++b) {
      auto plane = probs.plane(b, c);
      auto y = labels.image_span(b);
      for (std::size_t j = 0; j < plane.size(); ++j, ++i) {
        conf[i] = plane[j];
        truth[i] = y[j] == static_cast<std::int32_t>(c) ? 1 : 0;
      }
    }
    total += pece_binary(conf, truth, bins, fp_weight).value;
  }
  return total / static_cast<double>(s.classes - 1);
}

FriedmanResult friedman_ranks(const std::vector<std::vector<double>>& table,
                              std::span<const Orientation> orientation) {
  if (table.empty() || orientation.empty()) {
    throw DomainError("friedman ranking needs at least one method and metric");
  }
  const std::size_t methods = table.size();
  const std::size_t metrics = orientation.size();
  for (const auto& row : table) {
    if (row.size() != metrics) {
      throw DomainError("every method needs one value per metric");
    }
  }
  std::vector<double> sum(methods, 0.0);
  std::vector<std::size_t> idx(methods);
  for (std::size_t m = 0; m < metrics; ++m) {
    // Oriented so that smaller is better.
    auto key = [&](std::size_t i) {
      return orientation[m] == Orientation::kHigherBetter ? -table[i][m]
                                                          : table[i][m];
    };
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    std::size_t start = 0;
    while (start < methods) {
      std::size_t stop = start + 1;
      while (stop < methods && key(idx[stop]) == key(idx[start])) ++stop;
      // Positions start+1 .. stop share their average.
      const double avg = (static_cast<double>(start + 1) +
                          static_cast<double>(stop)) / 2.0;
      for (std::size_t k = start; k < stop; ++k) sum[idx[k]] += avg;
      start = stop;
    }
  }
  FriedmanResult out;
  out.mean_rank.resize(methods);
  for (std::size_t i = 0; i < methods; ++i) {
    out.mean_rank[i] = sum[i] / static_cast<double>(metrics);
  }
  out.order.resize(methods);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return out.mean_rank[a] < out.mean_rank[b];
                   });
  out.place.resize(methods);
  for (std::size_t k = 0; k < methods; ++k) out.place[out.order[k]] = k + 1;
  return out;
}

MetricReport evaluate(const ProbabilityField& probs, const LabelField& labels,
                      const MetricConfig& config) {
  require_match(probs, labels);
  check_bins(config.bins);
  const Shape4& s = probs.shape();
  if (s.classes < 2) throw DomainError("evaluation needs a foreground class");

  MetricReport report;
  report.config = config;
  report.num_classes = static_cast<int>(s.classes);
  const LabelField pred = argmax(probs);

  std::vector<double> conf(s.pixels());
  std::vector<std::uint8_t> truth(s.pixels());
  double dsc_total = 0.0;
  double hd_total = 0.0;
  std::size_t hd_classes = 0;
  double pece_total = 0.0;
  for (int cls = 1; cls < static_cast<int>(s.classes); ++cls) {
    ClassMetrics cm;
    cm.cls = cls;
    double dsc_sum = 0.0;
    double hd_sum = 0.0;
    std::size_t hd_count = 0;
    for (std::size_t b = 0; b < s.batch; ++b) {
      const BinaryMask p = class_slice(pred, b, cls);
      const BinaryMask g = class_slice(labels, b, cls);
      dsc_sum += dsc(p, g);
      if (auto d = hd95(p, g)) {
        hd_sum += *d;
        ++hd_count;
      } else {
        ++cm.hd95_undefined;
      }
    }
    cm.dsc = dsc_sum / static_cast<double>(s.batch);
    if (hd_count > 0) cm.hd95 = hd_sum / static_cast<double>(hd_count);

    std::size_t i = 0;
    for (std::size_t b = 0; b < s.batch; ++b) {
      auto plane = probs.plane(b, static_cast<std::size_t>(cls));
      auto y = labels.image_span(b);
      for (std::size_t j = 0; j < plane.size(); ++j, ++i) {
        conf[i] = plane[j];
        truth[i] = y[j] == cls ? 1 : 0;
      }
    }
    PeceResult pr = pece_binary(conf, truth, config.bins, config.fp_weight);
    cm.pece = pr.value;
    cm.bins = std::move(pr.bins);

    dsc_total += cm.dsc;
    if (cm.hd95) {
      hd_total += *cm.hd95;
      ++hd_classes;
    }
    pece_total += cm.pece;
    report.per_class.push_back(std::move(cm));
  }
  const double fg = static_cast<double>(s.classes - 1);
  report.mean_dsc = dsc_total / fg;
  if (hd_classes > 0) report.mean_hd95 = hd_total / static_cast<double>(hd_classes);
  report.ece = ece(probs, labels, config.bins);
  report.cece = cece(probs, labels, config.bins, config.threshold);
  report.pece = pece_total / fg;
  return report;
}

}  // namespace calseg
