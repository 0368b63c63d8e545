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

#include "calseg/distance_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace calseg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One-dimensional squared distance transform of a sampled function.
// Infinite samples are not sites; a line with no finite sample stays
// infinite. f and out are strided views of length n.
class EnvelopeScratch {
 public:
  void transform(const double* f, std::size_t stride, std::size_t n,
                 double* out) {
    sites_.clear();
    bounds_.clear();
    for (std::size_t q = 0; q < n; ++q) {
      const double fq = f[q * stride];
      if (fq == kInf) continue;
      const double dq = static_cast<double>(q);
      while (!sites_.empty()) {
        const std::size_t v = sites_.back();
        const double dv = static_cast<double>(v);
        // Abscissa where the parabola rooted at q overtakes the one at v.
        const double s =
            ((fq + dq * dq) - (f[v * stride] + dv * dv)) / (2.0 * (dq - dv));
        if (s <= bounds_.back()) {
          sites_.pop_back();
          bounds_.pop_back();
        } else {
          bounds_.push_back(s);
          break;
        }
      }
      if (sites_.empty()) bounds_.push_back(-kInf);
      sites_.push_back(q);
    }
    if (sites_.empty()) {
      for (std::size_t q = 0; q < n; ++q) out[q * stride] = kInf;
      return;
    }
    // bounds_[k] is where site k starts to dominate.
    std::size_t k = 0;
    for (std::size_t q = 0; q < n; ++q) {
      const double dq = static_cast<double>(q);
      while (k + 1 < sites_.size() && bounds_[k + 1] < dq) ++k;
      const double d = dq - static_cast<double>(sites_[k]);
      out[q * stride] = d * d + f[sites_[k] * stride];
    }
  }

 private:
  std::vector<std::size_t> sites_;
  std::vector<double> bounds_;
};

}  // namespace

std::string_view to_string(Normalization n) {
  return n == Normalization::kMaxAbs ? "max_abs" : "none";
}

std::optional<Normalization> parse_normalization(std::string_view tag) {
  if (tag == "none") return Normalization::kNone;
  if (tag == "max_abs") return Normalization::kMaxAbs;
  return std::nullopt;
}

RealGrid squared_edt(const BinaryMask& mask) {
  const std::size_t h = mask.height();
  const std::size_t w = mask.width();
  if (std::find(mask.begin(), mask.end(), 1) == mask.end()) {
    throw EmptySetError("distance transform of a mask with no foreground");
  }
  RealGrid f(h, w);
  auto src = mask.data();
  auto dst = f.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 0.0 : kInf;

  RealGrid rows(h, w);
  EnvelopeScratch scratch;
  for (std::size_t r = 0; r < h; ++r) {
    scratch.transform(&f(r, 0), 1, w, &rows(r, 0));
  }
  RealGrid out(h, w);
  for (std::size_t c = 0; c < w; ++c) {
    scratch.transform(&rows(0, c), w, h, &out(0, c));
  }
  return out;
}

RealGrid edt(const BinaryMask& mask) {
  RealGrid out = squared_edt(mask);
  for (double& v : out) v = std::sqrt(v);
  return out;
}

RealGrid sdf_from_mask(const BinaryMask& mask, Normalization normalization) {
  const std::size_t h = mask.height();
  const std::size_t w = mask.width();
  const auto ones = std::count(mask.begin(), mask.end(), 1);
  const double diagonal =
      std::sqrt(static_cast<double>(h * h) + static_cast<double>(w * w));

  RealGrid s(h, w);
  if (ones == 0) {
    std::fill(s.begin(), s.end(), diagonal);
  } else if (static_cast<std::size_t>(ones) == mask.size()) {
    std::fill(s.begin(), s.end(), -diagonal);
  } else {
    const RealGrid to_fg = edt(mask);
    const RealGrid to_bg = edt(complement(mask));
    auto a = to_fg.data();
    auto b = to_bg.data();
    auto out = s.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  }

  if (normalization == Normalization::kMaxAbs) {
    double peak = 0.0;
    for (double v : s) peak = std::max(peak, std::abs(v));
    if (peak > 0.0) {
      for (double& v : s) v /= peak;
    }
  }
  return s;
}

SignedDistanceField sdf_from_labels(const LabelField& labels,
                                    Normalization normalization) {
  SignedDistanceField out{Tensor4(labels.field_shape()), normalization};
  for (std::size_t b = 0; b < labels.batch(); ++b) {
    for (int cls = 0; cls < labels.num_classes(); ++cls) {
      const RealGrid s =
          sdf_from_mask(class_slice(labels, b, cls), normalization);
      auto dst = out.values.plane(b, static_cast<std::size_t>(cls));
      std::copy(s.begin(), s.end(), dst.begin());
    }
  }
  return out;
}

}  // namespace calseg
