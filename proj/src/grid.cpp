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

#include "calseg/grid.hpp"

#include <algorithm>
#include <cmath>

namespace calseg {

std::string to_string(const Shape4& shape) {
  return "(" + std::to_string(shape.batch) + ", " +
         std::to_string(shape.classes) + ", " + std::to_string(shape.height) +
         ", " + std::to_string(shape.width) + ")";
}

Tensor4::Tensor4(Shape4 shape, double fill)
    : shape_(shape), data_(shape.size(), fill) {}

Tensor4::Tensor4(Shape4 shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + to_string(shape_));
  }
}

std::span<double> Tensor4::plane(std::size_t b, std::size_t c) {
  return std::span<double>(data_).subspan(index(b, c, 0, 0), shape_.plane());
}

std::span<const double> Tensor4::plane(std::size_t b, std::size_t c) const {
  return std::span<const double>(data_).subspan(index(b, c, 0, 0),
                                                shape_.plane());
}

LogitField::LogitField(Tensor4 values) : Tensor4(std::move(values)) {
  const Shape4& s = shape();
  if (s.classes < 2) throw DomainError("logit field needs at least 2 classes");
  if (s.height == 0 || s.width == 0 || s.batch == 0) {
    throw DomainError("logit field must have nonzero extents");
  }
  for (double v : data()) {
    if (!std::isfinite(v)) throw DomainError("logit field has non-finite entry");
  }
}

LabelField::LabelField(std::size_t batch, std::size_t height,
                       std::size_t width, int num_classes,
                       std::vector<std::int32_t> data)
    : batch_(batch),
      height_(height),
      width_(width),
      num_classes_(num_classes),
      data_(std::move(data)) {
  if (num_classes_ < 1) throw DomainError("num_classes must be positive");
  if (data_.size() != batch_ * height_ * width_) {
    throw ShapeError("label data length does not match extents");
  }
  for (std::int32_t v : data_) {
    if (v < 0 || v >= num_classes_) {
      throw DomainError("label " + std::to_string(v) + " outside [0, " +
                        std::to_string(num_classes_) + ")");
    }
  }
}

LabelField::LabelField(const Grid<std::int32_t>& image, int num_classes)
    : LabelField(1, image.height(), image.width(), num_classes,
                 image.values()) {}

std::span<const std::int32_t> LabelField::image_span(std::size_t b) const {
  return std::span<const std::int32_t>(data_).subspan(b * height_ * width_,
                                                      height_ * width_);
}

Grid<std::int32_t> LabelField::image(std::size_t b) const {
  auto span = image_span(b);
  return Grid<std::int32_t>(height_, width_,
                            std::vector<std::int32_t>(span.begin(), span.end()));
}

Shape4 LabelField::field_shape() const {
  return Shape4{batch_, static_cast<std::size_t>(num_classes_), height_, width_};
}

ProbabilityField softmax(const LogitField& logits) {
  const Shape4& s = logits.shape();
  Tensor4 out(s);
  std::vector<double> e(s.classes);
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t h = 0; h < s.height; ++h) {
      for (std::size_t w = 0; w < s.width; ++w) {
        double top = logits(b, 0, h, w);
        for (std::size_t c = 1; c < s.classes; ++c) {
          top = std::max(top, logits(b, c, h, w));
        }
        double total = 0.0;
        for (std::size_t c = 0; c < s.classes; ++c) {
          e[c] = std::exp(logits(b, c, h, w) - top);
          total += e[c];
        }
        for (std::size_t c = 0; c < s.classes; ++c) {
          out(b, c, h, w) = e[c] / total;
        }
      }
    }
  }
  return ProbabilityField(std::move(out));
}

ProbabilityField one_hot(const LabelField& labels) {
  Tensor4 out(labels.field_shape());
  for (std::size_t b = 0; b < labels.batch(); ++b) {
    for (std::size_t h = 0; h < labels.height(); ++h) {
      for (std::size_t w = 0; w < labels.width(); ++w) {
        out(b, static_cast<std::size_t>(labels(b, h, w)), h, w) = 1.0;
      }
    }
  }
  return ProbabilityField(std::move(out));
}

LabelField argmax(const ProbabilityField& probs) {
  const Shape4& s = probs.shape();
  std::vector<std::int32_t> out(s.pixels());
  std::size_t i = 0;
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t h = 0; h < s.height; ++h) {
      for (std::size_t w = 0; w < s.width; ++w, ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < s.classes; ++c) {
          if (probs(b, c, h, w) > probs(b, best, h, w)) best = c;
        }
        out[i] = static_cast<std::int32_t>(best);
      }
    }
  }
  return LabelField(s.batch, s.height, s.width, static_cast<int>(s.classes),
                    std::move(out));
}

BinaryMask class_slice(const LabelField& labels, std::size_t b, int cls) {
  if (cls < 0 || cls >= labels.num_classes()) {
    throw DomainError("class index " + std::to_string(cls) + " out of range");
  }
  if (b >= labels.batch()) throw DomainError("batch index out of range");
  BinaryMask mask(labels.height(), labels.width());
  auto src = labels.image_span(b);
  auto dst = mask.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == cls ? 1 : 0;
  return mask;
}

void check_binary(const BinaryMask& mask) {
  for (auto v : mask) {
    if (v > 1) throw DomainError("mask entries must be 0 or 1");
  }
}

void check_simplex(const Tensor4& field, double tolerance) {
  const Shape4& s = field.shape();
  for (std::size_t b = 0; b < s.batch; ++b) {
    for (std::size_t h = 0; h < s.height; ++h) {
      for (std::size_t w = 0; w < s.width; ++w) {
        double total = 0.0;
        for (std::size_t c = 0; c < s.classes; ++c) {
          double v = field(b, c, h, w);
          if (!(v >= -tolerance && v <= 1.0 + tolerance)) {
            throw DomainError("probability entry outside [0, 1]");
          }
          total += v;
        }
        if (std::abs(total - 1.0) > tolerance) {
          throw DomainError("probabilities at pixel (" + std::to_string(b) +
                            ", " + std::to_string(h) + ", " +
                            std::to_string(w) + ") sum to " +
                            std::to_string(total));
        }
      }
    }
  }
}

BinaryMask complement(const BinaryMask& mask) {
  BinaryMask out(mask.height(), mask.width());
  auto src = mask.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 0 : 1;
  return out;
}

}  // namespace calseg
