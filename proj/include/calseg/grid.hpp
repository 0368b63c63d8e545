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

// Dense grid containers shared by every calseg module.
//
// All 4-D fields are stored row-major in (batch, class, height, width) order.
// Arithmetic is double precision throughout; only the file formats in io.hpp
// narrow to 32-bit floats.

#ifndef CALSEG_GRID_HPP_
#define CALSEG_GRID_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace calseg {

// Precondition violations on values (bad class index, even kernel size, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised where an operation needs a nonempty pixel set and got none.
class EmptySetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two operands whose extents disagree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense 2-D grid, row-major.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), data_(height * width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<T> data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != height_ * width_) {
      throw ShapeError("grid data length does not match " +
                       std::to_string(height_) + "x" + std::to_string(width_));
    }
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * width_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * width_ + c];
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool same_shape(const Grid& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

// Entries are exactly 0 or 1.
using BinaryMask = Grid<std::uint8_t>;
using RealGrid = Grid<double>;

struct Shape4 {
  std::size_t batch = 0;
  std::size_t classes = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return batch * classes * height * width; }
  std::size_t pixels() const { return batch * height * width; }
  std::size_t plane() const { return height * width; }
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

std::string to_string(const Shape4& shape);

// Dense (b, c, h, w) array of doubles.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape4 shape, double fill = 0.0);
  Tensor4(Shape4 shape, std::vector<double> data);

  const Shape4& shape() const { return shape_; }

  std::size_t index(std::size_t b, std::size_t c, std::size_t h,
                    std::size_t w) const {
    return ((b * shape_.classes + c) * shape_.height + h) * shape_.width + w;
  }
  double& operator()(std::size_t b, std::size_t c, std::size_t h,
                     std::size_t w) {
    return data_[index(b, c, h, w)];
  }
  double operator()(std::size_t b, std::size_t c, std::size_t h,
                    std::size_t w) const {
    return data_[index(b, c, h, w)];
  }

  // Contiguous h*w plane of one (batch, class) pair.
  std::span<double> plane(std::size_t b, std::size_t c);
  std::span<const double> plane(std::size_t b, std::size_t c) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  Shape4 shape_;
  std::vector<double> data_;
};

// Raw network outputs z. Finite, at least two classes.
class LogitField : public Tensor4 {
 public:
  LogitField() = default;
  explicit LogitField(Tensor4 values);
};

// Per-pixel class distributions. Vectors sum to 1.
class ProbabilityField : public Tensor4 {
 public:
  ProbabilityField() = default;
  explicit ProbabilityField(Tensor4 values) : Tensor4(std::move(values)) {}
};

// Smoothed (possibly morphed) targets share the simplex invariant.
using SoftTargetField = ProbabilityField;

// Integer class map, shape (batch, height, width). Class 0 is background.
class LabelField {
 public:
  LabelField() = default;
  LabelField(std::size_t batch, std::size_t height, std::size_t width,
             int num_classes, std::vector<std::int32_t> data);
  // Single image.
  LabelField(const Grid<std::int32_t>& image, int num_classes);

  std::size_t batch() const { return batch_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  int num_classes() const { return num_classes_; }
  std::size_t size() const { return data_.size(); }

  std::int32_t operator()(std::size_t b, std::size_t h, std::size_t w) const {
    return data_[(b * height_ + h) * width_ + w];
  }
  std::span<const std::int32_t> data() const { return data_; }
  std::span<const std::int32_t> image_span(std::size_t b) const;
  Grid<std::int32_t> image(std::size_t b) const;

  // Shape of a (batch, num_classes, height, width) field over these labels.
  Shape4 field_shape() const;

  friend bool operator==(const LabelField&, const LabelField&) = default;

 private:
  std::size_t batch_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  int num_classes_ = 0;
  std::vector<std::int32_t> data_;
};

// Max-subtraction softmax over the class axis.
ProbabilityField softmax(const LogitField& logits);

// Indicator field with a single 1 per pixel at the label's class.
ProbabilityField one_hot(const LabelField& labels);

// Per-pixel argmax. Ties go to the lowest class index.
LabelField argmax(const ProbabilityField& probs);

// Mask of pixels in image `b` whose label equals `cls`.
BinaryMask class_slice(const LabelField& labels, std::size_t b, int cls);

// Throws DomainError unless every entry is 0 or 1.
void check_binary(const BinaryMask& mask);

// Throws DomainError unless entries lie in [0, 1] and every per-pixel class
// vector sums to 1 within `tolerance`.
void check_simplex(const Tensor4& field, double tolerance);

BinaryMask complement(const BinaryMask& mask);

}  // namespace calseg

#endif  // CALSEG_GRID_HPP_
