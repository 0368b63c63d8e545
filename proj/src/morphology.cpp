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

#include "calseg/morphology.hpp"

#include <utility>

namespace calseg {
namespace {

struct Offset {
  int dr;
  int dc;
};

std::vector<Offset> offsets(const StructuringElement& se) {
  std::vector<Offset> out;
  const int r = static_cast<int>(se.radius());
  for (int dr = -r; dr <= r; ++dr) {
    for (int dc = -r; dc <= r; ++dc) {
      if (se.contains(dr, dc)) out.push_back({dr, dc});
    }
  }
  return out;
}

BinaryMask subtract(const BinaryMask& a, const BinaryMask& b) {
  BinaryMask out(a.height(), a.width());
  auto x = a.data();
  auto y = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = (x[i] && !y[i]) ? 1 : 0;
  return out;
}

}  // namespace

StructuringElement::StructuringElement(std::size_t k,
                                       std::vector<std::uint8_t> data)
    : k_(k), data_(std::move(data)) {
  if (k_ == 0 || k_ % 2 == 0) {
    throw DomainError("structuring element size must be odd, got " +
                      std::to_string(k_));
  }
  if (data_.size() != k_ * k_) {
    throw DomainError("structuring element data must hold k*k entries");
  }
  for (auto v : data_) {
    if (v > 1) throw DomainError("structuring element entries must be 0 or 1");
  }
  if (!data_[(k_ / 2) * k_ + k_ / 2]) {
    throw DomainError("structuring element must contain its origin");
  }
}

StructuringElement StructuringElement::square(std::size_t k) {
  return StructuringElement(k, std::vector<std::uint8_t>(k * k, 1));
}

StructuringElement StructuringElement::cross(std::size_t k) {
  std::vector<std::uint8_t> data(k * k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    data[(k / 2) * k + i] = 1;
    data[i * k + k / 2] = 1;
  }
  return StructuringElement(k, std::move(data));
}

bool StructuringElement::contains(int dr, int dc) const {
  const int r = static_cast<int>(radius());
  if (dr < -r || dr > r || dc < -r || dc > r) return false;
  return data_[static_cast<std::size_t>(dr + r) * k_ +
               static_cast<std::size_t>(dc + r)] != 0;
}

StructuringElement StructuringElement::reflect() const {
  std::vector<std::uint8_t> out(data_.rbegin(), data_.rend());
  return StructuringElement(k_, std::move(out));
}

std::string_view to_string(MorphOp op) {
  switch (op) {
    case MorphOp::kIdentity: return "identity";
    case MorphOp::kErosion: return "erosion";
    case MorphOp::kDilation: return "dilation";
    case MorphOp::kOpening: return "opening";
    case MorphOp::kClosing: return "closing";
    case MorphOp::kGradient: return "gradient";
    case MorphOp::kInternalBoundary: return "internal_boundary";
    case MorphOp::kExternalBoundary: return "external_boundary";
  }
  return "unknown";
}

std::optional<MorphOp> parse_morph_op(std::string_view tag) {
  for (MorphOp op : kAllMorphOps) {
    if (to_string(op) == tag) return op;
  }
  return std::nullopt;
}

std::string morph_op_tags() {
  std::string out;
  for (MorphOp op : kAllMorphOps) {
    if (!out.empty()) out += ", ";
    out += to_string(op);
  }
  return out;
}

BinaryMask dilate(const BinaryMask& a, const StructuringElement& se) {
  const auto offs = offsets(se);
  const int h = static_cast<int>(a.height());
  const int w = static_cast<int>(a.width());
  BinaryMask out(a.height(), a.width());
  // out(x) = 1 iff x - b lies in A for some b in B.
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (const Offset& o : offs) {
        const int sr = r - o.dr;
        const int sc = c - o.dc;
        if (sr >= 0 && sr < h && sc >= 0 && sc < w && a(sr, sc)) {
          out(r, c) = 1;
          break;
        }
      }
    }
  }
  return out;
}

BinaryMask erode(const BinaryMask& a, const StructuringElement& se) {
  const auto offs = offsets(se);
  const int h = static_cast<int>(a.height());
  const int w = static_cast<int>(a.width());
  BinaryMask out(a.height(), a.width());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      bool fits = true;
      for (const Offset& o : offs) {
        const int sr = r + o.dr;
        const int sc = c + o.dc;
        if (sr < 0 || sr >= h || sc < 0 || sc >= w || !a(sr, sc)) {
          fits = false;
          break;
        }
      }
      out(r, c) = fits ? 1 : 0;
    }
  }
  return out;
}

BinaryMask apply_morph(const BinaryMask& a, MorphOp op,
                       const StructuringElement& se) {
  switch (op) {
    case MorphOp::kIdentity: return a;
    case MorphOp::kErosion: return erode(a, se);
    case MorphOp::kDilation: return dilate(a, se);
    case MorphOp::kOpening: return dilate(erode(a, se), se);
    case MorphOp::kClosing: return erode(dilate(a, se), se);
    case MorphOp::kGradient: return subtract(dilate(a, se), erode(a, se));
    case MorphOp::kInternalBoundary: return subtract(a, erode(a, se));
    case MorphOp::kExternalBoundary: return subtract(dilate(a, se), a);
  }
  throw DomainError("unknown morphological operation");
}

MorphedClasses morph_classes(const LabelField& labels, std::size_t b,
                             MorphOp op, const StructuringElement& se) {
  const int num_classes = labels.num_classes();
  MorphedClasses out;
  out.stack.resize(static_cast<std::size_t>(num_classes));
  out.labels = Grid<std::int32_t>(labels.height(), labels.width(), 0);
  BinaryMask claimed(labels.height(), labels.width());
  for (int cls = 1; cls < num_classes; ++cls) {
    BinaryMask m = apply_morph(class_slice(labels, b, cls), op, se);
    auto src = m.data();
    auto taken = claimed.data();
    auto dst = out.labels.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (src[i] && !taken[i]) {
        dst[i] = cls;
        taken[i] = 1;
      }
    }
    out.stack[static_cast<std::size_t>(cls)] = std::move(m);
  }
  out.stack[0] = complement(claimed);
  return out;
}

LabelField morph_labels(const LabelField& labels, MorphOp op,
                        const StructuringElement& se) {
  std::vector<std::int32_t> data;
  data.reserve(labels.size());
  for (std::size_t b = 0; b < labels.batch(); ++b) {
    MorphedClasses m = morph_classes(labels, b, op, se);
    data.insert(data.end(), m.labels.begin(), m.labels.end());
  }
  return LabelField(labels.batch(), labels.height(), labels.width(),
                    labels.num_classes(), std::move(data));
}

}  // namespace calseg
