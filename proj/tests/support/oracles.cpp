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


#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

PointSet to_set(const Mask& m) {
  PointSet s;
  for (int y = 0; y < m.h; ++y) {
    for (int x = 0; x < m.w; ++x) {
      if (m.at(y, x)) s.insert({y, x});
    }
  }
  return s;
}

Mask to_mask(const PointSet& s, int h, int w) {
  Mask m{h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h * w), 0)};
  for (const auto& [y, x] : s) m.v[y * w + x] = 1;
  return m;
}

std::vector<Point> square_offsets(int k) {
  std::vector<Point> out;
  const int r = k / 2;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) out.push_back({dy, dx});
  }
  return out;
}

std::vector<Point> cross_offsets(int k) {
  std::vector<Point> out;
  const int r = k / 2;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dy == 0 || dx == 0) out.push_back({dy, dx});
    }
  }
  return out;
}

PointSet dilation(const PointSet& a, const std::vector<Point>& b, int h,
                  int w) {
  PointSet out;
  for (const auto& [ay, ax] : a) {
    for (const auto& [by, bx] : b) {
      const int y = ay + by;
      const int x = ax + bx;
      if (y >= 0 && y < h && x >= 0 && x < w) out.insert({y, x});
    }
  }
  return out;
}

PointSet erosion(const PointSet& a, const std::vector<Point>& b, int h,
                 int w) {
  PointSet out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool fits = true;
      for (const auto& [by, bx] : b) {
        if (!a.count({y + by, x + bx})) {
          fits = false;
          break;
        }
      }
      if (fits) out.insert({y, x});
    }
  }
  return out;
}

PointSet set_minus(const PointSet& a, const PointSet& b) {
  PointSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::inserter(out, out.end()));
  return out;
}

PointSet morph(const PointSet& a, int op, const std::vector<Point>& b, int h,
               int w) {
  switch (op) {
    case 0: return a;
    case 1: return erosion(a, b, h, w);
    case 2: return dilation(a, b, h, w);
    case 3: return dilation(erosion(a, b, h, w), b, h, w);
    case 4: return erosion(dilation(a, b, h, w), b, h, w);
    case 5: return set_minus(dilation(a, b, h, w), erosion(a, b, h, w));
    case 6: return set_minus(a, erosion(a, b, h, w));
    case 7: return set_minus(dilation(a, b, h, w), a);
  }
  return {};
}

std::vector<std::int64_t> brute_squared_edt(const Mask& m) {
  std::vector<Point> sites;
  for (int y = 0; y < m.h; ++y) {
    for (int x = 0; x < m.w; ++x) {
      if (m.at(y, x)) sites.push_back({y, x});
    }
  }
  std::vector<std::int64_t> out(m.v.size(), -1);
  if (sites.empty()) return out;
  for (int y = 0; y < m.h; ++y) {
    for (int x = 0; x < m.w; ++x) {
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (const auto& [sy, sx] : sites) {
        const std::int64_t dy = y - sy;
        const std::int64_t dx = x - sx;
        best = std::min(best, dy * dy + dx * dx);
      }
      out[y * m.w + x] = best;
    }
  }
  return out;
}

double brute_hd95(const Mask& pred, const Mask& gt) {
  const PointSet p = to_set(pred);
  const PointSet g = to_set(gt);
  if (p.empty() || g.empty()) return -1.0;
  const auto se = square_offsets(3);
  const PointSet bp = set_minus(p, erosion(p, se, pred.h, pred.w));
  const PointSet bg = set_minus(g, erosion(g, se, gt.h, gt.w));
  std::vector<double> d;
  auto directed = [&d](const PointSet& from, const PointSet& to) {
    for (const auto& [y0, x0] : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [y1, x1] : to) {
        best = std::min(best, std::hypot(double(y0 - y1), double(x0 - x1)));
      }
      d.push_back(best);
    }
  };
  directed(bp, bg);
  directed(bg, bp);
  std::sort(d.begin(), d.end());
  // Smallest value with at least 95% of the pool at or below it.
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (100 * (i + 1) >= 95 * d.size()) return d[i];
  }
  return d.back();
}

double enumerate_pece(const std::vector<double>& conf,
                      const std::vector<std::uint8_t>& truth, int bins,
                      double fp_weight) {
  double total = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) / bins;
    const double hi = static_cast<double>(b + 1) / bins;
    double n = 0, sp = 0, sa = 0, nfp = 0, sfp = 0;
    for (std::size_t i = 0; i < conf.size(); ++i) {
      const bool in = (conf[i] > lo && conf[i] <= hi) || (b == 0 && conf[i] == 0.0);
      if (!in) continue;
      n += 1;
      sp += conf[i];
      sa += truth[i];
      if (truth[i] == 0) {
        nfp += 1;
        sfp += conf[i];
      }
    }
    if (n == 0) continue;
    const double fp = nfp > 0 ? sfp / nfp : 0.0;
    total += std::abs((sp / n - sa / n) + fp_weight * fp) * n /
             static_cast<double>(conf.size());
  }
  return total;
}

std::vector<double> central_difference(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double step) {
  std::vector<double> g(x.size());
  std::vector<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

Mask random_mask(std::mt19937_64& rng, int h, int w, double density) {
  std::bernoulli_distribution coin(density);
  Mask m{h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h * w))};
  for (auto& v : m.v) v = coin(rng) ? 1 : 0;
  return m;
}

}  // namespace oracle
