// Copyright 2026 The graspkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "graspkit/rng.hpp"

namespace graspkit {

/// Quickhull in D dimensions.
///
/// Input points are joggled by a tiny deterministic offset derived from
/// their own coordinates before the hull is built. This puts structured
/// inputs (friction-cone generators share low-dimensional flats) in general
/// position so every facet is a simplex. Identical points receive identical
/// offsets, so duplicating a point or permuting the input leaves the
/// joggled point set unchanged.
///
/// Facets satisfy normal . x <= offset for every point of the hull.
template <int D>
class ConvexHull {
 public:
  using Point = Eigen::Matrix<double, D, 1>;

  struct Facet {
    std::array<int, D> vertices{};
    Point normal = Point::Zero();
    double offset = 0.0;
  };

  explicit ConvexHull(std::span<const Point> points, double joggle = 1e-7) {
    double scale = 0.0;
    for (const Point& p : points) scale = std::max(scale, p.cwiseAbs().maxCoeff());
    scale_ = 1.0 + scale;
    for (int attempt = 0; attempt < 4; ++attempt) {
      if (build(points, joggle * scale_)) return;
      joggle *= 10.0;
    }
    full_dimensional_ = false;
    facets_.clear();
  }

  bool full_dimensional() const { return full_dimensional_; }
  const std::vector<Facet>& facets() const { return facets_; }

  /// Smallest facet offset: the distance from the origin to the boundary when
  /// the origin is inside, negative when it lies outside some facet.
  double min_offset() const {
    double m = std::numeric_limits<double>::infinity();
    for (const Facet& f : facets_) m = std::min(m, f.offset);
    return facets_.empty() ? -std::numeric_limits<double>::infinity() : m;
  }

 private:
  struct Work {
    Facet facet;
    bool alive = true;
    std::vector<int> outside;
  };

  static Point jiggle(const Point& p, double amount) {
    std::uint64_t h = 0x243F6A8885A308D3ULL;
    for (int i = 0; i < D; ++i) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(p[i] + 0.0));
    Point out = p;
    for (int i = 0; i < D; ++i) {
      h = splitmix64(h);
      const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
      out[i] += amount * (2.0 * u - 1.0);
    }
    return out;
  }

  bool make_facet(const std::array<int, D>& verts, const Point& interior, Facet& out) const {
    Eigen::Matrix<double, D, D - 1> a;
    for (int k = 1; k < D; ++k) a.col(k - 1) = pts_[verts[k]] - pts_[verts[0]];
    Eigen::HouseholderQR<Eigen::Matrix<double, D, D - 1>> qr(a);
    const Eigen::Matrix<double, D, D> q = qr.householderQ();
    Point n = q.col(D - 1);
    double off = n.dot(pts_[verts[0]]);
    if (n.dot(interior) > off) {
      n = -n;
      off = -off;
    }
    out.vertices = verts;
    out.normal = n;
    out.offset = off;
    return std::isfinite(off);
  }

  bool build(std::span<const Point> input, double amount) {
    facets_.clear();
    full_dimensional_ = false;
    const int n = static_cast<int>(input.size());
    if (n < D + 1) return true;
    pts_.resize(n);
    for (int i = 0; i < n; ++i) pts_[i] = jiggle(input[i], amount);
    const double tol = 1e-11 * scale_;

    // Initial simplex: greedy maximum distance from the current affine hull.
    std::vector<int> simplex;
    int first = 0;
    for (int i = 1; i < n; ++i) {
      if (pts_[i][0] < pts_[first][0]) first = i;
    }
    simplex.push_back(first);
    std::vector<Point> basis;
    for (int k = 0; k < D; ++k) {
      int best = -1;
      double best_r = 0.0;
      for (int i = 0; i < n; ++i) {
        Point r = pts_[i] - pts_[first];
        for (const Point& b : basis) r -= b.dot(r) * b;
        const double len = r.norm();
        if (len > best_r) {
          best_r = len;
          best = i;
        }
      }
      // Anything within a few joggle amplitudes of the current flat is noise.
      if (best < 0 || best_r <= std::max(1e-9 * scale_, 4.0 * std::sqrt(double(D)) * amount)) {
        return true;  // lower-dimensional input
      }
      Point r = pts_[best] - pts_[first];
      for (const Point& b : basis) r -= b.dot(r) * b;
      basis.push_back(r.normalized());
      simplex.push_back(best);
    }
    full_dimensional_ = true;

    Point interior = Point::Zero();
    for (const int i : simplex) interior += pts_[i];
    interior /= static_cast<double>(D + 1);

    std::vector<Work> work;
    for (int skip = 0; skip <= D; ++skip) {
      std::array<int, D> verts{};
      int m = 0;
      for (int k = 0; k <= D; ++k) {
        if (k != skip) verts[m++] = simplex[k];
      }
      Work w;
      make_facet(verts, interior, w.facet);
      work.push_back(std::move(w));
    }
    std::vector<char> in_simplex(n, 0);
    for (const int i : simplex) in_simplex[i] = 1;
    for (int i = 0; i < n; ++i) {
      if (in_simplex[i]) continue;
      for (Work& w : work) {
        if (w.facet.normal.dot(pts_[i]) - w.facet.offset > tol) {
          w.outside.push_back(i);
          break;
        }
      }
    }

    std::deque<int> queue;
    for (int i = 0; i <= D; ++i) queue.push_back(i);
    while (!queue.empty()) {
      const int fid = queue.front();
      queue.pop_front();
      if (!work[fid].alive || work[fid].outside.empty()) continue;

      int apex = -1;
      double far = tol;
      for (const int i : work[fid].outside) {
        const double d = work[fid].facet.normal.dot(pts_[i]) - work[fid].facet.offset;
        if (d > far) {
          far = d;
          apex = i;
        }
      }
      if (apex < 0) {
        work[fid].outside.clear();
        continue;
      }

      std::vector<int> visible;
      for (int f = 0; f < static_cast<int>(work.size()); ++f) {
        if (work[f].alive &&
            work[f].facet.normal.dot(pts_[apex]) - work[f].facet.offset > tol) {
          visible.push_back(f);
        }
      }
      std::map<std::array<int, D - 1>, int> ridges;
      for (const int f : visible) {
        for (int skip = 0; skip < D; ++skip) {
          std::array<int, D - 1> r{};
          int m = 0;
          for (int k = 0; k < D; ++k) {
            if (k != skip) r[m++] = work[f].facet.vertices[k];
          }
          std::sort(r.begin(), r.end());
          ++ridges[r];
        }
      }
      std::vector<int> orphans;
      for (const int f : visible) {
        work[f].alive = false;
        for (const int i : work[f].outside) {
          if (i != apex) orphans.push_back(i);
        }
        work[f].outside.clear();
      }
      std::vector<int> created;
      for (const auto& [ridge, count] : ridges) {
        if (count != 1) continue;
        std::array<int, D> verts{};
        std::copy(ridge.begin(), ridge.end(), verts.begin());
        verts[D - 1] = apex;
        Work w;
        make_facet(verts, interior, w.facet);
        created.push_back(static_cast<int>(work.size()));
        work.push_back(std::move(w));
      }
      std::sort(orphans.begin(), orphans.end());
      orphans.erase(std::unique(orphans.begin(), orphans.end()), orphans.end());
      for (const int i : orphans) {
        for (const int f : created) {
          if (work[f].facet.normal.dot(pts_[i]) - work[f].facet.offset > tol) {
            work[f].outside.push_back(i);
            break;
          }
        }
      }
      for (const int f : created) {
        if (!work[f].outside.empty()) queue.push_back(f);
      }
    }

    for (Work& w : work) {
      if (w.alive) facets_.push_back(w.facet);
    }
    // Consistency: every point must lie inside every facet.
    const double slack = 1e-8 * scale_;
    for (const Facet& f : facets_) {
      for (const Point& p : pts_) {
        if (f.normal.dot(p) - f.offset > slack) return false;
      }
    }
    return !facets_.empty();
  }

  std::vector<Point> pts_;
  std::vector<Facet> facets_;
  bool full_dimensional_ = false;
  double scale_ = 1.0;
};

}  // namespace graspkit
