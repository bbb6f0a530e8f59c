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

// Reference implementations used only by tests. Each one is deliberately
// slow and written without the library's acceleration structures or solvers.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "graspkit/antipodal.hpp"
#include "graspkit/bvh.hpp"
#include "graspkit/geometry.hpp"
#include "graspkit/scene.hpp"
#include "graspkit/wrench.hpp"

namespace oracle {

using graspkit::Vec3;
using Wrench = Eigen::Matrix<double, 6, 1>;

// Signed cofactor vector of five vectors in R^6: orthogonal to all of them,
// zero when they are linearly dependent.
inline Wrench cross5(const std::array<Wrench, 5>& v) {
  Eigen::Matrix<double, 6, 5> m;
  for (int k = 0; k < 5; ++k) m.col(k) = v[k];
  Wrench out;
  for (int row = 0; row < 6; ++row) {
    Eigen::Matrix<double, 5, 5> minor;
    for (int r = 0, mr = 0; r < 6; ++r) {
      if (r == row) continue;
      minor.row(mr++) = m.row(r);
    }
    out[row] = ((row % 2) ? -1.0 : 1.0) * minor.determinant();
  }
  return out;
}

template <typename Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  if (k > n) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (!fn(idx)) return;
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

/// Origin strictly inside conv(W) iff the wrenches positively span R^6: full
/// rank and no closed half-space through the origin holds them all. A
/// pointed separating cone has an extreme ray orthogonal to five linearly
/// independent wrenches, so enumerating 5-subsets is exhaustive.
inline bool origin_inside(const std::vector<Wrench>& w) {
  const int n = static_cast<int>(w.size());
  if (n < 7) return false;
  Eigen::MatrixXd m(6, n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    m.col(i) = w[i];
    scale = std::max(scale, w[i].norm());
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  if (svd.singularValues()[5] <= 1e-10 * scale) return false;
  bool inside = true;
  for_each_subset(n, 5, [&](const std::vector<int>& s) {
    std::array<Wrench, 5> v;
    for (int k = 0; k < 5; ++k) v[k] = w[s[k]];
    Wrench u = cross5(v);
    const double len = u.norm();
    if (len <= 1e-12 * std::pow(scale, 5)) return true;
    u /= len;
    const double tol = 1e-10 * scale;
    bool pos = true;
    bool neg = true;
    for (const Wrench& x : w) {
      const double d = u.dot(x);
      if (d < -tol) pos = false;
      if (d > tol) neg = false;
      if (!pos && !neg) break;
    }
    if (pos || neg) {
      inside = false;
      return false;
    }
    return true;
  });
  return inside;
}

/// Distance from the origin to the nearest facet of conv(W), by enumerating
/// every 6-subset whose affine hull leaves all points on one side. Only
/// meaningful when the origin is inside.
inline double hull_margin(const std::vector<Wrench>& w) {
  const int n = static_cast<int>(w.size());
  double scale = 0.0;
  for (const Wrench& x : w) scale = std::max(scale, x.norm());
  double best = std::numeric_limits<double>::infinity();
  for_each_subset(n, 6, [&](const std::vector<int>& s) {
    std::array<Wrench, 5> v;
    for (int k = 0; k < 5; ++k) v[k] = w[s[k + 1]] - w[s[0]];
    Wrench u = cross5(v);
    const double len = u.norm();
    if (len <= 1e-14 * std::pow(scale, 5)) return true;
    u /= len;
    double off = u.dot(w[s[0]]);
    if (off < 0) {
      u = -u;
      off = -off;
    }
    if (off >= best) return true;
    const double tol = 1e-10 * scale;
    for (const Wrench& x : w) {
      if (u.dot(x) > off + tol) return true;
    }
    best = off;
    return true;
  });
  return best;
}

/// Plane intersection followed by same-side edge tests; edges inclusive.
inline std::optional<double> ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a,
                                          const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double denom = n.dot(d);
  if (std::abs(denom) < 1e-300) return std::nullopt;
  const double t = n.dot(a - o) / denom;
  const Vec3 p = o + t * d;
  const double e = 1e-12 * n.squaredNorm();
  if ((b - a).cross(p - a).dot(n) < -e) return std::nullopt;
  if ((c - b).cross(p - b).dot(n) < -e) return std::nullopt;
  if ((a - c).cross(p - c).dot(n) < -e) return std::nullopt;
  return t;
}

struct Hit {
  int face = -1;
  double distance = 0.0;
};

/// Nearest hit beyond `min_distance` over every face.
inline std::optional<Hit> ray_cast(const graspkit::TriMesh& mesh, const Vec3& o, const Vec3& d,
                                   double min_distance = graspkit::kMinHitDistance) {
  std::optional<Hit> best;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const auto t = ray_triangle(o, d, mesh.corner(f, 0), mesh.corner(f, 1), mesh.corner(f, 2));
    if (!t || *t <= min_distance) continue;
    if (!best || *t < best->distance) best = Hit{static_cast<int>(f), *t};
  }
  return best;
}

/// Clips the triangle against the six slabs of the box in its local frame;
/// any surviving polygon means the triangle meets the box.
inline bool triangle_meets_box(const Vec3& a, const Vec3& b, const Vec3& c,
                               const graspkit::OrientedBox& box, double slack = 1e-12) {
  std::vector<Vec3> poly;
  for (const Vec3* p : {&a, &b, &c}) poly.push_back(box.axes.transpose() * (*p - box.center));
  for (int axis = 0; axis < 3; ++axis) {
    for (const double sign : {1.0, -1.0}) {
      const double lim = box.half[axis] + slack;
      std::vector<Vec3> out;
      const std::size_t m = poly.size();
      for (std::size_t i = 0; i < m; ++i) {
        const Vec3& p = poly[i];
        const Vec3& q = poly[(i + 1) % m];
        const double dp = sign * p[axis] - lim;
        const double dq = sign * q[axis] - lim;
        if (dp <= 0) out.push_back(p);
        if ((dp < 0 && dq > 0) || (dp > 0 && dq < 0)) out.push_back(p + (q - p) * (dp / (dp - dq)));
      }
      poly = std::move(out);
      if (poly.empty()) return false;
    }
  }
  return true;
}

inline bool mesh_meets_box(const graspkit::TriMesh& mesh, const graspkit::OrientedBox& box) {
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (triangle_meets_box(mesh.corner(f, 0), mesh.corner(f, 1), mesh.corner(f, 2), box)) {
      return true;
    }
  }
  return false;
}

/// Euclidean distance from `p` to triangle abc: the plane distance when the
/// projection falls inside, otherwise the nearest of the three edges.
inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double nn = n.squaredNorm();
  if (nn > 0.0) {
    const Vec3 q = p - n * (n.dot(p - a) / nn);
    if ((b - a).cross(q - a).dot(n) >= 0 && (c - b).cross(q - b).dot(n) >= 0 &&
        (a - c).cross(q - c).dot(n) >= 0) {
      return (p - q).norm();
    }
  }
  auto segment = [&p](const Vec3& u, const Vec3& v) {
    const Vec3 e = v - u;
    const double len2 = e.squaredNorm();
    const double t = len2 > 0 ? std::clamp(e.dot(p - u) / len2, 0.0, 1.0) : 0.0;
    return (u + t * e - p).norm();
  };
  return std::min({segment(a, b), segment(b, c), segment(c, a)});
}

inline double mesh_distance(const graspkit::TriMesh& mesh, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    best = std::min(best, point_triangle_distance(p, mesh.corner(f, 0), mesh.corner(f, 1), mesh.corner(f, 2)));
  }
  return best;
}

/// Ray-parity inside test along a fixed generic direction.
inline bool point_inside(const graspkit::TriMesh& mesh, const Vec3& p) {
  const Vec3 d = Vec3(0.5772156649, 0.3183098862, 0.7071067812).normalized();
  int crossings = 0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const auto t = ray_triangle(p, d, mesh.corner(f, 0), mesh.corner(f, 1), mesh.corner(f, 2));
    if (t && *t > 0.0) ++crossings;
  }
  return crossings % 2 == 1;
}

inline bool solid_meets_box(const graspkit::TriMesh& mesh, const graspkit::OrientedBox& box) {
  return mesh_meets_box(mesh, box) || point_inside(mesh, box.center);
}

/// Same rules as the scene collision query, as flat loops: table first, then
/// instances in order; the target's interior is free.
inline std::optional<int> grasp_collision(const graspkit::Scene& scene, const graspkit::Grasp& g,
                                          const graspkit::GripperSpec& gripper, int target_id) {
  const auto jaws = graspkit::jaw_boxes(gripper, g.pose, g.width + gripper.open_margin);
  for (const auto* b : {&jaws.left, &jaws.right, &jaws.palm}) {
    for (const Vec3& c : b->corners()) {
      if (c.z() < 0.0) return graspkit::kTableEntity;
    }
  }
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const graspkit::TriMesh& m = scene.world(i).mesh();
    const int id = scene.instances()[i].object_id;
    bool hit = solid_meets_box(m, jaws.left) || solid_meets_box(m, jaws.right) ||
               solid_meets_box(m, jaws.palm);
    if (!hit && id != target_id) hit = solid_meets_box(m, jaws.interior);
    if (hit) return id;
  }
  return std::nullopt;
}

/// Angle between two vectors in radians, robust near 0 and pi.
inline double angle(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Distance from `p` to the infinite line through `a` and `b`.
inline double line_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 d = (b - a).normalized();
  return (p - a - d * d.dot(p - a)).norm();
}

}  // namespace oracle
