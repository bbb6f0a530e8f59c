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

#include "graspkit/bvh.hpp"

#include <algorithm>
#include <cmath>

namespace graspkit {

std::array<Vec3, 8> OrientedBox::corners() const {
  std::array<Vec3, 8> c;
  for (int i = 0; i < 8; ++i) {
    const Vec3 s((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
    c[i] = center + axes * s.cwiseProduct(half);
  }
  return c;
}

Aabb OrientedBox::bounds() const {
  const Vec3 r = axes.cwiseAbs() * half;
  Aabb b;
  b.lo = center - r;
  b.hi = center + r;
  return b;
}

bool OrientedBox::contains(const Vec3& p, double tol) const {
  const Vec3 local = axes.transpose() * (p - center);
  return (local.cwiseAbs().array() <= half.array() + tol).all();
}

std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (det == 0.0) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  return e2.dot(q) * inv;
}

namespace {

bool separated_on(const Vec3& axis, const std::array<Vec3, 3>& tri, const Vec3& half) {
  const double r = half.x() * std::abs(axis.x()) + half.y() * std::abs(axis.y()) +
                   half.z() * std::abs(axis.z());
  const double p0 = axis.dot(tri[0]);
  const double p1 = axis.dot(tri[1]);
  const double p2 = axis.dot(tri[2]);
  const double lo = std::min({p0, p1, p2});
  const double hi = std::max({p0, p1, p2});
  return lo > r || hi < -r;
}

void project(const Vec3& axis, const std::array<Vec3, 3>& t, double& lo, double& hi) {
  const double p0 = axis.dot(t[0]);
  const double p1 = axis.dot(t[1]);
  const double p2 = axis.dot(t[2]);
  lo = std::min({p0, p1, p2});
  hi = std::max({p0, p1, p2});
}

double ray_box_entry(const Vec3& origin, const Vec3& inv_dir, const Aabb& box) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    double a = (box.lo[i] - origin[i]) * inv_dir[i];
    double b = (box.hi[i] - origin[i]) * inv_dir[i];
    if (std::isnan(a) || std::isnan(b)) {
      // Ray parallel to and lying on a slab plane.
      if (origin[i] < box.lo[i] || origin[i] > box.hi[i]) return -1.0;
      continue;
    }
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
    if (t0 > t1) return -1.0;
  }
  return t0;
}

double box_distance_sq(const Vec3& p, const Aabb& box) {
  const Vec3 d = (box.lo - p).cwiseMax(Vec3::Zero()).cwiseMax(p - box.hi);
  return d.squaredNorm();
}

}  // namespace

bool triangle_box_overlap(const Vec3& a, const Vec3& b, const Vec3& c, const OrientedBox& box) {
  const Mat3 rt = box.axes.transpose();
  const std::array<Vec3, 3> t{rt * (a - box.center), rt * (b - box.center), rt * (c - box.center)};
  const Vec3& h = box.half;
  for (int i = 0; i < 3; ++i) {
    const double lo = std::min({t[0][i], t[1][i], t[2][i]});
    const double hi = std::max({t[0][i], t[1][i], t[2][i]});
    if (lo > h[i] || hi < -h[i]) return false;
  }
  const std::array<Vec3, 3> edges{t[1] - t[0], t[2] - t[1], t[0] - t[2]};
  const Vec3 n = edges[0].cross(edges[1]);
  if (n.squaredNorm() > 0.0 && separated_on(n, t, h)) return false;
  for (const Vec3& e : edges) {
    for (int i = 0; i < 3; ++i) {
      const Vec3 axis = Vec3::Unit(i).cross(e);
      if (axis.squaredNorm() == 0.0) continue;
      if (separated_on(axis, t, h)) return false;
    }
  }
  return true;
}

bool triangles_intersect(const std::array<Vec3, 3>& t, const std::array<Vec3, 3>& u) {
  const std::array<Vec3, 3> et{t[1] - t[0], t[2] - t[1], t[0] - t[2]};
  const std::array<Vec3, 3> eu{u[1] - u[0], u[2] - u[1], u[0] - u[2]};
  const Vec3 nt = et[0].cross(et[1]);
  const Vec3 nu = eu[0].cross(eu[1]);
  std::vector<Vec3> axes{nt, nu};
  for (const Vec3& a : et)
    for (const Vec3& b : eu) axes.push_back(a.cross(b));
  // In-plane axes decide coplanar pairs.
  for (const Vec3& a : et) axes.push_back(nt.cross(a));
  for (const Vec3& b : eu) axes.push_back(nu.cross(b));
  const double scale = std::max(nt.norm(), nu.norm());
  for (const Vec3& axis : axes) {
    if (axis.squaredNorm() <= 1e-24 * scale * scale) continue;
    double lo_t, hi_t, lo_u, hi_u;
    project(axis, t, lo_t, hi_t);
    project(axis, u, lo_u, hi_u);
    if (hi_t < lo_u || hi_u < lo_t) return false;
  }
  return true;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk.
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

MeshBvh::MeshBvh(std::shared_ptr<const TriMesh> mesh) : mesh_(std::move(mesh)) {
  if (!mesh_ || mesh_->empty()) throw Error("empty geometry");
  const int n = static_cast<int>(mesh_->num_faces());
  order_.resize(n);
  std::vector<Vec3> centroids(n);
  for (int i = 0; i < n; ++i) {
    order_[i] = i;
    centroids[i] = (mesh_->corner(i, 0) + mesh_->corner(i, 1) + mesh_->corner(i, 2)) / 3.0;
  }
  nodes_.reserve(2 * n);
  build(0, n, centroids);
}

int MeshBvh::build(int first, int count, std::vector<Vec3>& centroids) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb cbox;
  for (int i = first; i < first + count; ++i) {
    const int f = order_[i];
    for (int k = 0; k < 3; ++k) box.extend(mesh_->corner(f, k));
    cbox.extend(centroids[f]);
  }
  nodes_[id].box = box;
  constexpr int kLeafSize = 4;
  if (count <= kLeafSize) {
    nodes_[id].first = first;
    nodes_[id].count = count;
    return id;
  }
  int axis = 0;
  cbox.extent().maxCoeff(&axis);
  const int mid = first + count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                   [&](int a, int b) {
                     if (centroids[a][axis] != centroids[b][axis])
                       return centroids[a][axis] < centroids[b][axis];
                     return a < b;
                   });
  const int left = build(first, mid - first, centroids);
  const int right = build(mid, first + count - mid, centroids);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::optional<RayHit> MeshBvh::ray_cast(const Vec3& origin, const Vec3& direction,
                                        double max_distance) const {
  if (std::abs(direction.norm() - 1.0) > 1e-9) throw Error("ray direction must be unit length");
  const Vec3 inv = direction.cwiseInverse();
  double best = max_distance;
  int best_face = -1;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    const double entry = ray_box_entry(origin, inv, node.box);
    if (entry < 0.0 || entry > best) continue;
    if (node.leaf()) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int f = order_[i];
        const auto t =
            ray_triangle(origin, direction, mesh_->corner(f, 0), mesh_->corner(f, 1), mesh_->corner(f, 2));
        if (!t || *t <= kMinHitDistance) continue;
        if (*t < best || (*t == best && (best_face < 0 || f < best_face))) {
          best = *t;
          best_face = f;
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  if (best_face < 0) return std::nullopt;
  RayHit hit;
  hit.face = best_face;
  hit.distance = best;
  hit.point = origin + best * direction;
  hit.normal = mesh_->normals()[best_face];
  return hit;
}

std::optional<int> MeshBvh::first_box_overlap(const OrientedBox& box) const {
  const Aabb query = box.bounds();
  int best = -1;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!node.box.overlaps(query)) continue;
    if (node.leaf()) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int f = order_[i];
        if (best >= 0 && f >= best) continue;
        if (triangle_box_overlap(mesh_->corner(f, 0), mesh_->corner(f, 1), mesh_->corner(f, 2), box)) {
          best = f;
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

ClosestPoint MeshBvh::closest_point(const Vec3& p) const {
  ClosestPoint best;
  double best_sq = std::numeric_limits<double>::infinity();
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_distance_sq(p, node.box) > best_sq) continue;
    if (node.leaf()) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int f = order_[i];
        const Vec3 q =
            closest_point_on_triangle(p, mesh_->corner(f, 0), mesh_->corner(f, 1), mesh_->corner(f, 2));
        const double d = (q - p).squaredNorm();
        if (d < best_sq || (d == best_sq && f < best.face)) {
          best_sq = d;
          best.point = q;
          best.face = f;
        }
      }
    } else {
      const double dl = box_distance_sq(p, nodes_[node.left].box);
      const double dr = box_distance_sq(p, nodes_[node.right].box);
      // Visit the nearer child first.
      if (dl <= dr) {
        stack[top++] = node.right;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

bool MeshBvh::intersects(const MeshBvh& other) const {
  if (!bounds().overlaps(other.bounds())) return false;
  return intersects_node(0, other, 0);
}

bool MeshBvh::intersects_node(int a, const MeshBvh& other, int b) const {
  const Node& na = nodes_[a];
  const Node& nb = other.nodes_[b];
  if (!na.box.overlaps(nb.box)) return false;
  if (na.leaf() && nb.leaf()) {
    for (int i = na.first; i < na.first + na.count; ++i) {
      const int fa = order_[i];
      const std::array<Vec3, 3> ta{mesh_->corner(fa, 0), mesh_->corner(fa, 1), mesh_->corner(fa, 2)};
      for (int j = nb.first; j < nb.first + nb.count; ++j) {
        const int fb = other.order_[j];
        const TriMesh& mb = *other.mesh_;
        const std::array<Vec3, 3> tb{mb.corner(fb, 0), mb.corner(fb, 1), mb.corner(fb, 2)};
        if (triangles_intersect(ta, tb)) return true;
      }
    }
    return false;
  }
  const bool split_a =
      !na.leaf() && (nb.leaf() || na.box.extent().squaredNorm() >= nb.box.extent().squaredNorm());
  if (split_a) {
    return intersects_node(na.left, other, b) || intersects_node(na.right, other, b);
  }
  return intersects_node(a, other, nb.left) || intersects_node(a, other, nb.right);
}

std::optional<RayHit> ray_cast(const TriMesh& mesh, const Vec3& origin, const Vec3& direction) {
  const MeshBvh bvh(std::make_shared<const TriMesh>(mesh));
  return bvh.ray_cast(origin, direction);
}

ScalarField mesh_sdf(const TriMesh& mesh, double voxel_size, int padding) {
  if (mesh.empty()) throw Error("empty geometry");
  if (!(voxel_size > 0)) throw Error("voxel_size must be positive");
  const MeshBvh bvh(std::make_shared<const TriMesh>(mesh));
  const Aabb b = mesh.bounds();
  const Vec3 origin = b.lo - Vec3::Constant(padding * voxel_size);
  std::array<int, 3> dims{};
  for (int k = 0; k < 3; ++k) {
    dims[k] = static_cast<int>(std::ceil(b.extent()[k] / voxel_size)) + 2 * padding + 1;
  }
  return ScalarField::sample(
      [&](const Vec3& p) {
        const double d = bvh.closest_point(p).distance;
        return winding_number(mesh, p) > 0.5 ? -d : d;
      },
      origin, voxel_size, dims);
}

}  // namespace graspkit
