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

#include <array>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "graspkit/geometry.hpp"

namespace graspkit {

struct RayHit {
  Vec3 point;
  int face = -1;
  Vec3 normal;
  double distance = 0.0;
};

/// Box with orthonormal axes (columns of `axes`) and half extents.
struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();
  Vec3 half = Vec3::Zero();

  std::array<Vec3, 8> corners() const;
  Aabb bounds() const;
  bool contains(const Vec3& p, double tol = 0.0) const;
};

struct ClosestPoint {
  Vec3 point;
  int face = -1;
  double distance = std::numeric_limits<double>::infinity();
};

/// Hits closer than this are ignored so rays started on a surface do not
/// report the surface itself.
inline constexpr double kMinHitDistance = 1e-9;

// Primitive predicates shared by the tree and by exhaustive reference loops.

/// Moller-Trumbore, edges inclusive. Returns the ray parameter on a hit.
std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c);
/// Separating-axis test; touching counts as overlap.
bool triangle_box_overlap(const Vec3& a, const Vec3& b, const Vec3& c, const OrientedBox& box);
/// Separating-axis test including the coplanar axes; touching counts.
bool triangles_intersect(const std::array<Vec3, 3>& t, const std::array<Vec3, 3>& u);
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Binary bounding-volume hierarchy over the faces of an immutable mesh.
/// Queries are const and reentrant.
class MeshBvh {
 public:
  explicit MeshBvh(std::shared_ptr<const TriMesh> mesh);

  const TriMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TriMesh> shared_mesh() const { return mesh_; }
  const Aabb& bounds() const { return nodes_.front().box; }

  /// Nearest hit with distance in (kMinHitDistance, max_distance]. Ties on
  /// distance resolve to the lowest face index.
  std::optional<RayHit> ray_cast(const Vec3& origin, const Vec3& direction,
                                 double max_distance = std::numeric_limits<double>::infinity()) const;

  /// Lowest-index face overlapping the box, if any.
  std::optional<int> first_box_overlap(const OrientedBox& box) const;
  bool overlaps_box(const OrientedBox& box) const { return first_box_overlap(box).has_value(); }

  ClosestPoint closest_point(const Vec3& p) const;

  /// True when any face of this mesh intersects any face of `other`.
  bool intersects(const MeshBvh& other) const;

 private:
  struct Node {
    Aabb box;
    int left = -1;
    int right = -1;
    int first = 0;
    int count = 0;
    bool leaf() const { return left < 0; }
  };

  int build(int first, int count, std::vector<Vec3>& centroids);
  bool intersects_node(int a, const MeshBvh& other, int b) const;

  std::shared_ptr<const TriMesh> mesh_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

/// Signed distance of a closed mesh sampled on a grid covering its bounds
/// plus `padding` voxels. Sign from the winding number, negative inside.
ScalarField mesh_sdf(const TriMesh& mesh, double voxel_size, int padding = 2);

/// Convenience wrapper that builds a tree for a single query.
std::optional<RayHit> ray_cast(const TriMesh& mesh, const Vec3& origin, const Vec3& direction);

}  // namespace graspkit
