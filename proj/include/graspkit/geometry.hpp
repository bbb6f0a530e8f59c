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
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "graspkit/common.hpp"
#include "graspkit/rng.hpp"

namespace graspkit {

using Face = std::array<int, 3>;

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool valid() const { return (lo.array() <= hi.array()).all(); }
  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
  bool contains(const Vec3& p) const { return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
  bool overlaps(const Aabb& o) const {
    return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all();
  }
};

/// Indexed triangle surface. Immutable after construction; faces whose area
/// is at or below kMinFaceArea are dropped and counted.
class TriMesh {
 public:
  static constexpr double kMinFaceArea = 1e-12;

  TriMesh() = default;
  TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Vec3>& normals() const { return normals_; }
  const std::vector<double>& areas() const { return areas_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_faces() const { return faces_.size(); }
  bool empty() const { return faces_.empty(); }
  std::size_t dropped_faces() const { return dropped_; }

  const Vec3& corner(std::size_t face, int k) const { return vertices_[faces_[face][k]]; }
  double total_area() const;
  Aabb bounds() const;

  /// Every undirected edge is shared by exactly two faces that traverse it in
  /// opposite directions.
  bool is_watertight() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3> normals_;
  std::vector<double> areas_;
  std::size_t dropped_ = 0;
};

/// Regular grid of signed distances, negative inside. Values are stored with
/// x varying fastest.
struct ScalarField {
  Vec3 origin = Vec3::Zero();
  double voxel_size = 0.0;
  std::array<int, 3> dims{0, 0, 0};
  std::vector<double> values;

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }
  Vec3 point(int i, int j, int k) const { return origin + voxel_size * Vec3(i, j, k); }

  /// Throws Error unless dims >= 2, voxel_size > 0 and the value count matches.
  void validate() const;

  /// Samples `fn` on the grid.
  static ScalarField sample(const std::function<double(const Vec3&)>& fn, const Vec3& origin,
                            double voxel_size, std::array<int, 3> dims);
};

struct MassProperties {
  double volume = 0.0;
  double mass = 0.0;
  Vec3 center_of_mass = Vec3::Zero();
};

/// Iso-surface extraction over a fixed 256-case triangulation table. Normals
/// point toward increasing field values.
TriMesh marching_cubes(const ScalarField& field, double iso = 0.0);

struct SurfaceSample {
  Vec3 point;
  Vec3 normal;
  int face = -1;
};

/// Area-weighted face selection followed by a uniform barycentric draw.
class SurfaceSampler {
 public:
  explicit SurfaceSampler(const TriMesh& mesh);
  SurfaceSample draw(Rng& rng) const;

 private:
  const TriMesh* mesh_;
  std::vector<double> cdf_;
};

std::vector<SurfaceSample> surface_sample(const TriMesh& mesh, std::size_t n, std::uint64_t seed);

/// Divergence-theorem volume and centroid. Throws "open surface" unless the
/// mesh is watertight.
MassProperties mass_properties(const TriMesh& mesh, double density = 1.0);

/// v' = R (scale v) + t.
TriMesh transform(const TriMesh& mesh, const RigidPose& pose, double scale = 1.0);

/// Area-weighted vertex normals.
std::vector<Vec3> vertex_normals(const TriMesh& mesh);

/// Largest distance from `center` to any vertex.
double bounding_radius(const TriMesh& mesh, const Vec3& center);

/// Generalized winding number; ~1 inside a closed outward mesh, ~0 outside.
double winding_number(const TriMesh& mesh, const Vec3& p);

/// Per-face edge-manifold statistics, useful for diagnostics.
struct EdgeStats {
  std::size_t boundary = 0;
  std::size_t non_manifold = 0;
  std::size_t inconsistent = 0;
};
EdgeStats edge_stats(const TriMesh& mesh);

}  // namespace graspkit
