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

#include "graspkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

namespace graspkit {

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)) {
  const int nv = static_cast<int>(vertices_.size());
  for (const Vec3& v : vertices_) {
    if (!v.allFinite()) throw Error("non-finite vertex coordinate");
  }
  faces_.reserve(faces.size());
  normals_.reserve(faces.size());
  areas_.reserve(faces.size());
  for (const Face& f : faces) {
    for (const int idx : f) {
      if (idx < 0 || idx >= nv) {
        throw Error("face index " + std::to_string(idx) + " out of range (" + std::to_string(nv) +
                    " vertices)");
      }
    }
    const Vec3 cross =
        (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]);
    const double area = 0.5 * cross.norm();
    if (!(area > kMinFaceArea)) {
      ++dropped_;
      continue;
    }
    faces_.push_back(f);
    normals_.push_back(cross / (2.0 * area));
    areas_.push_back(area);
  }
}

double TriMesh::total_area() const {
  double a = 0.0;
  for (const double x : areas_) a += x;
  return a;
}

Aabb TriMesh::bounds() const {
  Aabb b;
  for (const Vec3& v : vertices_) b.extend(v);
  return b;
}

EdgeStats edge_stats(const TriMesh& mesh) {
  // Key: (min, max) vertex pair. Value: (+1 for min->max traversals, count).
  std::map<std::pair<int, int>, std::pair<int, int>> edges;
  for (const Face& f : mesh.faces()) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k];
      const int b = f[(k + 1) % 3];
      auto& e = edges[{std::min(a, b), std::max(a, b)}];
      e.first += a < b ? 1 : -1;
      e.second += 1;
    }
  }
  EdgeStats s;
  for (const auto& [key, e] : edges) {
    if (e.second == 1) {
      ++s.boundary;
    } else if (e.second > 2) {
      ++s.non_manifold;
    } else if (e.first != 0) {
      ++s.inconsistent;
    }
  }
  return s;
}

bool TriMesh::is_watertight() const {
  if (faces_.empty()) return false;
  const EdgeStats s = edge_stats(*this);
  return s.boundary == 0 && s.non_manifold == 0 && s.inconsistent == 0;
}

void ScalarField::validate() const {
  if (!(voxel_size > 0.0)) throw Error("voxel_size must be positive");
  std::size_t count = 1;
  for (const int d : dims) {
    if (d < 2) throw Error("field dims must each be at least 2");
    count *= static_cast<std::size_t>(d);
  }
  if (values.size() != count) {
    throw Error("field value count " + std::to_string(values.size()) + " does not match dims (" +
                std::to_string(count) + ")");
  }
}

ScalarField ScalarField::sample(const std::function<double(const Vec3&)>& fn, const Vec3& origin,
                                double voxel_size, std::array<int, 3> dims) {
  ScalarField f;
  f.origin = origin;
  f.voxel_size = voxel_size;
  f.dims = dims;
  f.values.resize(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i) f.values[f.index(i, j, k)] = fn(f.point(i, j, k));
  f.validate();
  return f;
}

SurfaceSampler::SurfaceSampler(const TriMesh& mesh) : mesh_(&mesh) {
  if (mesh.empty()) throw Error("empty geometry");
  cdf_.resize(mesh.num_faces());
  double acc = 0.0;
  for (std::size_t i = 0; i < mesh.num_faces(); ++i) {
    acc += mesh.areas()[i];
    cdf_[i] = acc;
  }
}

SurfaceSample SurfaceSampler::draw(Rng& rng) const {
  const double target = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  if (it == cdf_.end()) --it;
  const auto face = static_cast<std::size_t>(it - cdf_.begin());
  const double r1 = std::sqrt(rng.uniform());
  const double r2 = rng.uniform();
  const Vec3& a = mesh_->corner(face, 0);
  const Vec3& b = mesh_->corner(face, 1);
  const Vec3& c = mesh_->corner(face, 2);
  SurfaceSample s;
  s.point = (1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c;
  s.normal = mesh_->normals()[face];
  s.face = static_cast<int>(face);
  return s;
}

std::vector<SurfaceSample> surface_sample(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
  const SurfaceSampler sampler(mesh);
  Rng rng(seed);
  std::vector<SurfaceSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sampler.draw(rng));
  return out;
}

MassProperties mass_properties(const TriMesh& mesh, double density) {
  if (!mesh.is_watertight()) throw Error("open surface");
  double six_vol = 0.0;
  Vec3 moment = Vec3::Zero();
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Vec3& a = mesh.corner(f, 0);
    const Vec3& b = mesh.corner(f, 1);
    const Vec3& c = mesh.corner(f, 2);
    const double d = a.dot(b.cross(c));
    six_vol += d;
    moment += d * (a + b + c);
  }
  MassProperties mp;
  mp.volume = six_vol / 6.0;
  mp.mass = density * mp.volume;
  if (six_vol != 0.0) mp.center_of_mass = moment / (4.0 * six_vol);
  return mp;
}

TriMesh transform(const TriMesh& mesh, const RigidPose& pose, double scale) {
  if (!(scale > 0.0)) throw Error("scale must be positive");
  const Mat3 r = pose.matrix();
  std::vector<Vec3> v;
  v.reserve(mesh.num_vertices());
  for (const Vec3& p : mesh.vertices()) v.push_back(r * (scale * p) + pose.translation);
  return TriMesh(std::move(v), mesh.faces());
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
  std::vector<Vec3> n(mesh.num_vertices(), Vec3::Zero());
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Vec3 w = mesh.areas()[f] * mesh.normals()[f];
    for (const int idx : mesh.faces()[f]) n[idx] += w;
  }
  for (Vec3& v : n) {
    const double len = v.norm();
    if (len > 0.0) v /= len;
  }
  return n;
}

double bounding_radius(const TriMesh& mesh, const Vec3& center) {
  double r = 0.0;
  for (const Vec3& v : mesh.vertices()) r = std::max(r, (v - center).norm());
  return r;
}

double winding_number(const TriMesh& mesh, const Vec3& p) {
  // Van Oosterom-Strackee solid angle per triangle.
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Vec3 a = mesh.corner(f, 0) - p;
    const Vec3 b = mesh.corner(f, 1) - p;
    const Vec3 c = mesh.corner(f, 2) - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * kPi);
}

}  // namespace graspkit
