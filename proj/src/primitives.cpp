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

#include "graspkit/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

namespace graspkit {

TriMesh make_box(const Vec3& size, int subdivisions) {
  if ((size.array() <= 0.0).any()) throw Error("box dimensions must be positive");
  const int n = std::max(1, subdivisions);
  std::map<std::array<int, 3>, int> index;
  std::vector<Vec3> verts;
  auto vid = [&](int i, int j, int k) {
    auto [it, inserted] = index.try_emplace({i, j, k}, static_cast<int>(verts.size()));
    if (inserted) {
      verts.emplace_back(size.x() * (static_cast<double>(i) / n - 0.5),
                         size.y() * (static_cast<double>(j) / n - 0.5),
                         size.z() * (static_cast<double>(k) / n - 0.5));
    }
    return it->second;
  };
  std::vector<Face> faces;
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          auto corner = [&](int da, int db) {
            std::array<int, 3> c{};
            c[axis] = side * n;
            c[u] = a + da;
            c[v] = b + db;
            return vid(c[0], c[1], c[2]);
          };
          const int p00 = corner(0, 0), p10 = corner(1, 0), p11 = corner(1, 1), p01 = corner(0, 1);
          // e_u x e_v = e_axis: (u, v) order is counter-clockwise about +axis.
          if (side == 1) {
            faces.push_back({p00, p10, p11});
            faces.push_back({p00, p11, p01});
          } else {
            faces.push_back({p00, p11, p10});
            faces.push_back({p00, p01, p11});
          }
        }
      }
    }
  }
  return TriMesh(std::move(verts), std::move(faces));
}

TriMesh make_icosphere(double radius, int subdivisions) {
  if (!(radius > 0.0)) throw Error("sphere radius must be positive");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : v) p.normalize();
  std::vector<Face> f{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      auto [it, inserted] = mid.try_emplace(key, static_cast<int>(v.size()));
      if (inserted) v.push_back((v[a] + v[b]).normalized());
      return it->second;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const Face& tri : f) {
      const int a = midpoint(tri[0], tri[1]);
      const int b = midpoint(tri[1], tri[2]);
      const int c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  for (Vec3& p : v) p *= radius;
  return TriMesh(std::move(v), std::move(f));
}

namespace {

// Surface of revolution about z from a profile of (radius, z) rings running
// bottom to top, closed by pole vertices.
TriMesh revolve(const std::vector<std::pair<double, double>>& rings, double z_bottom, double z_top,
                int segments) {
  std::vector<Vec3> v;
  std::vector<Face> f;
  const int bottom = 0;
  v.emplace_back(0.0, 0.0, z_bottom);
  for (const auto& [r, z] : rings) {
    for (int s = 0; s < segments; ++s) {
      const double a = 2.0 * kPi * s / segments;
      v.emplace_back(r * std::cos(a), r * std::sin(a), z);
    }
  }
  const int top = static_cast<int>(v.size());
  v.emplace_back(0.0, 0.0, z_top);
  auto ring = [&](int i, int s) { return 1 + i * segments + (s % segments); };
  const int nr = static_cast<int>(rings.size());
  for (int s = 0; s < segments; ++s) {
    f.push_back({bottom, ring(0, s + 1), ring(0, s)});
    f.push_back({top, ring(nr - 1, s), ring(nr - 1, s + 1)});
  }
  for (int i = 0; i + 1 < nr; ++i) {
    for (int s = 0; s < segments; ++s) {
      f.push_back({ring(i, s), ring(i, s + 1), ring(i + 1, s + 1)});
      f.push_back({ring(i, s), ring(i + 1, s + 1), ring(i + 1, s)});
    }
  }
  return TriMesh(std::move(v), std::move(f));
}

}  // namespace

TriMesh make_cylinder(double radius, double height, int segments, int stacks) {
  if (!(radius > 0.0) || !(height > 0.0)) throw Error("cylinder dimensions must be positive");
  std::vector<std::pair<double, double>> rings;
  // Cap rings at half radius keep the cap triangles well shaped.
  rings.emplace_back(0.5 * radius, -0.5 * height);
  for (int i = 0; i <= stacks; ++i) {
    rings.emplace_back(radius, -0.5 * height + height * i / stacks);
  }
  rings.emplace_back(0.5 * radius, 0.5 * height);
  return revolve(rings, -0.5 * height, 0.5 * height, segments);
}

TriMesh make_capsule(double radius, double length, int segments, int rings) {
  if (!(radius > 0.0) || !(length >= 0.0)) throw Error("capsule dimensions must be positive");
  std::vector<std::pair<double, double>> profile;
  const double half = 0.5 * length;
  for (int i = 1; i <= rings; ++i) {
    const double a = -0.5 * kPi + 0.5 * kPi * i / rings;
    profile.emplace_back(radius * std::cos(a), -half + radius * std::sin(a));
  }
  for (int i = length > 0.0 ? 0 : 1; i < rings; ++i) {
    const double a = 0.5 * kPi * i / rings;
    profile.emplace_back(radius * std::cos(a), half + radius * std::sin(a));
  }
  return revolve(profile, -half - radius, half + radius, segments);
}

bool parse_primitive(const std::string& spec, TriMesh& out) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return false;
  const std::string kind = spec.substr(0, colon);
  if (kind != "box" && kind != "sphere" && kind != "cylinder" && kind != "capsule") return false;
  std::vector<double> args;
  std::stringstream ss(spec.substr(colon + 1));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      args.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw Error("");
    } catch (const std::exception&) {
      throw Error("malformed primitive spec '" + spec + "'");
    }
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n) throw Error("primitive '" + spec + "' expects " + std::to_string(n) + " values");
  };
  if (kind == "box") {
    need(3);
    // Roughly 1 cm facets so perturbation and sampling see a dense surface.
    const int subdiv = std::clamp(static_cast<int>(std::ceil(std::max({args[0], args[1], args[2]}) / 0.01)), 2, 12);
    out = make_box(Vec3(args[0], args[1], args[2]), subdiv);
  } else if (kind == "sphere") {
    need(1);
    out = make_icosphere(args[0], 3);
  } else if (kind == "cylinder") {
    need(2);
    out = make_cylinder(args[0], args[1], 32, std::clamp(static_cast<int>(std::ceil(args[1] / 0.01)), 2, 24));
  } else {
    need(2);
    out = make_capsule(args[0], args[1], 24, 6);
  }
  return true;
}

}  // namespace graspkit
