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

#include <array>
#include <unordered_map>
#include <vector>

#include "graspkit/geometry.hpp"

namespace graspkit {
namespace {

// Corner c sits at offset (c & 1, (c >> 1) & 1, (c >> 2) & 1) inside the cell.
constexpr double kSnap = 1e-2;

constexpr int bit(int c, int axis) { return (c >> axis) & 1; }

struct CubeTopology {
  std::array<std::array<int, 2>, 12> edge_corners{};
  std::array<std::array<int, 8>, 8> edge_of{};
  std::array<std::array<int, 4>, 6> face_ccw{};  // counter-clockwise seen from outside
};

CubeTopology make_topology() {
  CubeTopology t{};
  for (auto& row : t.edge_of) row.fill(-1);
  int e = 0;
  for (int a = 0; a < 8; ++a) {
    for (int axis = 0; axis < 3; ++axis) {
      if (bit(a, axis) != 0) continue;
      const int b = a | (1 << axis);
      t.edge_corners[e] = {a, b};
      t.edge_of[a][b] = t.edge_of[b][a] = e;
      ++e;
    }
  }
  int f = 0;
  for (int axis = 0; axis < 3; ++axis) {
    const int ax_u = (axis + 1) % 3;
    const int ax_v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      // e_u x e_v = e_axis, so (u,v) order (0,0),(1,0),(1,1),(0,1) is CCW about +axis.
      static constexpr std::array<std::array<int, 2>, 4> kPos{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
      static constexpr std::array<std::array<int, 2>, 4> kNeg{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}};
      const auto& order = side == 1 ? kPos : kNeg;
      for (int k = 0; k < 4; ++k) {
        t.face_ccw[f][k] = (side << axis) | (order[k][0] << ax_u) | (order[k][1] << ax_v);
      }
      ++f;
    }
  }
  return t;
}

using CaseTable = std::array<std::vector<std::array<int, 3>>, 256>;

// Builds the triangulation for every inside-corner mask. On each cube face
// the iso-contour runs from an entry crossing to the next exit crossing in
// counter-clockwise order, which keeps the negative region on the right and
// separates diagonally opposite inside corners on ambiguous faces. Chaining
// those face segments yields closed loops whose fan triangulation faces the
// positive side of the field.
CaseTable make_case_table(const CubeTopology& topo) {
  CaseTable table;
  for (int mask = 0; mask < 256; ++mask) {
    std::array<int, 12> next;
    next.fill(-1);
    for (const auto& face : topo.face_ccw) {
      std::array<int, 4> edges{};
      std::array<bool, 4> is_entry{};
      int count = 0;
      for (int k = 0; k < 4; ++k) {
        const int a = face[k];
        const int b = face[(k + 1) % 4];
        const bool in_a = (mask >> a) & 1;
        const bool in_b = (mask >> b) & 1;
        if (in_a == in_b) continue;
        edges[count] = topo.edge_of[a][b];
        is_entry[count] = !in_a && in_b;
        ++count;
      }
      for (int k = 0; k < count; ++k) {
        if (is_entry[k]) next[edges[k]] = edges[(k + 1) % count];
      }
    }
    std::array<bool, 12> used{};
    for (int start = 0; start < 12; ++start) {
      if (next[start] < 0 || used[start]) continue;
      std::vector<int> loop;
      for (int e = start; !used[e]; e = next[e]) {
        used[e] = true;
        loop.push_back(e);
      }
      for (std::size_t k = 1; k + 1 < loop.size(); ++k) {
        table[mask].push_back({loop[0], loop[k], loop[k + 1]});
      }
    }
  }
  return table;
}

const CubeTopology& topology() {
  static const CubeTopology t = make_topology();
  return t;
}

const CaseTable& case_table() {
  static const CaseTable t = make_case_table(topology());
  return t;
}

}  // namespace

TriMesh marching_cubes(const ScalarField& field, double iso) {
  field.validate();
  const CubeTopology& topo = topology();
  const CaseTable& table = case_table();
  const auto [nx, ny, nz] = field.dims;

  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::unordered_map<std::uint64_t, int> cache;

  auto grid_index = [&](int i, int j, int k) -> std::uint64_t { return field.index(i, j, k); };
  auto vertex_for = [&](const std::array<int, 3>& ga, const std::array<int, 3>& gb, int axis) {
    const double va = field.at(ga[0], ga[1], ga[2]);
    const double vb = field.at(gb[0], gb[1], gb[2]);
    const double t = (iso - va) / (vb - va);
    std::uint64_t key;
    Vec3 p;
    // Crossings within kSnap of a grid point are keyed by the point so every
    // cell touching it reuses a single vertex and no sliver faces survive.
    if (t <= kSnap) {
      key = grid_index(ga[0], ga[1], ga[2]) * 4 + 3;
      p = field.point(ga[0], ga[1], ga[2]);
    } else if (t >= 1.0 - kSnap) {
      key = grid_index(gb[0], gb[1], gb[2]) * 4 + 3;
      p = field.point(gb[0], gb[1], gb[2]);
    } else {
      key = grid_index(ga[0], ga[1], ga[2]) * 4 + static_cast<std::uint64_t>(axis);
      const Vec3 pa = field.point(ga[0], ga[1], ga[2]);
      const Vec3 pb = field.point(gb[0], gb[1], gb[2]);
      p = pa + t * (pb - pa);
    }
    auto [it, inserted] = cache.try_emplace(key, static_cast<int>(vertices.size()));
    if (inserted) vertices.push_back(p);
    return it->second;
  };

  for (int k = 0; k + 1 < nz; ++k) {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        int mask = 0;
        for (int c = 0; c < 8; ++c) {
          if (field.at(i + bit(c, 0), j + bit(c, 1), k + bit(c, 2)) < iso) mask |= 1 << c;
        }
        if (mask == 0 || mask == 255) continue;
        std::array<int, 12> local;
        local.fill(-1);
        for (const auto& tri : table[mask]) {
          Face f{};
          for (int v = 0; v < 3; ++v) {
            const int e = tri[v];
            if (local[e] < 0) {
              const auto [ca, cb] = topo.edge_corners[e];
              const std::array<int, 3> ga{i + bit(ca, 0), j + bit(ca, 1), k + bit(ca, 2)};
              const std::array<int, 3> gb{i + bit(cb, 0), j + bit(cb, 1), k + bit(cb, 2)};
              int axis = 0;
              while (bit(ca ^ cb, axis) == 0) ++axis;
              local[e] = vertex_for(ga, gb, axis);
            }
            f[v] = local[e];
          }
          if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
          faces.push_back(f);
        }
      }
    }
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

}  // namespace graspkit
