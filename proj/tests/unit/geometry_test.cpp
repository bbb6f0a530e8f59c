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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "graspkit/bvh.hpp"
#include "graspkit/geometry.hpp"
#include "graspkit/primitives.hpp"
#include "graspkit/rng.hpp"
#include "oracles.hpp"

namespace graspkit {
namespace {

ScalarField sphere_field(double r, double voxel) {
  const int n = static_cast<int>(std::ceil(2.6 * r / voxel)) + 1;
  const Vec3 origin = Vec3::Constant(-1.3 * r);
  return ScalarField::sample([r](const Vec3& p) { return p.norm() - r; }, origin, voxel,
                             {n, n, n});
}

ScalarField cube_field(double side, double voxel) {
  const double h = side / 2;
  const int n = static_cast<int>(std::ceil(1.6 * side / voxel)) + 1;
  const Vec3 origin = Vec3::Constant(-0.8 * side);
  return ScalarField::sample(
      [h](const Vec3& p) {
        const Vec3 q = p.cwiseAbs() - Vec3::Constant(h);
        return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
      },
      origin, voxel, {n, n, n});
}

TEST(MarchingCubes, ConstantFieldGivesEmptyMesh) {
  const ScalarField f = ScalarField::sample([](const Vec3&) { return 1.0; }, Vec3::Zero(), 0.1,
                                            {4, 4, 4});
  EXPECT_EQ(marching_cubes(f).num_faces(), 0u);
}

TEST(MarchingCubes, SphereVerticesWithinOneVoxel) {
  const TriMesh m = marching_cubes(sphere_field(0.1, 0.005));
  ASSERT_GT(m.num_faces(), 1000u);
  double worst = 0.0;
  for (const Vec3& v : m.vertices()) worst = std::max(worst, std::abs(v.norm() - 0.1));
  EXPECT_LE(worst, 0.005);
  EXPECT_TRUE(m.is_watertight());
}

TEST(MarchingCubes, NormalsPointTowardPositiveField) {
  const TriMesh m = marching_cubes(sphere_field(0.05, 0.005));
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    const Vec3 c = (m.corner(f, 0) + m.corner(f, 1) + m.corner(f, 2)) / 3.0;
    EXPECT_GT(m.normals()[f].dot(c.normalized()), 0.0) << "face " << f;
  }
}

TEST(MarchingCubes, CubeVolumeWithinFivePercent) {
  const TriMesh m = marching_cubes(cube_field(0.1, 0.0025));
  ASSERT_TRUE(m.is_watertight());
  EXPECT_NEAR(mass_properties(m).volume, 1e-3, 0.05e-3);
}

TEST(MarchingCubes, OffsetIsoLevelsNest) {
  const ScalarField f = sphere_field(0.05, 0.004);
  const double inner = mass_properties(marching_cubes(f, -0.01)).volume;
  const double outer = mass_properties(marching_cubes(f, 0.01)).volume;
  EXPECT_LT(inner, outer);
  EXPECT_NEAR(inner, 4.0 / 3.0 * kPi * std::pow(0.04, 3), 0.05 * inner);
}

TEST(SurfaceSample, SquarePairCountsWithinThreeSigma) {
  // Unit square split unevenly: areas 0.5 each only when the diagonal is used,
  // so use a quad split at x = 0.3 into two triangles of area 0.15 and 0.85.
  const TriMesh m({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0.3, 0, 0}},
                  {Face{0, 4, 3}, Face{4, 1, 2}, Face{4, 2, 3}});
  const std::size_t n = 10000;
  const auto samples = surface_sample(m, n, 11);
  ASSERT_EQ(samples.size(), n);
  std::vector<double> counts(m.num_faces(), 0.0);
  for (const auto& s : samples) counts[s.face] += 1.0;
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    const double p = m.areas()[f] / m.total_area();
    const double sd = std::sqrt(n * p * (1 - p));
    EXPECT_NEAR(counts[f], n * p, 3 * sd) << "face " << f;
  }
}

TEST(SurfaceSample, ChiSquareOnCylinder) {
  const TriMesh m = make_cylinder(0.03, 0.1, 12, 3);
  const std::size_t n = 100000;
  std::vector<double> counts(m.num_faces(), 0.0);
  for (const auto& s : surface_sample(m, n, 5)) counts[s.face] += 1.0;
  double chi2 = 0.0;
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    const double e = n * m.areas()[f] / m.total_area();
    chi2 += (counts[f] - e) * (counts[f] - e) / e;
  }
  // Wilson-Hilferty upper 1% point.
  const double k = static_cast<double>(m.num_faces() - 1);
  const double crit = k * std::pow(1 - 2 / (9 * k) + 2.326 * std::sqrt(2 / (9 * k)), 3);
  EXPECT_LT(chi2, crit);
}

TEST(SurfaceSample, SingleTriangle) {
  const TriMesh m({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {Face{0, 1, 2}});
  const auto s = surface_sample(m, 1, 3);
  ASSERT_EQ(s.size(), 1u);
  const Vec3& p = s[0].point;
  EXPECT_GE(p.x(), 0.0);
  EXPECT_GE(p.y(), 0.0);
  EXPECT_LE(p.x() + p.y(), 1.0);
  EXPECT_DOUBLE_EQ(p.z(), 0.0);
  EXPECT_TRUE(s[0].normal.isApprox(Vec3::UnitZ()));
}

TEST(SurfaceSample, SameSeedSameSamples) {
  const TriMesh m = make_icosphere(0.05, 2);
  const auto a = surface_sample(m, 500, 99);
  const auto b = surface_sample(m, 500, 99);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].point, b[i].point);
    EXPECT_EQ(a[i].face, b[i].face);
  }
}

TEST(SurfaceSample, EmptyMeshThrows) {
  try {
    surface_sample(TriMesh{}, 3, 1);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "empty geometry");
  }
}

TEST(RayCast, UnitCubeFromOutside) {
  const TriMesh cube = make_box(Vec3::Ones());
  const auto hit = ray_cast(cube, Vec3(-2, 0, 0), Vec3::UnitX());
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->distance, 1.5, 1e-12);
  EXPECT_NEAR(hit->point.x(), -0.5, 1e-12);
  EXPECT_TRUE(hit->normal.isApprox(-Vec3::UnitX()));
}

TEST(RayCast, MissIsEmpty) {
  const TriMesh cube = make_box(Vec3::Ones());
  EXPECT_FALSE(ray_cast(cube, Vec3(-2, 3, 0), Vec3::UnitX()));
  EXPECT_FALSE(ray_cast(cube, Vec3(-2, 0, 0), -Vec3::UnitX()));
}

TEST(RayCast, MatchesExhaustiveLoop) {
  auto mesh = std::make_shared<const TriMesh>(make_capsule(0.04, 0.06, 16, 4));
  const MeshBvh bvh(mesh);
  Rng rng(2024);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 o = rng.unit_vector() * rng.uniform(0.0, 0.15);
    const Vec3 target = rng.unit_vector() * rng.uniform(0.0, 0.06);
    const Vec3 d = (target - o).normalized();
    const auto fast = bvh.ray_cast(o, d);
    const auto slow = oracle::ray_cast(*mesh, o, d);
    ASSERT_EQ(fast.has_value(), slow.has_value()) << "ray " << i;
    if (!fast) continue;
    ++hits;
    EXPECT_NEAR(fast->distance, slow->distance, 1e-12) << "ray " << i;
  }
  EXPECT_GT(hits, 500);
}

TEST(MassProperties, UnitCube) {
  const MassProperties mp = mass_properties(make_box(Vec3::Ones()));
  EXPECT_NEAR(mp.volume, 1.0, 1e-9);
  EXPECT_LT(mp.center_of_mass.norm(), 1e-9);
}

TEST(MassProperties, TranslatedCube) {
  const TriMesh m = transform(make_box(Vec3::Ones()), RigidPose(Quat::Identity(), {0.2, 0, 0}));
  const MassProperties mp = mass_properties(m);
  EXPECT_NEAR(mp.volume, 1.0, 1e-9);
  EXPECT_LT((mp.center_of_mass - Vec3(0.2, 0, 0)).norm(), 1e-9);
}

TEST(MassProperties, IcosphereNearAnalytic) {
  const double v = mass_properties(make_icosphere(0.1, 3)).volume;
  const double exact = 4.0 / 3.0 * kPi * 1e-3;
  EXPECT_NEAR(v, exact, 0.02 * exact);
}

TEST(MassProperties, OpenSurfaceThrows) {
  const TriMesh m({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {Face{0, 1, 2}});
  try {
    mass_properties(m);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "open surface");
  }
}

TEST(MassProperties, VertexPermutationAndRigidMotion) {
  const TriMesh m = make_cylinder(0.03, 0.08, 20, 2);
  std::vector<int> perm(m.num_vertices());
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::vector<Vec3> verts(m.num_vertices());
  for (std::size_t i = 0; i < perm.size(); ++i) verts[perm[i]] = m.vertices()[i];
  std::vector<Face> faces;
  for (const Face& f : m.faces()) faces.push_back({perm[f[0]], perm[f[1]], perm[f[2]]});
  const MassProperties a = mass_properties(m);
  const MassProperties b = mass_properties(TriMesh(verts, faces));
  EXPECT_NEAR(a.volume, b.volume, 1e-15);
  EXPECT_LT((a.center_of_mass - b.center_of_mass).norm(), 1e-12);

  const RigidPose p(Quat(Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized())), {0.1, -0.2, 0.3});
  const MassProperties c = mass_properties(transform(m, p));
  EXPECT_NEAR(a.volume, c.volume, 1e-12);
  EXPECT_LT((p.apply(a.center_of_mass) - c.center_of_mass).norm(), 1e-12);
}

TEST(Transform, IdentityKeepsMesh) {
  const TriMesh m = make_icosphere(0.05, 1);
  const TriMesh t = transform(m, RigidPose::identity());
  EXPECT_EQ(t.vertices(), m.vertices());
  EXPECT_EQ(t.faces(), m.faces());
}

TEST(Transform, ScaleTwoGivesVolumeEight) {
  const TriMesh t = transform(make_box(Vec3::Ones()), RigidPose::identity(), 2.0);
  EXPECT_NEAR(mass_properties(t).volume, 8.0, 1e-9);
  EXPECT_NEAR(t.total_area(), 24.0, 1e-9);
}

TEST(Transform, NonPositiveScaleThrows) {
  EXPECT_THROW(transform(make_box(Vec3::Ones()), RigidPose::identity(), 0.0), Error);
  EXPECT_THROW(transform(make_box(Vec3::Ones()), RigidPose::identity(), -1.0), Error);
}

TEST(Transform, CompositionMatchesSequentialApplication) {
  Rng rng(8);
  const TriMesh m = make_box({0.1, 0.2, 0.3});
  for (int trial = 0; trial < 50; ++trial) {
    const RigidPose p1(Quat(Eigen::AngleAxisd(rng.uniform(0, kPi), rng.unit_vector())),
                       rng.unit_vector());
    const RigidPose p2(Quat(Eigen::AngleAxisd(rng.uniform(0, kPi), rng.unit_vector())),
                       rng.unit_vector());
    const TriMesh once = transform(m, p2 * p1);
    const TriMesh twice = transform(transform(m, p1), p2);
    for (std::size_t i = 0; i < m.num_vertices(); ++i) {
      EXPECT_LT((once.vertices()[i] - twice.vertices()[i]).norm(), 1e-12);
    }
    for (std::size_t f = 0; f < m.num_faces(); ++f) {
      EXPECT_LT((once.normals()[f] - twice.normals()[f]).norm(), 1e-12);
    }
  }
}

TEST(TriMesh, DegenerateFacesDropped) {
  const TriMesh m({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}},
                  {Face{0, 1, 2}, Face{0, 1, 3}});
  EXPECT_EQ(m.num_faces(), 1u);
  EXPECT_EQ(m.dropped_faces(), 1u);
}

TEST(TriMesh, FaceIndexOutOfRangeThrows) {
  EXPECT_THROW(TriMesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {Face{0, 1, 3}}), Error);
}

TEST(TriMesh, PrimitivesAreWatertight) {
  for (const TriMesh& m : {make_box({0.1, 0.2, 0.05}, 3), make_icosphere(0.04, 3),
                           make_cylinder(0.02, 0.1), make_capsule(0.02, 0.05)}) {
    EXPECT_TRUE(m.is_watertight());
    EXPECT_GT(mass_properties(m).volume, 0.0);
  }
}

TEST(ScalarField, ValidateRejectsBadGrids) {
  ScalarField f;
  f.voxel_size = 0.1;
  f.dims = {2, 2, 1};
  f.values.assign(4, 0.0);
  EXPECT_THROW(f.validate(), Error);
  f.dims = {2, 2, 2};
  EXPECT_THROW(f.validate(), Error);
  f.values.assign(8, 0.0);
  EXPECT_NO_THROW(f.validate());
  f.voxel_size = 0.0;
  EXPECT_THROW(f.validate(), Error);
}

}  // namespace
}  // namespace graspkit
