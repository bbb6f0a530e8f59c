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
#include <memory>

#include "graspkit/antipodal.hpp"
#include "graspkit/primitives.hpp"
#include "graspkit/rng.hpp"
#include "graspkit/scene.hpp"
#include "oracles.hpp"

namespace graspkit {
namespace {

std::shared_ptr<const TriMesh> shared(TriMesh m) { return std::make_shared<const TriMesh>(std::move(m)); }

Instance placed(int id, TriMesh mesh, const Vec3& at, double yaw = 0.0) {
  Instance inst;
  inst.object_id = id;
  inst.mesh = shared(std::move(mesh));
  inst.pose = RigidPose(Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ())), at);
  return inst;
}

// Two convex meshes interpenetrate when a vertex of one lies strictly inside
// the other or an edge of one passes through the interior of the other.
bool strictly_inside(const Vec3& p, const TriMesh& m, double tol = 1e-9) {
  for (std::size_t f = 0; f < m.num_faces(); ++f) {
    if (m.normals()[f].dot(p - m.corner(f, 0)) > -tol) return false;
  }
  return true;
}

bool edge_enters(const TriMesh& e, const TriMesh& m) {
  for (std::size_t f = 0; f < e.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = e.corner(f, k);
      const Vec3 d = e.corner(f, (k + 1) % 3) - p;
      for (std::size_t g = 0; g < m.num_faces(); ++g) {
        const auto t = oracle::ray_triangle(p, d, m.corner(g, 0), m.corner(g, 1), m.corner(g, 2));
        if (!t || *t <= 0 || *t >= 1) continue;
        const Vec3 x = p + *t * d;
        const Vec3 step = 1e-6 * d.normalized();
        if (strictly_inside(x + step, m) || strictly_inside(x - step, m)) return true;
      }
    }
  }
  return false;
}

bool convex_overlap(const TriMesh& a, const TriMesh& b) {
  for (const Vec3& v : a.vertices()) {
    if (strictly_inside(v, b)) return true;
  }
  for (const Vec3& v : b.vertices()) {
    if (strictly_inside(v, a)) return true;
  }
  return edge_enters(a, b) || edge_enters(b, a);
}

TEST(Settle, LoneCubeRestsFlat) {
  const std::vector<CatalogEntry> cat{{shared(make_box(Vec3::Ones())), "box"}};
  const Scene s = settle_scene(cat, 1, 3);
  const Aabb b = s.world(0).bounds();
  EXPECT_GE(b.lo.z(), -1e-6);
  EXPECT_LE(b.lo.z(), 1e-3);
  // Resting on a face: four vertices touch the table.
  int touching = 0;
  for (const Vec3& v : s.world(0).mesh().vertices()) touching += v.z() < 1e-6;
  EXPECT_EQ(touching, 4);
}

TEST(Settle, TenBoxesDoNotInterpenetrate) {
  std::vector<CatalogEntry> cat;
  for (int k = 0; k < 10; ++k) {
    cat.push_back({shared(make_box({0.03 + 0.003 * k, 0.04, 0.05 - 0.002 * k})), "box"});
  }
  const Scene s = settle_scene(cat, 10, 21);
  ASSERT_EQ(s.size(), 10u);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_GE(s.world(i).bounds().lo.z(), -1e-6);
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      EXPECT_FALSE(convex_overlap(s.world(i).mesh(), s.world(j).mesh())) << i << " vs " << j;
      EXPECT_FALSE(instances_overlap(s.world(i), s.world(j)));
    }
  }
}

TEST(Settle, SameSeedSameScene) {
  const std::vector<CatalogEntry> cat{{shared(make_cylinder(0.03, 0.1)), "c"},
                                      {shared(make_box({0.04, 0.06, 0.03})), "b"}};
  const Scene a = settle_scene(cat, 5, 8);
  const Scene b = settle_scene(cat, 5, 8);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.instances()[i].pose.translation, b.instances()[i].pose.translation);
    EXPECT_EQ(a.instances()[i].pose.rotation.coeffs(), b.instances()[i].pose.rotation.coeffs());
  }
}

TEST(Settle, TooCrowdedOverflows) {
  const std::vector<CatalogEntry> cat{{shared(make_box({0.2, 0.2, 0.05})), "b"}};
  SettleOptions opts;
  opts.max_tries = 5;
  opts.spiral_steps = 20;
  opts.placement_radius = 0.01;
  try {
    settle_scene(cat, 30, 1, opts);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "scene overflow");
  }
}

TEST(StableFaces, CubeHasSixUprightFaces) {
  const TriMesh cube = make_box(Vec3::Ones());
  EXPECT_EQ(stable_faces(cube, Vec3::Zero()).size(), 6u);
}

class CollisionScene : public ::testing::Test {
 protected:
  Scene scene{{placed(1, make_box({0.04, 0.04, 0.06}), {0, 0, 0.03}),
               placed(2, make_cylinder(0.02, 0.08), {0.07, 0, 0.04})},
              Camera::default_view()};
  GripperSpec gripper;

  Grasp top_down(const Vec3& centre, double width, const Vec3& closing = Vec3::UnitX()) const {
    Mat3 r;
    const Vec3 z = -Vec3::UnitZ();
    r << closing, z.cross(closing), z;
    Grasp g;
    g.pose = RigidPose::from_matrix(r, centre);
    g.width = width;
    g.object_id = 1;
    return g;
  }
};

TEST_F(CollisionScene, TopDownFromFreeSpaceIsClear) {
  const Grasp g = top_down({0, 0, 0.05}, 0.045, Vec3::UnitY());
  EXPECT_FALSE(check_grasp_collision(scene, g, gripper, 1));
}

TEST_F(CollisionScene, PalmBelowTableHitsTable) {
  // Approaching upward from below the table, away from every object.
  Mat3 r;
  r << Vec3::UnitY(), -Vec3::UnitX(), Vec3::UnitZ();
  Grasp g;
  g.pose = RigidPose::from_matrix(r, {0.3, 0.3, 0.01});
  g.width = 0.03;
  g.object_id = 1;
  ASSERT_LT(jaw_boxes(gripper, g.pose, g.width).palm.center.z(), 0.0);
  EXPECT_EQ(check_grasp_collision(scene, g, gripper, 1), kTableEntity);
}

TEST_F(CollisionScene, NeighbourBetweenFingersCollides) {
  // Closing along x over the box reaches the cylinder with the open jaws.
  const Grasp g = top_down({0.03, 0, 0.075}, 0.075);
  const auto hit = check_grasp_collision(scene, g, gripper, 1);
  ASSERT_TRUE(hit);
  EXPECT_EQ(*hit, 2);
}

TEST(Collision, GripperBuriedInSolidCollides) {
  // Every jaw box sits strictly inside a large block, so no face crosses one.
  const Scene s({placed(1, make_box({0.3, 0.3, 0.2}), {0, 0, 0.1})}, Camera::default_view());
  GripperSpec gripper;
  Mat3 r;
  r << Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitZ();
  Grasp g;
  g.pose = RigidPose::from_matrix(r, {0, 0, 0.12});
  g.width = 0.03;
  g.object_id = 1;
  const JawBoxes jaws = jaw_boxes(gripper, g.pose, g.width + gripper.open_margin);
  for (const OrientedBox* b : {&jaws.left, &jaws.right, &jaws.palm}) {
    ASSERT_FALSE(s.world(0).overlaps_box(*b));
  }
  EXPECT_EQ(check_grasp_collision(s, g, gripper, 1), 1);
  EXPECT_EQ(oracle::grasp_collision(s, g, gripper, 1), 1);
}

TEST_F(CollisionScene, MatchesExhaustiveLoop) {
  Rng rng(55);
  int collisions = 0;
  for (int i = 0; i < 500; ++i) {
    Grasp g;
    const Vec3 c(rng.uniform(-0.06, 0.13), rng.uniform(-0.06, 0.06), rng.uniform(0.0, 0.12));
    g.pose = RigidPose(Quat(Eigen::AngleAxisd(rng.uniform(0, kPi), rng.unit_vector())), c);
    g.width = rng.uniform(0.01, 0.075);
    const int target = 1 + static_cast<int>(rng.index(2));
    const auto fast = check_grasp_collision(scene, g, gripper, target);
    const auto slow = oracle::grasp_collision(scene, g, gripper, target);
    ASSERT_EQ(fast, slow) << "grasp " << i;
    collisions += fast.has_value();
  }
  EXPECT_GT(collisions, 100);
  EXPECT_LT(collisions, 490);
}

TEST_F(CollisionScene, InvariantUnderTablePreservingMotion) {
  const RigidPose m(Quat(Eigen::AngleAxisd(0.8, Vec3::UnitZ())), {0.3, -0.1, 0.0});
  std::vector<Instance> moved = scene.instances();
  for (Instance& inst : moved) inst.pose = m * inst.pose;
  const Scene other(moved, scene.camera());
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    Grasp g;
    g.pose = RigidPose(Quat(Eigen::AngleAxisd(rng.uniform(0, kPi), rng.unit_vector())),
                       Vec3(rng.uniform(-0.05, 0.1), rng.uniform(-0.05, 0.05), rng.uniform(0.0, 0.1)));
    g.width = rng.uniform(0.02, 0.07);
    Grasp h = g;
    h.pose = m * g.pose;
    EXPECT_EQ(check_grasp_collision(scene, g, gripper, 1), check_grasp_collision(other, h, gripper, 1));
  }
}

TEST_F(CollisionScene, FilterReasons) {
  GraspSet set;
  Mat3 side;
  side << Vec3::UnitY(), Vec3::UnitZ(), Vec3::UnitX();  // approach parallel to table
  Grasp horizontal;
  horizontal.pose = RigidPose::from_matrix(side, {0, 0, 0.05});
  horizontal.width = 0.045;
  horizontal.object_id = 1;
  set.grasps.push_back(horizontal);
  set.grasps.push_back(top_down({0.3, 0.3, 0.002}, 0.03));
  set.grasps.push_back(top_down({0, 0, 0.05}, 0.045, Vec3::UnitY()));

  FilterPolicy policy;
  policy.min_approach_angle_deg = 30;
  policy.min_table_clearance = 0.01;
  const FilterResult r = filter_grasps(scene, set, policy, gripper);
  ASSERT_EQ(r.rejected.size(), 2u);
  EXPECT_EQ(r.rejected[0].second, RejectReason::ApproachAngle);
  EXPECT_EQ(r.rejected[1].second, RejectReason::TableClearance);
  ASSERT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept.grasps[0].center(), set.grasps[2].center());
}

TEST_F(CollisionScene, EmptyPolicyIsIdentityAndFilteringIdempotent) {
  Rng rng(4);
  GraspSet set;
  for (int i = 0; i < 100; ++i) {
    Grasp g;
    g.pose = RigidPose(Quat(Eigen::AngleAxisd(rng.uniform(0, kPi), rng.unit_vector())),
                       Vec3(rng.uniform(-0.05, 0.1), rng.uniform(-0.05, 0.05), rng.uniform(0.0, 0.1)));
    g.width = rng.uniform(0.02, 0.07);
    g.object_id = 1 + static_cast<int>(rng.index(2));
    set.grasps.push_back(g);
  }
  FilterPolicy none;
  none.collision = false;
  EXPECT_EQ(filter_grasps(scene, set, none, gripper).kept.size(), set.size());

  FilterPolicy policy;
  policy.min_approach_angle_deg = 20;
  policy.min_table_clearance = 0.005;
  const FilterResult once = filter_grasps(scene, set, policy, gripper);
  EXPECT_EQ(once.kept.size() + once.rejected.size(), set.size());
  const FilterResult twice = filter_grasps(scene, once.kept, policy, gripper);
  EXPECT_TRUE(twice.rejected.empty());
  ASSERT_EQ(twice.kept.size(), once.kept.size());
  // Order preserved: kept grasps appear in input order.
  std::size_t cursor = 0;
  for (const Grasp& k : once.kept.grasps) {
    while (cursor < set.size() && set.grasps[cursor].center() != k.center()) ++cursor;
    ASSERT_LT(cursor, set.size());
  }
}

TEST(FilterPolicy, ValidateRanges) {
  FilterPolicy p;
  p.min_approach_angle_deg = 91;
  EXPECT_THROW(p.validate(), Error);
  p.min_approach_angle_deg = 10;
  p.min_table_clearance = -0.1;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Render, SphereOnAxisShowsFrontHemisphere) {
  const Vec3 centre(0, 0, 0.04);
  const Vec3 eye(0.0, -0.5, 0.5);
  const Scene s({placed(0, make_icosphere(0.04, 3), centre)}, Camera::look_at(eye, centre));
  const auto cloud = render_partial_cloud(s);
  ASSERT_GT(cloud.size(), 1000u);
  const Vec3 view = (centre - eye).normalized();
  for (const CloudPoint& p : cloud) {
    EXPECT_LT((p.point - centre).dot(view), 0.0);
    EXPECT_EQ(p.object_id, 0);
  }
}

TEST(Render, ReprojectionRecoversPixels) {
  const Scene s({placed(3, make_box({0.05, 0.05, 0.08}), {0, 0, 0.04}, 0.4)},
                Camera::default_view());
  const DepthObservation obs = render_depth(s);
  ASSERT_EQ(obs.cloud.size(), obs.pixel.size());
  ASSERT_GT(obs.cloud.size(), 500u);
  EXPECT_LE(obs.cloud.size(), static_cast<std::size_t>(obs.width * obs.height));
  const TriMesh& mesh = s.world(0).mesh();
  for (std::size_t k = 0; k < obs.cloud.size(); ++k) {
    const auto uvz = s.camera().project(obs.cloud[k].point);
    EXPECT_NEAR(uvz.x(), obs.pixel[k] % obs.width, 0.5);
    EXPECT_NEAR(uvz.y(), obs.pixel[k] / obs.width, 0.5);
    if (k % 25 == 0) {
      double best = 1e9;
      for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
        const Vec3 q = closest_point_on_triangle(obs.cloud[k].point, mesh.corner(f, 0),
                                                 mesh.corner(f, 1), mesh.corner(f, 2));
        best = std::min(best, (q - obs.cloud[k].point).norm());
      }
      EXPECT_LT(best, 1e-6);
    }
  }
}

TEST(Render, OccludedObjectHasNoPoints) {
  // Camera at -y looks along +y; the small cube hides behind the large box.
  const Camera cam = Camera::look_at({0, -0.6, 0.03}, {0, 0, 0.03});
  const Scene s({placed(1, make_box({0.2, 0.02, 0.2}), {0, 0, 0.1}),
                 placed(2, make_box({0.03, 0.03, 0.03}), {0, 0.08, 0.015})},
                cam);
  int hidden = 0;
  int front = 0;
  for (const CloudPoint& p : render_partial_cloud(s)) {
    hidden += p.object_id == 2;
    front += p.object_id == 1;
  }
  EXPECT_EQ(hidden, 0);
  EXPECT_GT(front, 0);
}

TEST(Render, FacingAwayGivesEmptyCloud) {
  const Scene s({placed(0, make_icosphere(0.04, 2), {0, 0, 0.04})},
                Camera::look_at({0, -0.5, 0.3}, {0, -1.5, 0.3}));
  EXPECT_TRUE(render_partial_cloud(s).empty());
}

TEST(Render, DepthNoiseIsSeeded) {
  const Scene s({placed(0, make_icosphere(0.04, 2), {0, 0, 0.04})}, Camera::default_view());
  RenderOptions o;
  o.depth_noise = 0.002;
  o.seed = 5;
  const auto a = render_depth(s, o);
  const auto b = render_depth(s, o);
  EXPECT_EQ(a.depth, b.depth);
  o.seed = 6;
  EXPECT_NE(render_depth(s, o).depth, a.depth);
}

TEST(SceneType, RejectsDuplicateIdsAndTablePenetration) {
  EXPECT_THROW(Scene({placed(1, make_icosphere(0.02, 1), {0, 0, 0.02}),
                      placed(1, make_icosphere(0.02, 1), {0.1, 0, 0.02})},
                     Camera::default_view()),
               Error);
  EXPECT_THROW(Scene({placed(1, make_icosphere(0.02, 1), {0, 0, 0.0})}, Camera::default_view()),
               Error);
  EXPECT_NO_THROW(
      Scene({placed(1, make_icosphere(0.02, 1), {0, 0, 0.0})}, Camera::default_view(), 0.5, false));
}

}  // namespace
}  // namespace graspkit
