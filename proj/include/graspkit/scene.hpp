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

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graspkit/antipodal.hpp"
#include "graspkit/bvh.hpp"
#include "graspkit/geometry.hpp"

namespace graspkit {

/// Pinhole camera, OpenCV convention: x right, y down, z forward. `pose`
/// maps camera coordinates to world coordinates.
struct Camera {
  double fx = 600.0;
  double fy = 600.0;
  double cx = 319.5;
  double cy = 239.5;
  int width = 640;
  int height = 480;
  RigidPose pose;

  /// Camera at `eye` looking at `target` with world +z as image up.
  static Camera look_at(const Vec3& eye, const Vec3& target);
  /// 45 degree elevation at 0.7 m from the table centre, viewing from -y.
  static Camera default_view();

  Vec3 position() const { return pose.translation; }
  /// Unit world-frame ray through pixel coordinates (u, v).
  Vec3 ray_direction(double u, double v) const;
  /// Pixel coordinates and depth of a world point.
  Eigen::Vector3d project(const Vec3& world) const;

  void validate() const;
};

/// Entity id reported for the table plane z = 0.
inline constexpr int kTableEntity = -1;

struct Instance {
  int object_id = 0;
  std::shared_ptr<const TriMesh> mesh;  // canonical frame
  RigidPose pose;
  double scale = 1.0;
  /// Mesh path or primitive descriptor; informational.
  std::string source;
};

/// Posed instances on the table plane z = 0, seen by one camera. Immutable;
/// world-frame meshes and their hierarchies are built on construction.
class Scene {
 public:
  /// `enforce_table` rejects instances reaching more than 1 mm below the
  /// table; reconstructions are built with it off.
  Scene(std::vector<Instance> instances, Camera camera, double mu_table = 0.5,
        bool enforce_table = true);

  const std::vector<Instance>& instances() const { return instances_; }
  const Camera& camera() const { return camera_; }
  double mu_table() const { return mu_table_; }

  std::size_t size() const { return instances_.size(); }
  /// Position of `object_id` in instances(), if present.
  std::optional<std::size_t> find(int object_id) const;
  /// Throws "unknown object id N".
  std::size_t index_of(int object_id) const;

  const MeshBvh& world(std::size_t index) const { return *world_[index]; }
  const MassProperties& mass(std::size_t index) const { return mass_[index]; }

 private:
  std::vector<Instance> instances_;
  Camera camera_;
  double mu_table_;
  std::vector<std::shared_ptr<const MeshBvh>> world_;
  std::vector<MassProperties> mass_;
};

/// A convex-hull face the object can rest on.
struct RestingFace {
  Vec3 normal;  // outward, canonical frame
  double area = 0.0;
};

/// Hull faces whose support polygon contains the projection of `com`.
std::vector<RestingFace> stable_faces(const TriMesh& mesh, const Vec3& com);

struct SettleOptions {
  double placement_radius = 0.12;
  int max_tries = 100;
  /// Spiral positions tried after random placement fails.
  int spiral_steps = 1000;
  Camera camera = Camera::default_view();
  double mu_table = 0.5;
};

struct CatalogEntry {
  std::shared_ptr<const TriMesh> mesh;
  std::string source;
};

/// Places `count` objects (entry k mod size) one after another on stable
/// faces with random yaw, re-sampling overlapping placements and falling
/// back to a deterministic spiral. Throws "scene overflow".
Scene settle_scene(std::span<const CatalogEntry> meshes, int count, std::uint64_t seed,
                   const SettleOptions& opts = {});

/// True when the two instances' surfaces cross or one contains the other.
bool instances_overlap(const MeshBvh& a, const MeshBvh& b);

/// First entity (table, then instances in order) hit by the gripper posed
/// at `grasp` with the jaws opened to width + open_margin. The target only
/// collides with the fingers and palm, other objects also with the space
/// between the fingers.
std::optional<int> check_grasp_collision(const Scene& scene, const Grasp& grasp,
                                         const GripperSpec& gripper, int target_id);

/// Collision test against an observed cloud instead of meshes: the table
/// plane, or any cloud point inside a finger or the palm.
bool check_cloud_collision(std::span<const CloudPoint> cloud, const Grasp& grasp,
                           const GripperSpec& gripper);

struct FilterPolicy {
  /// Minimum angle between the approach axis and the table plane (degrees).
  double min_approach_angle_deg = 0.0;
  double min_table_clearance = 0.0;
  bool collision = true;

  void validate() const;
};

enum class RejectReason { ApproachAngle, TableClearance, Collision };

const char* to_string(RejectReason r);

struct FilterResult {
  GraspSet kept;
  std::vector<std::pair<Grasp, RejectReason>> rejected;
};

/// Angle of the approach axis below the table plane, in degrees. Top-down
/// grasps give 90.
double approach_elevation_deg(const Grasp& grasp);

/// Applies the policy in order approach angle, clearance, collision. When
/// `target_id` is empty each grasp's own object id is the target.
FilterResult filter_grasps(const Scene& scene, const GraspSet& grasps, const FilterPolicy& policy,
                           const GripperSpec& gripper, std::optional<int> target_id = std::nullopt);

/// Same policy with collisions judged against an observed cloud
/// (check_cloud_collision), for generators that never see a mesh.
FilterResult filter_grasps(std::span<const CloudPoint> cloud, const GraspSet& grasps,
                           const FilterPolicy& policy, const GripperSpec& gripper);

struct RenderOptions {
  /// Standard deviation of additive depth noise (m).
  double depth_noise = 0.0;
  std::uint64_t seed = 0;
};

/// Depth image (metres, 0 = no return) including the table, and the cloud of
/// object points with their face normals and ground-truth ids.
struct DepthObservation {
  int width = 0;
  int height = 0;
  std::vector<float> depth;
  /// Per pixel: object id, kTableEntity, or kNoReturn.
  std::vector<int> entity;
  std::vector<CloudPoint> cloud;
  /// Pixel index of each cloud point.
  std::vector<int> pixel;

  static constexpr int kNoReturn = -2;
};

DepthObservation render_depth(const Scene& scene, const RenderOptions& opts = {});

/// Object points only; the table is excluded.
std::vector<CloudPoint> render_partial_cloud(const Scene& scene, const RenderOptions& opts = {});

/// Replaces cloud normals with PCA normals from neighbouring pixels within
/// `radius` metres, oriented toward the camera.
void estimate_normals(DepthObservation& obs, const Camera& camera, int window = 2,
                      double radius = 0.01);

}  // namespace graspkit
