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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graspkit/bvh.hpp"
#include "graspkit/common.hpp"

namespace graspkit {

/// Parallel-jaw gripper. The gripper frame has the closing axis along x and
/// the approach axis along z; the finger pads are centred on the origin and
/// the palm sits behind them at negative z.
struct GripperSpec {
  double max_width = 0.08;
  double finger_depth = 0.06;
  double finger_thickness = 0.008;
  double finger_width = 0.02;
  double palm_depth = 0.02;
  /// How far the fingertips reach past the contact line along the approach
  /// axis. The rest of the finger depth lies on the palm side.
  double tip_length = 0.01;
  /// Added to the contact chord to get the commanded width.
  double closing_clearance = 0.005;
  /// Extra opening of the jaws during the pre-close collision check.
  double open_margin = 0.005;

  void validate() const;
};

struct JawBoxes {
  OrientedBox left;
  OrientedBox right;
  OrientedBox palm;
  /// Volume swept by the closing fingers.
  OrientedBox interior;
};

/// Collision boxes in world frame for a gripper at `pose` opened to `opening`.
JawBoxes jaw_boxes(const GripperSpec& gripper, const RigidPose& pose, double opening);

struct ContactPair {
  Vec3 p1;
  Vec3 n1;
  Vec3 p2;
  Vec3 n2;
  int object_id = -1;

  void validate() const;
};

enum class GraspSource { Modular, PartialView, External };

const char* to_string(GraspSource s);
GraspSource parse_grasp_source(const std::string& s);

struct Grasp {
  RigidPose pose;
  double width = 0.0;
  double score = 0.0;
  GraspSource source = GraspSource::Modular;
  int object_id = -1;
  /// Contacts the grasp was built from, when known. Not serialized.
  std::optional<ContactPair> contacts;
  /// Unrecognized record fields as (key, raw JSON text), kept for round trips.
  std::vector<std::pair<std::string, std::string>> extras;

  Vec3 center() const { return pose.translation; }
  Vec3 closing_axis() const { return pose.rotate(Vec3::UnitX()); }
  Vec3 approach_axis() const { return pose.rotate(Vec3::UnitZ()); }
};

struct GraspSet {
  std::vector<Grasp> grasps;
  std::uint64_t seed = 0;
  std::string generator;

  std::size_t size() const { return grasps.size(); }
  bool empty() const { return grasps.empty(); }
};

/// Both connecting-line angles within atan(mu) of the inward normals.
/// Boundary inclusive.
bool is_antipodal(const ContactPair& pair, double mu);

/// Largest of the two cone angles, in radians.
double antipodal_angle(const ContactPair& pair);

/// Antipodal margin mapped to [0, 1]; 1 when the line is along both normals.
double antipodal_score(const ContactPair& pair, double mu);

/// Gripper frame from a contact pair. x is the closing direction p1 -> p2;
/// z is `reference` projected orthogonal to x and rotated by `roll` about x.
/// Throws "width infeasible" when the chord exceeds the gripper's max width.
Grasp grasp_from_contacts(const ContactPair& pair, double roll, double standoff,
                          const GripperSpec& gripper,
                          const std::optional<Vec3>& reference = std::nullopt);

struct SamplerOptions {
  int attempts = 2000;
  std::size_t cap = 100;
  int rolls = 6;
  double standoff = 0.0;
  double dedup_translation = 0.005;
  double dedup_rotation_deg = 10.0;
  /// Second-contact rays start this far inside the surface.
  double ray_offset = 1e-4;

  void validate() const;
};

/// Score-ordered greedy de-duplication truncated to `cap`. Stable for equal
/// scores.
std::vector<Grasp> dedup_and_cap(std::vector<Grasp> candidates, const SamplerOptions& opts);

GraspSet sample_antipodal_grasps(const MeshBvh& mesh, const GripperSpec& gripper, double mu,
                                 const SamplerOptions& opts, std::uint64_t seed,
                                 int object_id = -1);

GraspSet sample_antipodal_grasps(const TriMesh& mesh, const GripperSpec& gripper, double mu,
                                 const SamplerOptions& opts, std::uint64_t seed,
                                 int object_id = -1);

struct CloudPoint {
  Vec3 point;
  Vec3 normal;
  int object_id = -1;
};

struct PartialViewOptions {
  SamplerOptions sampler;
  /// Radius of the tube around the cast ray searched for the second contact.
  double tube_radius = 0.003;
  /// Cloud points closer than this along the ray belong to the first contact.
  double min_separation = 0.005;
};

/// Antipodal pairing on a point cloud. The first contact is a random cloud
/// point; the second is the first cloud point inside a thin tube around a
/// ray drawn in the friction cone. Grasps take the object id of the first
/// contact. Throws "insufficient observation" below 10 points.
GraspSet partial_view_sample(std::span<const CloudPoint> cloud, const GripperSpec& gripper,
                             double mu, const PartialViewOptions& opts, std::uint64_t seed);

}  // namespace graspkit
