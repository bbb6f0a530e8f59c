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

#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace graspkit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Base exception for every recoverable failure in the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rigid transform x -> R x + t with R stored as a unit quaternion.
struct RigidPose {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  RigidPose() = default;
  RigidPose(const Quat& q, const Vec3& t) : rotation(q), translation(t) {}

  static RigidPose identity() { return {}; }
  static RigidPose from_matrix(const Mat3& r, const Vec3& t);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 rotate(const Vec3& v) const { return rotation * v; }
  Mat3 matrix() const { return rotation.toRotationMatrix(); }
  RigidPose inverse() const;

  /// True when the quaternion is unit within `tol`.
  bool is_valid(double tol = 1e-9) const;
};

/// Composition: (a * b).apply(x) == a.apply(b.apply(x)).
RigidPose operator*(const RigidPose& a, const RigidPose& b);

/// Geodesic angle (radians) between two rotations.
double rotation_distance(const Quat& a, const Quat& b);

/// Canonical sign (w >= 0) so that equal rotations serialize identically.
Quat canonical(const Quat& q);

/// Any unit vector orthogonal to `v` (deterministic in `v`).
Vec3 any_orthogonal(const Vec3& v);

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace graspkit
