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

#include "graspkit/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graspkit {

RigidPose RigidPose::from_matrix(const Mat3& r, const Vec3& t) {
  Quat q(r);
  q.normalize();
  return {q, t};
}

RigidPose RigidPose::inverse() const {
  const Quat inv = rotation.conjugate();
  return {inv, -(inv * translation)};
}

bool RigidPose::is_valid(double tol) const {
  return std::abs(rotation.norm() - 1.0) <= tol && translation.allFinite();
}

RigidPose operator*(const RigidPose& a, const RigidPose& b) {
  Quat q = a.rotation * b.rotation;
  q.normalize();
  return {q, a.rotation * b.translation + a.translation};
}

double rotation_distance(const Quat& a, const Quat& b) {
  const double d = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return 2.0 * std::acos(d);
}

Quat canonical(const Quat& q) {
  // Already-unit input is left alone so canonical() is idempotent bit for bit.
  Quat n = q;
  if (std::abs(q.squaredNorm() - 1.0) > 8 * std::numeric_limits<double>::epsilon()) n.normalize();
  if (n.w() < 0.0) n.coeffs() = -n.coeffs();
  return n;
}

Vec3 any_orthogonal(const Vec3& v) {
  const Vec3 a = std::abs(v.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return v.cross(a).normalized();
}

}  // namespace graspkit
