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

#include <span>
#include <vector>

#include "graspkit/common.hpp"

namespace graspkit {

/// Coulomb friction with optional soft-finger torsion.
///
/// `mu_torsion` is a length: the torsional moment a contact can resist per
/// unit normal force. `torque_scale` (lambda) divides every torque so wrench
/// magnitudes are comparable across object sizes.
struct ContactModel {
  double mu = 0.5;
  double mu_torsion = 0.002;
  int cone_edges = 8;
  double torque_scale = 1.0;

  /// Default soft-finger model: mu_torsion = torsion_ratio * lambda.
  static ContactModel soft_finger(double mu, double lambda, double torsion_ratio = 0.002,
                                  int cone_edges = 8);

  void validate() const;
};

using Wrench = Eigen::Matrix<double, 6, 1>;

struct WrenchSet {
  std::vector<Wrench> wrenches;

  std::size_t size() const { return wrenches.size(); }
  bool empty() const { return wrenches.empty(); }
};

/// Surface contact with outward unit normal.
struct Contact {
  Vec3 point;
  Vec3 normal;
};

/// Unit force directions normalize(-n + mu t_i) for evenly spaced tangents.
std::vector<Vec3> friction_cone_edges(const Vec3& normal, const ContactModel& model);

/// Per contact: one wrench [f; (p - com) x f / lambda] per cone edge, plus
/// [0; +-mu_torsion n / lambda] when mu_torsion > 0.
WrenchSet grasp_wrench_set(std::span<const Contact> contacts, const Vec3& com,
                           const ContactModel& model);

struct ClosureResult {
  /// Origin strictly inside the hull (LP with a rank test).
  bool origin_inside = false;
  /// Distance from the origin to the nearest hull facet; 0 unless inside.
  double margin = 0.0;
  bool force_closure = false;
};

/// Linear program: maximize t s.t. sum_i lambda_i w_i = 0, sum lambda_i = 1,
/// lambda_i >= t. A positive optimum puts the origin in the relative
/// interior; full rank of the wrench matrix upgrades that to the interior.
bool origin_strictly_inside(const WrenchSet& wrenches);

ClosureResult analyze_closure(const WrenchSet& wrenches, double eps_min = 1e-3);

bool force_closure(const WrenchSet& wrenches, double eps_min = 1e-3);

/// Radius of the largest origin-centred ball inside the wrench hull.
double quality_epsilon(const WrenchSet& wrenches);

}  // namespace graspkit
