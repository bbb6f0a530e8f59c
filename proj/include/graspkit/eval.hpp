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

#include <optional>
#include <span>
#include <vector>

#include "graspkit/antipodal.hpp"
#include "graspkit/scene.hpp"
#include "graspkit/wrench.hpp"

namespace graspkit {

struct EvalParams {
  double mu = 0.5;
  /// Soft-finger torsion as a fraction of the torque scale.
  double torsion_ratio = 0.002;
  int cone_edges = 8;
  double eps_min = 1e-3;
  double tau_arm = 0.015;

  void validate() const;
};

enum class OutcomeClass { Collision, FcFailure, Unstable, Success };

const char* to_string(OutcomeClass c);

struct GraspOutcome {
  int grasp_id = -1;
  int object_id = -1;
  bool collided = false;
  std::optional<int> collision_entity;
  std::optional<ContactPair> contacts;
  bool force_closure = false;
  double epsilon = 0.0;
  bool stable = false;
  OutcomeClass outcome = OutcomeClass::FcFailure;
};

/// Closes the fingers of `grasp` onto the target: rays from both pad centres
/// along the closing axis, first hits on the target only. Empty when either
/// ray misses, starts inside the target, or the hits cross.
std::optional<ContactPair> recompute_contacts(const Scene& scene, const Grasp& grasp,
                                              const GripperSpec& gripper, int target_id);

/// Distance from `com` to the line through both contacts.
double moment_arm(const ContactPair& contacts, const Vec3& com);

bool stability_proxy(const std::optional<ContactPair>& contacts, const Vec3& com, double mu,
                     double tau_arm);

/// Wrench model for a target: lambda is its bounding radius about the CoM.
ContactModel contact_model_for(const Scene& scene, std::size_t index, const EvalParams& params);

/// Collision, then closure on the recomputed contacts, then stability.
/// Later checks are skipped once one fails.
GraspOutcome evaluate_grasp(const Scene& scene, const Grasp& grasp, const GripperSpec& gripper,
                            const EvalParams& params, std::optional<int> target_id = std::nullopt,
                            int grasp_id = -1);

struct StageTimes {
  double scene = 0.0;
  double reconstruction = 0.0;
  double sampling = 0.0;
  double filtering = 0.0;
  double evaluation = 0.0;
  /// Measured independently of the stages.
  double total = 0.0;

  double stage_sum() const { return scene + reconstruction + sampling + filtering + evaluation; }
  StageTimes& operator+=(const StageTimes& o);
};

struct MetricsReport {
  std::size_t evaluated = 0;
  double gcr = 0.0;
  double fcfr = 0.0;
  double unstable_rate = 0.0;
  double success_rate = 0.0;
  /// Collision-free and force closure, ignoring the stability proxy.
  double success_without_stability = 0.0;
  std::size_t objects = 0;
  double avg_grasps_per_object = 0.0;
  std::size_t max_grasps_per_object = 0;
  StageTimes times;
};

/// Class counts over the outcome list; throws "nothing evaluated" when empty.
MetricsReport compute_metrics(std::span<const GraspOutcome> outcomes,
                              std::span<const std::size_t> per_object_counts);

/// Re-scores grasps against a reconstruction: drops those that collide with
/// it or whose contacts on it are not force closure.
GraspSet filter_by_reconstruction(const Scene& reconstruction, const GraspSet& grasps,
                                  const GripperSpec& gripper, const EvalParams& params);

}  // namespace graspkit
