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

#include "graspkit/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace graspkit {

void EvalParams::validate() const {
  if (!(mu >= 0)) throw Error("mu must be non-negative");
  if (!(torsion_ratio >= 0)) throw Error("torsion_ratio must be non-negative");
  if (cone_edges < 3) throw Error("cone_edges must be at least 3");
  if (!(eps_min >= 0)) throw Error("eps_min must be non-negative");
  if (!(tau_arm >= 0)) throw Error("tau_arm must be non-negative");
}

const char* to_string(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::Collision:
      return "collision";
    case OutcomeClass::FcFailure:
      return "fc-failure";
    case OutcomeClass::Unstable:
      return "unstable";
    case OutcomeClass::Success:
      return "success";
  }
  return "fc-failure";
}

std::optional<ContactPair> recompute_contacts(const Scene& scene, const Grasp& grasp,
                                              const GripperSpec& gripper, int target_id) {
  const std::size_t idx = scene.index_of(target_id);
  const MeshBvh& bvh = scene.world(idx);
  const Vec3 x = grasp.closing_axis();
  const double half = 0.5 * grasp.width;
  const double reach = std::min(grasp.width, gripper.max_width);
  const Vec3 left = grasp.center() - half * x;
  const Vec3 right = grasp.center() + half * x;
  const auto h1 = bvh.ray_cast(left, x, reach);
  const auto h2 = bvh.ray_cast(right, -x, reach);
  if (!h1 || !h2) return std::nullopt;
  // A pad that starts inside the target sees a back face first.
  if (h1->normal.dot(x) >= 0 || h2->normal.dot(x) <= 0) return std::nullopt;
  if (h1->distance + h2->distance > grasp.width + 1e-12) return std::nullopt;
  if ((h2->point - h1->point).norm() <= 1e-6) return std::nullopt;
  return ContactPair{h1->point, h1->normal, h2->point, h2->normal, target_id};
}

double moment_arm(const ContactPair& c, const Vec3& com) {
  const Vec3 d = (c.p2 - c.p1).normalized();
  return (com - c.p1).cross(d).norm();
}

bool stability_proxy(const std::optional<ContactPair>& contacts, const Vec3& com, double mu,
                     double tau_arm) {
  if (!contacts) return false;
  return moment_arm(*contacts, com) <= tau_arm && is_antipodal(*contacts, mu);
}

ContactModel contact_model_for(const Scene& scene, std::size_t index, const EvalParams& p) {
  const Vec3 com = scene.mass(index).center_of_mass;
  const double lambda = std::max(1e-6, bounding_radius(scene.world(index).mesh(), com));
  return ContactModel::soft_finger(p.mu, lambda, p.torsion_ratio, p.cone_edges);
}

namespace {

/// Force closure and epsilon for two contacts on scene object `index`.
std::pair<bool, double> closure(const Scene& scene, std::size_t index, const ContactPair& c,
                                const EvalParams& params) {
  const ContactModel model = contact_model_for(scene, index, params);
  const std::array<Contact, 2> contacts{Contact{c.p1, c.n1}, Contact{c.p2, c.n2}};
  const WrenchSet ws = grasp_wrench_set(contacts, scene.mass(index).center_of_mass, model);
  const ClosureResult r = analyze_closure(ws, params.eps_min);
  return {r.force_closure, r.margin};
}

}  // namespace

GraspOutcome evaluate_grasp(const Scene& scene, const Grasp& grasp, const GripperSpec& gripper,
                            const EvalParams& params, std::optional<int> target_id, int grasp_id) {
  const int target = target_id.value_or(grasp.object_id);
  const std::size_t idx = scene.index_of(target);
  GraspOutcome out;
  out.grasp_id = grasp_id;
  out.object_id = target;

  out.collision_entity = check_grasp_collision(scene, grasp, gripper, target);
  if (out.collision_entity) {
    out.collided = true;
    out.outcome = OutcomeClass::Collision;
    return out;
  }
  out.contacts = recompute_contacts(scene, grasp, gripper, target);
  if (!out.contacts) {
    out.outcome = OutcomeClass::FcFailure;
    return out;
  }
  std::tie(out.force_closure, out.epsilon) = closure(scene, idx, *out.contacts, params);
  if (!out.force_closure) {
    out.outcome = OutcomeClass::FcFailure;
    return out;
  }
  out.stable = stability_proxy(out.contacts, scene.mass(idx).center_of_mass, params.mu,
                               params.tau_arm);
  out.outcome = out.stable ? OutcomeClass::Success : OutcomeClass::Unstable;
  return out;
}

StageTimes& StageTimes::operator+=(const StageTimes& o) {
  scene += o.scene;
  reconstruction += o.reconstruction;
  sampling += o.sampling;
  filtering += o.filtering;
  evaluation += o.evaluation;
  total += o.total;
  return *this;
}

MetricsReport compute_metrics(std::span<const GraspOutcome> outcomes,
                              std::span<const std::size_t> per_object_counts) {
  if (outcomes.empty()) throw Error("nothing evaluated");
  std::array<std::size_t, 4> counts{};
  for (const GraspOutcome& o : outcomes) ++counts[static_cast<int>(o.outcome)];
  const double n = static_cast<double>(outcomes.size());
  MetricsReport r;
  r.evaluated = outcomes.size();
  r.gcr = counts[0] / n;
  r.fcfr = counts[1] / n;
  r.unstable_rate = counts[2] / n;
  r.success_rate = counts[3] / n;
  r.success_without_stability = (counts[2] + counts[3]) / n;
  r.objects = per_object_counts.size();
  std::size_t sum = 0;
  for (const std::size_t c : per_object_counts) {
    sum += c;
    r.max_grasps_per_object = std::max(r.max_grasps_per_object, c);
  }
  r.avg_grasps_per_object = per_object_counts.empty() ? 0.0 : static_cast<double>(sum) / per_object_counts.size();
  return r;
}

GraspSet filter_by_reconstruction(const Scene& recon, const GraspSet& grasps,
                                  const GripperSpec& gripper, const EvalParams& params) {
  GraspSet kept;
  kept.seed = grasps.seed;
  kept.generator = grasps.generator;
  for (const Grasp& g : grasps.grasps) {
    const auto idx = recon.find(g.object_id);
    if (!idx) continue;
    if (check_grasp_collision(recon, g, gripper, g.object_id)) continue;
    const auto contacts = recompute_contacts(recon, g, gripper, g.object_id);
    if (!contacts) continue;
    if (!closure(recon, *idx, *contacts, params).first) continue;
    kept.grasps.push_back(g);
  }
  return kept;
}

}  // namespace graspkit
