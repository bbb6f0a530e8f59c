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

#include "graspkit/wrench.hpp"

#include <cmath>

#include "graspkit/hull.hpp"
#include "graspkit/lp.hpp"

namespace graspkit {

void ContactModel::validate() const {
  if (!(mu >= 0.0)) throw Error("mu must be non-negative");
  if (!(mu_torsion >= 0.0)) throw Error("mu_torsion must be non-negative");
  if (cone_edges < 3) throw Error("cone_edges must be at least 3");
  if (!(torque_scale > 0.0)) throw Error("torque_scale must be positive");
}

ContactModel ContactModel::soft_finger(double mu, double lambda, double torsion_ratio,
                                       int cone_edges) {
  ContactModel m;
  m.mu = mu;
  m.mu_torsion = torsion_ratio * lambda;
  m.cone_edges = cone_edges;
  m.torque_scale = lambda;
  m.validate();
  return m;
}

std::vector<Vec3> friction_cone_edges(const Vec3& normal, const ContactModel& model) {
  const Vec3 n = normal.normalized();
  const Vec3 t1 = any_orthogonal(n);
  const Vec3 t2 = n.cross(t1);
  std::vector<Vec3> edges;
  edges.reserve(model.cone_edges);
  for (int i = 0; i < model.cone_edges; ++i) {
    const double a = 2.0 * kPi * i / model.cone_edges;
    const Vec3 t = std::cos(a) * t1 + std::sin(a) * t2;
    edges.push_back((-n + model.mu * t).normalized());
  }
  return edges;
}

WrenchSet grasp_wrench_set(std::span<const Contact> contacts, const Vec3& com,
                           const ContactModel& model) {
  model.validate();
  WrenchSet set;
  const double inv_lambda = 1.0 / model.torque_scale;
  for (const Contact& c : contacts) {
    const Vec3 arm = c.point - com;
    for (const Vec3& f : friction_cone_edges(c.normal, model)) {
      Wrench w;
      w << f, arm.cross(f) * inv_lambda;
      set.wrenches.push_back(w);
    }
    if (model.mu_torsion > 0.0) {
      const Vec3 tau = model.mu_torsion * c.normal.normalized() * inv_lambda;
      Wrench plus;
      plus << Vec3::Zero(), tau;
      Wrench minus;
      minus << Vec3::Zero(), -tau;
      set.wrenches.push_back(plus);
      set.wrenches.push_back(minus);
    }
  }
  return set;
}

bool origin_strictly_inside(const WrenchSet& ws) {
  const int n = static_cast<int>(ws.size());
  if (n < 7) return false;
  Eigen::Matrix<double, 6, Eigen::Dynamic> w(6, n);
  for (int i = 0; i < n; ++i) w.col(i) = ws.wrenches[i];

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
  const auto& sv = svd.singularValues();
  if (sv[5] <= 1e-9 * std::max(1.0, sv[0])) return false;

  // Variables: mu_i = lambda_i - t >= 0 and t >= 0.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(7, n + 1);
  a.block(0, 0, 6, n) = w;
  a.block(0, n, 6, 1) = w.rowwise().sum();
  a.block(6, 0, 1, n).setOnes();
  a(6, n) = static_cast<double>(n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(7);
  b[6] = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
  c[n] = -1.0;
  const LpResult lp = solve_lp(a, b, c);
  return lp.status == LpStatus::Optimal && lp.x[n] > 1e-10;
}

ClosureResult analyze_closure(const WrenchSet& ws, double eps_min) {
  ClosureResult r;
  if (ws.empty()) return r;
  r.origin_inside = origin_strictly_inside(ws);
  if (!r.origin_inside) return r;
  const ConvexHull<6> hull{std::span<const Wrench>(ws.wrenches)};
  r.margin = hull.full_dimensional() ? std::max(0.0, hull.min_offset()) : 0.0;
  r.force_closure = r.margin >= eps_min && r.margin > 0.0;
  return r;
}

bool force_closure(const WrenchSet& ws, double eps_min) {
  return analyze_closure(ws, eps_min).force_closure;
}

double quality_epsilon(const WrenchSet& ws) { return analyze_closure(ws, 0.0).margin; }

}  // namespace graspkit
