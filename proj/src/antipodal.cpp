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

#include "graspkit/antipodal.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "graspkit/geometry.hpp"
#include "graspkit/rng.hpp"

namespace graspkit {

void GripperSpec::validate() const {
  if (!(max_width > 0 && finger_depth > 0 && finger_thickness > 0 && finger_width > 0 &&
        palm_depth > 0)) {
    throw Error("gripper dimensions must be positive");
  }
  if (!(max_width > 2.0 * finger_thickness)) {
    throw Error("gripper max_width must exceed twice the finger thickness");
  }
  if (!(tip_length > 0 && tip_length <= finger_depth)) {
    throw Error("gripper tip_length must lie in (0, finger_depth]");
  }
  if (!(closing_clearance >= 0 && open_margin >= 0)) {
    throw Error("gripper clearances must be non-negative");
  }
}

JawBoxes jaw_boxes(const GripperSpec& g, const RigidPose& pose, double opening) {
  const Mat3 r = pose.matrix();
  auto box = [&](const Vec3& local_center, const Vec3& half) {
    OrientedBox b;
    b.center = pose.apply(local_center);
    b.axes = r;
    b.half = half;
    return b;
  };
  const double t = g.finger_thickness;
  const double d = g.finger_depth;
  const double w = g.finger_width;
  // Fingers span z in [tip_length - d, tip_length]; the palm sits behind them.
  const double zc = g.tip_length - 0.5 * d;
  JawBoxes out;
  out.left = box(Vec3(-(0.5 * opening + 0.5 * t), 0, zc), Vec3(0.5 * t, 0.5 * w, 0.5 * d));
  out.right = box(Vec3(0.5 * opening + 0.5 * t, 0, zc), Vec3(0.5 * t, 0.5 * w, 0.5 * d));
  const double palm_half_x = 0.5 * std::max(opening, g.max_width) + t;
  out.palm = box(Vec3(0, 0, g.tip_length - d - 0.5 * g.palm_depth),
                 Vec3(palm_half_x, 0.5 * w, 0.5 * g.palm_depth));
  out.interior = box(Vec3(0, 0, zc), Vec3(0.5 * opening, 0.5 * w, 0.5 * d));
  return out;
}

void ContactPair::validate() const {
  if (!((p2 - p1).norm() > 1e-6)) throw Error("contact points coincide");
  if (std::abs(n1.norm() - 1.0) > 1e-6 || std::abs(n2.norm() - 1.0) > 1e-6) {
    throw Error("contact normals must be unit length");
  }
}

const char* to_string(GraspSource s) {
  switch (s) {
    case GraspSource::Modular:
      return "modular";
    case GraspSource::PartialView:
      return "partial-view";
    case GraspSource::External:
      return "external";
  }
  return "external";
}

GraspSource parse_grasp_source(const std::string& s) {
  if (s == "modular") return GraspSource::Modular;
  if (s == "partial-view") return GraspSource::PartialView;
  if (s == "external") return GraspSource::External;
  throw Error("unknown grasp source '" + s + "'");
}

namespace {

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace

double antipodal_angle(const ContactPair& pair) {
  const Vec3 d = (pair.p2 - pair.p1).normalized();
  return std::max(angle_between(d, -pair.n1), angle_between(-d, -pair.n2));
}

bool is_antipodal(const ContactPair& pair, double mu) {
  if (mu < 0) return false;
  return antipodal_angle(pair) <= std::atan(mu) + 1e-12;
}

double antipodal_score(const ContactPair& pair, double mu) {
  const double cone = std::atan(mu);
  if (cone <= 0) return 1.0;
  return std::clamp((cone - antipodal_angle(pair)) / cone, 0.0, 1.0);
}

Grasp grasp_from_contacts(const ContactPair& pair, double roll, double standoff,
                          const GripperSpec& gripper, const std::optional<Vec3>& reference) {
  const Vec3 delta = pair.p2 - pair.p1;
  const double chord = delta.norm();
  if (!(chord > 1e-6)) throw Error("contact points coincide");
  if (chord > gripper.max_width) throw Error("width infeasible");
  const Vec3 x = delta / chord;

  Vec3 ref = reference.value_or(any_orthogonal(x));
  ref -= ref.dot(x) * x;
  if (ref.norm() < 1e-9) ref = any_orthogonal(x);
  ref.normalize();
  const Vec3 z = Eigen::AngleAxisd(roll, x) * ref;
  const Vec3 y = z.cross(x);

  Mat3 r;
  r.col(0) = x;
  r.col(1) = y.normalized();
  r.col(2) = z.normalized();

  Grasp g;
  g.pose = RigidPose::from_matrix(r, 0.5 * (pair.p1 + pair.p2) - standoff * r.col(2));
  g.width = std::min(chord + gripper.closing_clearance, gripper.max_width);
  g.object_id = pair.object_id;
  g.contacts = pair;
  return g;
}

void SamplerOptions::validate() const {
  if (attempts < 0) throw Error("attempts must be non-negative");
  if (cap < 1) throw Error("cap must be at least 1");
  if (rolls < 1) throw Error("rolls must be at least 1");
  if (!(dedup_translation >= 0 && dedup_rotation_deg >= 0 && ray_offset > 0)) {
    throw Error("invalid sampler tolerances");
  }
}

std::vector<Grasp> dedup_and_cap(std::vector<Grasp> candidates, const SamplerOptions& opts) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Grasp& a, const Grasp& b) { return a.score > b.score; });
  const double rot_tol = deg2rad(opts.dedup_rotation_deg);
  std::vector<Grasp> kept;
  for (Grasp& g : candidates) {
    if (kept.size() >= opts.cap) break;
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const Grasp& k) {
      return (k.pose.translation - g.pose.translation).norm() < opts.dedup_translation &&
             rotation_distance(k.pose.rotation, g.pose.rotation) < rot_tol;
    });
    if (!duplicate) kept.push_back(std::move(g));
  }
  return kept;
}

namespace {

/// Direction uniform in the spherical cap of half-angle `half_angle` about
/// `axis`, using (t1, t2) as the tangent basis.
Vec3 cone_direction(Rng& rng, const Vec3& axis, const Vec3& t1, const Vec3& t2,
                    double half_angle) {
  const double cos_max = std::cos(half_angle);
  const double c = 1.0 - rng.uniform() * (1.0 - cos_max);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  const double phi = 2.0 * kPi * rng.uniform();
  return (c * axis + s * (std::cos(phi) * t1 + std::sin(phi) * t2)).normalized();
}

void tangent_basis(const Vec3& n, const Vec3& hint, Vec3& t1, Vec3& t2) {
  t1 = hint - hint.dot(n) * n;
  if (t1.norm() < 1e-9) t1 = any_orthogonal(n);
  t1.normalize();
  t2 = n.cross(t1);
}

void add_rolls(const ContactPair& pair, const Vec3& reference, double mu, GraspSource source,
               const GripperSpec& gripper, const SamplerOptions& opts, std::vector<Grasp>& out) {
  const double score = antipodal_score(pair, mu);
  for (int k = 0; k < opts.rolls; ++k) {
    const double roll = 2.0 * kPi * k / opts.rolls;
    Grasp g = grasp_from_contacts(pair, roll, opts.standoff, gripper, reference);
    g.score = score;
    g.source = source;
    out.push_back(std::move(g));
  }
}

}  // namespace

GraspSet sample_antipodal_grasps(const MeshBvh& bvh, const GripperSpec& gripper, double mu,
                                 const SamplerOptions& opts, std::uint64_t seed, int object_id) {
  gripper.validate();
  opts.validate();
  if (mu < 0) throw Error("mu must be non-negative");
  const TriMesh& mesh = bvh.mesh();
  if (mesh.empty()) throw Error("empty geometry");

  const SurfaceSampler sampler(mesh);
  const SeedTree root(seed);
  const double cone = std::atan(mu);
  std::vector<Grasp> candidates;
  for (int a = 0; a < opts.attempts; ++a) {
    Rng rng = root.child(static_cast<std::uint64_t>(a)).rng();
    const SurfaceSample s = sampler.draw(rng);
    const Vec3 edge = mesh.corner(s.face, 1) - mesh.corner(s.face, 0);
    Vec3 t1, t2;
    tangent_basis(s.normal, edge, t1, t2);
    const Vec3 d = cone_direction(rng, -s.normal, t1, t2, cone);

    const Vec3 origin = s.point + opts.ray_offset * d;
    const auto hit = bvh.ray_cast(origin, d, gripper.max_width);
    if (!hit) continue;
    ContactPair pair{s.point, s.normal, hit->point, hit->normal, object_id};
    if ((pair.p2 - pair.p1).norm() > gripper.max_width) continue;
    if (!is_antipodal(pair, mu)) continue;
    add_rolls(pair, edge, mu, GraspSource::Modular, gripper, opts, candidates);
  }

  GraspSet set;
  set.seed = seed;
  set.generator = "modular";
  set.grasps = dedup_and_cap(std::move(candidates), opts);
  return set;
}

GraspSet sample_antipodal_grasps(const TriMesh& mesh, const GripperSpec& gripper, double mu,
                                 const SamplerOptions& opts, std::uint64_t seed, int object_id) {
  if (mesh.empty()) throw Error("empty geometry");
  const MeshBvh bvh(std::make_shared<const TriMesh>(mesh));
  return sample_antipodal_grasps(bvh, gripper, mu, opts, seed, object_id);
}

namespace {

/// Uniform hash grid over cloud points for tube queries.
class PointGrid {
 public:
  PointGrid(std::span<const CloudPoint> cloud, double cell) : cloud_(cloud), cell_(cell) {
    for (std::size_t i = 0; i < cloud.size(); ++i) cells_[key(cell_of(cloud[i].point))].push_back(i);
  }

  /// Index of the cloud point with the smallest ray parameter in
  /// [t_min, t_max] among points within `radius` of the ray.
  std::optional<std::size_t> first_in_tube(const Vec3& o, const Vec3& d, double t_min,
                                           double t_max, double radius) const {
    std::optional<std::size_t> best;
    double best_t = t_max;
    const double step = 0.5 * cell_;
    const int reach = static_cast<int>(std::ceil(radius / cell_)) + 1;
    // Cell coordinates are monotonic along a ray, so every cell already
    // scanned lies in the previous step's neighborhood cube.
    std::optional<std::array<int, 3>> prev;
    for (double t = std::max(0.0, t_min - radius); t <= best_t + radius + step; t += step) {
      const std::array<int, 3> c = cell_of(o + t * d);
      if (prev && *prev == c) continue;
      for (int dx = -reach; dx <= reach; ++dx) {
        for (int dy = -reach; dy <= reach; ++dy) {
          for (int dz = -reach; dz <= reach; ++dz) {
            const std::array<int, 3> cc{c[0] + dx, c[1] + dy, c[2] + dz};
            if (prev && std::abs(cc[0] - (*prev)[0]) <= reach &&
                std::abs(cc[1] - (*prev)[1]) <= reach && std::abs(cc[2] - (*prev)[2]) <= reach) {
              continue;
            }
            const auto it = cells_.find(key(cc));
            if (it == cells_.end()) continue;
            for (const std::size_t i : it->second) {
              const Vec3 v = cloud_[i].point - o;
              const double ti = v.dot(d);
              if (ti < t_min || ti > best_t) continue;
              if ((v - ti * d).norm() > radius) continue;
              if (!best || ti < best_t || (ti == best_t && i < *best)) {
                best = i;
                best_t = ti;
              }
            }
          }
        }
      }
      prev = c;
    }
    return best;
  }

 private:
  std::array<int, 3> cell_of(const Vec3& p) const {
    return {static_cast<int>(std::floor(p.x() / cell_)), static_cast<int>(std::floor(p.y() / cell_)),
            static_cast<int>(std::floor(p.z() / cell_))};
  }
  static std::uint64_t key(const std::array<int, 3>& c) {
    const auto u = [](int v) { return static_cast<std::uint64_t>(static_cast<std::uint32_t>(v) & 0x1FFFFF); };
    return u(c[0]) | (u(c[1]) << 21) | (u(c[2]) << 42);
  }

  std::span<const CloudPoint> cloud_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace

GraspSet partial_view_sample(std::span<const CloudPoint> cloud, const GripperSpec& gripper,
                             double mu, const PartialViewOptions& opts, std::uint64_t seed) {
  gripper.validate();
  opts.sampler.validate();
  if (mu < 0) throw Error("mu must be non-negative");
  if (cloud.size() < 10) throw Error("insufficient observation");

  const PointGrid grid(cloud, std::max(opts.tube_radius, 1e-4));
  const SeedTree root(seed);
  const double cone = std::atan(mu);
  std::vector<Grasp> candidates;
  for (int a = 0; a < opts.sampler.attempts; ++a) {
    Rng rng = root.child(static_cast<std::uint64_t>(a)).rng();
    const CloudPoint& first = cloud[rng.index(cloud.size())];
    const Vec3 n1 = first.normal.normalized();
    Vec3 t1, t2;
    tangent_basis(n1, any_orthogonal(n1), t1, t2);
    const Vec3 d = cone_direction(rng, -n1, t1, t2, cone);
    const auto second = grid.first_in_tube(first.point, d, opts.min_separation,
                                           gripper.max_width, opts.tube_radius);
    if (!second) continue;
    const CloudPoint& other = cloud[*second];
    ContactPair pair{first.point, n1, other.point, other.normal.normalized(), first.object_id};
    if ((pair.p2 - pair.p1).norm() > gripper.max_width) continue;
    if (!is_antipodal(pair, mu)) continue;
    add_rolls(pair, t1, mu, GraspSource::PartialView, gripper, opts.sampler, candidates);
  }

  GraspSet set;
  set.seed = seed;
  set.generator = "partial-view";
  set.grasps = dedup_and_cap(std::move(candidates), opts.sampler);
  return set;
}

}  // namespace graspkit
