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

#include "graspkit/scene.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "graspkit/hull.hpp"
#include "graspkit/rng.hpp"

namespace graspkit {

Camera Camera::look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 z = (target - eye).normalized();
  Vec3 x = z.cross(Vec3::UnitZ());
  if (x.norm() < 1e-9) x = Vec3::UnitX();
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r << x, y, z;
  Camera c;
  c.pose = RigidPose::from_matrix(r, eye);
  return c;
}

Camera Camera::default_view() {
  const double d = 0.7;
  const double elev = deg2rad(45.0);
  return look_at(Vec3(0.0, -d * std::cos(elev), d * std::sin(elev)), Vec3::Zero());
}

Vec3 Camera::ray_direction(double u, double v) const {
  return pose.rotate(Vec3((u - cx) / fx, (v - cy) / fy, 1.0).normalized());
}

Eigen::Vector3d Camera::project(const Vec3& world) const {
  const Vec3 p = pose.inverse().apply(world);
  return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy, p.z()};
}

void Camera::validate() const {
  if (!(fx > 0 && fy > 0)) throw Error("camera focal lengths must be positive");
  if (width < 1 || height < 1) throw Error("camera image size must be positive");
  if (!pose.is_valid(1e-6)) throw Error("camera rotation is not a unit quaternion");
}

namespace {

MassProperties mass_or_centroid(const TriMesh& mesh) {
  if (mesh.is_watertight()) {
    const MassProperties m = mass_properties(mesh);
    if (m.volume > 0) return m;
  }
  MassProperties m;
  Vec3 c = Vec3::Zero();
  for (const Vec3& v : mesh.vertices()) c += v;
  if (mesh.num_vertices() > 0) c /= static_cast<double>(mesh.num_vertices());
  m.center_of_mass = c;
  return m;
}

}  // namespace

Scene::Scene(std::vector<Instance> instances, Camera camera, double mu_table, bool enforce_table)
    : instances_(std::move(instances)), camera_(camera), mu_table_(mu_table) {
  camera_.validate();
  if (!(mu_table_ >= 0)) throw Error("mu_table must be non-negative");
  std::set<int> ids;
  for (const Instance& inst : instances_) {
    if (!ids.insert(inst.object_id).second) {
      throw Error("duplicate object id " + std::to_string(inst.object_id));
    }
    if (!inst.mesh || inst.mesh->empty()) {
      throw Error("object " + std::to_string(inst.object_id) + " has no geometry");
    }
    if (!(inst.scale > 0)) throw Error("object " + std::to_string(inst.object_id) + " scale must be positive");
    if (!inst.pose.is_valid(1e-6)) {
      throw Error("object " + std::to_string(inst.object_id) + " rotation is not a unit quaternion");
    }
    auto world = std::make_shared<const TriMesh>(transform(*inst.mesh, inst.pose, inst.scale));
    if (enforce_table && world->bounds().lo.z() < -1e-3) {
      throw Error("object " + std::to_string(inst.object_id) + " penetrates the table");
    }
    mass_.push_back(mass_or_centroid(*world));
    world_.push_back(std::make_shared<const MeshBvh>(std::move(world)));
  }
}

std::optional<std::size_t> Scene::find(int object_id) const {
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    if (instances_[i].object_id == object_id) return i;
  }
  return std::nullopt;
}

std::size_t Scene::index_of(int object_id) const {
  const auto i = find(object_id);
  if (!i) throw Error("unknown object id " + std::to_string(object_id));
  return *i;
}

std::vector<RestingFace> stable_faces(const TriMesh& mesh, const Vec3& com) {
  using Hull3 = ConvexHull<3>;
  const Hull3 hull{std::span<const Vec3>(mesh.vertices())};
  if (!hull.full_dimensional()) return {};

  const double size = std::max(1e-9, mesh.bounds().extent().maxCoeff());
  struct Group {
    Vec3 normal;
    double offset;
    double area = 0.0;
    std::set<int> verts;
  };
  std::vector<Group> groups;
  const auto& vs = mesh.vertices();
  for (const auto& f : hull.facets()) {
    const Vec3& a = vs[f.vertices[0]];
    const Vec3& b = vs[f.vertices[1]];
    const Vec3& c = vs[f.vertices[2]];
    const double area = 0.5 * (b - a).cross(c - a).norm();
    Group* target = nullptr;
    for (Group& g : groups) {
      if (g.normal.dot(f.normal) > 1.0 - 1e-6 && std::abs(g.offset - f.offset) < 1e-5 * size) {
        target = &g;
        break;
      }
    }
    if (!target) {
      groups.push_back(Group{f.normal, f.offset, 0.0, {}});
      target = &groups.back();
    }
    target->area += area;
    target->verts.insert(f.vertices.begin(), f.vertices.end());
  }

  std::vector<RestingFace> out;
  const Group* largest = nullptr;
  for (const Group& g : groups) {
    if (!largest || g.area > largest->area) largest = &g;
    const Vec3 t1 = any_orthogonal(g.normal);
    const Vec3 t2 = g.normal.cross(t1);
    std::vector<Eigen::Vector2d> poly;
    for (const int v : g.verts) poly.emplace_back(t1.dot(vs[v]), t2.dot(vs[v]));
    const ConvexHull<2> outline{std::span<const Eigen::Vector2d>(poly)};
    if (!outline.full_dimensional()) continue;
    const Eigen::Vector2d c(t1.dot(com), t2.dot(com));
    bool inside = true;
    for (const auto& e : outline.facets()) {
      if (e.normal.dot(c) > e.offset - 1e-9 * size) {
        inside = false;
        break;
      }
    }
    if (inside) out.push_back({g.normal, g.area});
  }
  if (out.empty() && largest) out.push_back({largest->normal, largest->area});
  return out;
}

bool instances_overlap(const MeshBvh& a, const MeshBvh& b) {
  if (!a.bounds().overlaps(b.bounds())) return false;
  if (a.intersects(b)) return true;
  if (winding_number(b.mesh(), a.mesh().vertices().front()) > 0.5) return true;
  return winding_number(a.mesh(), b.mesh().vertices().front()) > 0.5;
}

Scene settle_scene(std::span<const CatalogEntry> meshes, int count, std::uint64_t seed,
                   const SettleOptions& opts) {
  if (count < 1) throw Error("object count must be at least 1");
  if (meshes.empty()) throw Error("no meshes to place");
  const SeedTree root(seed);
  std::vector<Instance> placed;
  std::vector<std::shared_ptr<const MeshBvh>> worlds;

  for (int k = 0; k < count; ++k) {
    const CatalogEntry& entry = meshes[static_cast<std::size_t>(k) % meshes.size()];
    if (!entry.mesh || entry.mesh->empty()) throw Error("empty geometry");
    const TriMesh& mesh = *entry.mesh;
    const Vec3 com = mass_or_centroid(mesh).center_of_mass;
    const std::vector<RestingFace> faces = stable_faces(mesh, com);
    if (faces.empty()) throw Error("object has no resting face");
    double total = 0.0;
    for (const RestingFace& f : faces) total += f.area;

    Rng rng = root.child(static_cast<std::uint64_t>(k)).rng();
    auto orientation = [&]() {
      double pick = rng.uniform() * total;
      std::size_t i = 0;
      while (i + 1 < faces.size() && pick >= faces[i].area) pick -= faces[i++].area;
      const Quat down = Quat::FromTwoVectors(faces[i].normal, -Vec3::UnitZ());
      const Quat yaw(Eigen::AngleAxisd(2.0 * kPi * rng.uniform(), Vec3::UnitZ()));
      return (yaw * down).normalized();
    };
    auto try_place = [&](const Quat& q, double x, double y) -> std::shared_ptr<const MeshBvh> {
      double min_z = std::numeric_limits<double>::infinity();
      for (const Vec3& v : mesh.vertices()) min_z = std::min(min_z, (q * v).z());
      const RigidPose pose(q, Vec3(x, y, -min_z));
      auto world = std::make_shared<const MeshBvh>(
          std::make_shared<const TriMesh>(transform(mesh, pose, 1.0)));
      for (const auto& other : worlds) {
        if (instances_overlap(*world, *other)) return nullptr;
      }
      return world;
    };

    std::shared_ptr<const MeshBvh> world;
    Quat q;
    Vec3 t;
    for (int attempt = 0; attempt < opts.max_tries && !world; ++attempt) {
      q = orientation();
      const double r = opts.placement_radius * std::sqrt(rng.uniform());
      const double a = 2.0 * kPi * rng.uniform();
      world = try_place(q, r * std::cos(a), r * std::sin(a));
    }
    if (!world) {
      // Golden-angle spiral outward from the centre.
      const double spacing = 0.5 * mesh.bounds().extent().maxCoeff() + 0.005;
      q = orientation();
      for (int j = 0; j < opts.spiral_steps && !world; ++j) {
        const double r = spacing * std::sqrt(static_cast<double>(j + 1));
        const double a = j * kPi * (3.0 - std::sqrt(5.0));
        world = try_place(q, r * std::cos(a), r * std::sin(a));
      }
    }
    if (!world) throw Error("scene overflow");

    Instance inst;
    inst.object_id = k;
    inst.mesh = entry.mesh;
    inst.source = entry.source;
    inst.scale = 1.0;
    // Recover the translation from the accepted world mesh.
    inst.pose = RigidPose(q, world->mesh().vertices().front() - q * mesh.vertices().front());
    placed.push_back(std::move(inst));
    worlds.push_back(std::move(world));
  }
  return Scene(std::move(placed), opts.camera, opts.mu_table);
}

std::optional<int> check_grasp_collision(const Scene& scene, const Grasp& grasp,
                                         const GripperSpec& gripper, int target_id) {
  const std::size_t target = scene.index_of(target_id);
  const JawBoxes jaws = jaw_boxes(gripper, grasp.pose, grasp.width + gripper.open_margin);
  for (const OrientedBox* b : {&jaws.left, &jaws.right, &jaws.palm}) {
    for (const Vec3& c : b->corners()) {
      if (c.z() < 0.0) return kTableEntity;
    }
  }
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const MeshBvh& bvh = scene.world(i);
    // A box no face crosses is either clear of the solid or buried in it.
    auto meets = [&bvh](const OrientedBox& b) {
      if (bvh.overlaps_box(b)) return true;
      return bvh.bounds().contains(b.center) && winding_number(bvh.mesh(), b.center) > 0.5;
    };
    bool hit = meets(jaws.left) || meets(jaws.right) || meets(jaws.palm);
    if (!hit && i != target) hit = meets(jaws.interior);
    if (hit) return scene.instances()[i].object_id;
  }
  return std::nullopt;
}

bool check_cloud_collision(std::span<const CloudPoint> cloud, const Grasp& grasp,
                           const GripperSpec& gripper) {
  const JawBoxes jaws = jaw_boxes(gripper, grasp.pose, grasp.width + gripper.open_margin);
  for (const OrientedBox* b : {&jaws.left, &jaws.right, &jaws.palm}) {
    for (const Vec3& c : b->corners()) {
      if (c.z() < 0.0) return true;
    }
  }
  for (const CloudPoint& p : cloud) {
    if (jaws.left.contains(p.point) || jaws.right.contains(p.point) || jaws.palm.contains(p.point)) {
      return true;
    }
  }
  return false;
}

void FilterPolicy::validate() const {
  if (!(min_approach_angle_deg >= 0 && min_approach_angle_deg <= 90)) {
    throw Error("min_approach_angle must be in [0, 90] degrees");
  }
  if (!(min_table_clearance >= 0)) throw Error("min_table_clearance must be non-negative");
}

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::ApproachAngle:
      return "approach-angle";
    case RejectReason::TableClearance:
      return "table-clearance";
    case RejectReason::Collision:
      return "collision";
  }
  return "collision";
}

double approach_elevation_deg(const Grasp& grasp) {
  return rad2deg(std::asin(std::clamp(-grasp.approach_axis().z(), -1.0, 1.0)));
}

namespace {

template <class Collides>
FilterResult apply_policy(const GraspSet& grasps, const FilterPolicy& policy, Collides&& collides) {
  policy.validate();
  FilterResult out;
  out.kept.seed = grasps.seed;
  out.kept.generator = grasps.generator;
  for (const Grasp& g : grasps.grasps) {
    if (policy.min_approach_angle_deg > 0 &&
        approach_elevation_deg(g) < policy.min_approach_angle_deg) {
      out.rejected.emplace_back(g, RejectReason::ApproachAngle);
    } else if (policy.min_table_clearance > 0 && g.center().z() < policy.min_table_clearance) {
      out.rejected.emplace_back(g, RejectReason::TableClearance);
    } else if (policy.collision && collides(g)) {
      out.rejected.emplace_back(g, RejectReason::Collision);
    } else {
      out.kept.grasps.push_back(g);
    }
  }
  return out;
}

}  // namespace

FilterResult filter_grasps(const Scene& scene, const GraspSet& grasps, const FilterPolicy& policy,
                           const GripperSpec& gripper, std::optional<int> target_id) {
  return apply_policy(grasps, policy, [&](const Grasp& g) {
    return check_grasp_collision(scene, g, gripper, target_id.value_or(g.object_id)).has_value();
  });
}

FilterResult filter_grasps(std::span<const CloudPoint> cloud, const GraspSet& grasps,
                           const FilterPolicy& policy, const GripperSpec& gripper) {
  return apply_policy(grasps, policy,
                      [&](const Grasp& g) { return check_cloud_collision(cloud, g, gripper); });
}

DepthObservation render_depth(const Scene& scene, const RenderOptions& opts) {
  const Camera& cam = scene.camera();
  DepthObservation obs;
  obs.width = cam.width;
  obs.height = cam.height;
  const std::size_t npix = static_cast<std::size_t>(cam.width) * cam.height;
  obs.depth.assign(npix, 0.0f);
  obs.entity.assign(npix, DepthObservation::kNoReturn);

  // Pixel rectangle covered by each instance's bounding box.
  struct Rect {
    int u0, u1, v0, v1;
  };
  std::vector<Rect> rects;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Aabb b = scene.world(i).bounds();
    Rect r{cam.width, -1, cam.height, -1};
    bool behind = false;
    for (int c = 0; c < 8; ++c) {
      const Vec3 p((c & 1) ? b.hi.x() : b.lo.x(), (c & 2) ? b.hi.y() : b.lo.y(),
                   (c & 4) ? b.hi.z() : b.lo.z());
      const Eigen::Vector3d px = cam.project(p);
      if (px.z() <= 1e-6) {
        behind = true;
        break;
      }
      r.u0 = std::min(r.u0, static_cast<int>(std::floor(px.x())) - 1);
      r.u1 = std::max(r.u1, static_cast<int>(std::ceil(px.x())) + 1);
      r.v0 = std::min(r.v0, static_cast<int>(std::floor(px.y())) - 1);
      r.v1 = std::max(r.v1, static_cast<int>(std::ceil(px.y())) + 1);
    }
    if (behind) r = Rect{0, cam.width - 1, 0, cam.height - 1};
    rects.push_back(r);
  }

  const Vec3 origin = cam.position();
  const Vec3 forward = cam.pose.rotate(Vec3::UnitZ());
  Rng rng(opts.seed);
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Vec3 dir = cam.ray_direction(u, v);
      double best = std::numeric_limits<double>::infinity();
      int entity = DepthObservation::kNoReturn;
      std::optional<RayHit> best_hit;
      if (dir.z() < 0 && origin.z() > 0) {
        best = -origin.z() / dir.z();
        entity = kTableEntity;
      }
      for (std::size_t i = 0; i < scene.size(); ++i) {
        const Rect& r = rects[i];
        if (u < r.u0 || u > r.u1 || v < r.v0 || v > r.v1) continue;
        const auto hit = scene.world(i).ray_cast(origin, dir, best);
        if (hit && hit->distance < best) {
          best = hit->distance;
          entity = scene.instances()[i].object_id;
          best_hit = hit;
        }
      }
      if (entity == DepthObservation::kNoReturn) continue;
      const double cos_f = dir.dot(forward);
      double z = best * cos_f;
      if (opts.depth_noise > 0) z += opts.depth_noise * rng.normal();
      if (z <= 0) continue;
      const std::size_t pix = static_cast<std::size_t>(v) * cam.width + u;
      obs.depth[pix] = static_cast<float>(z);
      obs.entity[pix] = entity;
      if (entity == kTableEntity) continue;
      obs.cloud.push_back({origin + dir * (z / cos_f), best_hit->normal, entity});
      obs.pixel.push_back(static_cast<int>(pix));
    }
  }
  return obs;
}

std::vector<CloudPoint> render_partial_cloud(const Scene& scene, const RenderOptions& opts) {
  return render_depth(scene, opts).cloud;
}

void estimate_normals(DepthObservation& obs, const Camera& camera, int window, double radius) {
  std::vector<int> cloud_at(static_cast<std::size_t>(obs.width) * obs.height, -1);
  for (std::size_t k = 0; k < obs.pixel.size(); ++k) cloud_at[obs.pixel[k]] = static_cast<int>(k);
  const Vec3 eye = camera.position();
  std::vector<Vec3> normals(obs.cloud.size());
  for (std::size_t k = 0; k < obs.cloud.size(); ++k) {
    const Vec3& p = obs.cloud[k].point;
    const int u = obs.pixel[k] % obs.width;
    const int v = obs.pixel[k] / obs.width;
    Vec3 mean = Vec3::Zero();
    std::vector<Vec3> nb;
    for (int dv = -window; dv <= window; ++dv) {
      for (int du = -window; du <= window; ++du) {
        const int uu = u + du;
        const int vv = v + dv;
        if (uu < 0 || vv < 0 || uu >= obs.width || vv >= obs.height) continue;
        const int j = cloud_at[static_cast<std::size_t>(vv) * obs.width + uu];
        if (j < 0 || (obs.cloud[j].point - p).norm() > radius) continue;
        nb.push_back(obs.cloud[j].point);
        mean += obs.cloud[j].point;
      }
    }
    Vec3 n = obs.cloud[k].normal;
    if (nb.size() >= 3) {
      mean /= static_cast<double>(nb.size());
      Mat3 cov = Mat3::Zero();
      for (const Vec3& q : nb) cov += (q - mean) * (q - mean).transpose();
      const Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
      n = es.eigenvectors().col(0);
    }
    if (n.dot(eye - p) < 0) n = -n;
    normals[k] = n.normalized();
  }
  for (std::size_t k = 0; k < obs.cloud.size(); ++k) obs.cloud[k].normal = normals[k];
}

}  // namespace graspkit
