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

#include "graspkit/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "graspkit/bvh.hpp"
#include "graspkit/rng.hpp"

namespace graspkit {

void PerturbationSpec::validate() const {
  if (!(rot_sigma_deg >= 0 && trans_sigma >= 0 && scale_sigma >= 0 && shape_jitter >= 0)) {
    throw Error("perturbation sigmas must be non-negative");
  }
  if (smooth_iters < 0) throw Error("smooth_iters must be non-negative");
  if (!(smooth_lambda >= 0 && smooth_lambda <= 1)) throw Error("smooth_lambda must be in [0, 1]");
}

bool PerturbationSpec::is_zero() const {
  return rot_sigma_deg == 0 && trans_sigma == 0 && scale_sigma == 0 && shape_jitter == 0 &&
         smooth_iters == 0;
}

TriMesh laplacian_smooth(const TriMesh& mesh, int iterations, double lambda) {
  if (iterations <= 0) return mesh;
  const std::size_t nv = mesh.num_vertices();
  std::vector<std::vector<int>> nbr(nv);
  for (const Face& f : mesh.faces()) {
    for (int k = 0; k < 3; ++k) {
      nbr[f[k]].push_back(f[(k + 1) % 3]);
      nbr[f[k]].push_back(f[(k + 2) % 3]);
    }
  }
  for (auto& n : nbr) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  std::vector<Vec3> v = mesh.vertices();
  std::vector<Vec3> next(nv);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < nv; ++i) {
      if (nbr[i].empty()) {
        next[i] = v[i];
        continue;
      }
      Vec3 mean = Vec3::Zero();
      for (const int j : nbr[i]) mean += v[j];
      mean /= static_cast<double>(nbr[i].size());
      next[i] = v[i] + lambda * (mean - v[i]);
    }
    v.swap(next);
  }
  return TriMesh(std::move(v), mesh.faces());
}

Reconstruction perturb_reconstruction(const TriMesh& mesh, const RigidPose& pose,
                                      const PerturbationSpec& spec, std::uint64_t seed) {
  spec.validate();
  const SeedTree root(seed);

  RigidPose delta;
  {
    Rng rng = root.child("rotation").rng();
    const Vec3 axis = rng.unit_vector();
    const double angle = std::abs(rng.normal()) * deg2rad(spec.rot_sigma_deg);
    if (angle > 0) delta.rotation = Quat(Eigen::AngleAxisd(angle, axis));
  }
  {
    Rng rng = root.child("translation").rng();
    Vec3 t;
    for (int k = 0; k < 3; ++k) t[k] = rng.normal();
    if (spec.trans_sigma > 0) delta.translation = spec.trans_sigma * t;
  }
  double scale = 1.0;
  {
    Rng rng = root.child("scale").rng();
    const double z = rng.normal();
    if (spec.scale_sigma > 0) scale = std::exp(spec.scale_sigma * z);
  }

  Reconstruction out;
  out.pose = pose * delta;
  out.scale = scale;
  if (spec.smooth_iters == 0 && spec.shape_jitter == 0) {
    out.mesh = mesh;
    return out;
  }
  TriMesh smooth = laplacian_smooth(mesh, spec.smooth_iters, spec.smooth_lambda);
  if (spec.shape_jitter > 0) {
    Rng rng = root.child("shape").rng();
    const std::vector<Vec3> normals = vertex_normals(smooth);
    std::vector<Vec3> v = smooth.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += spec.shape_jitter * rng.normal() * normals[i];
    smooth = TriMesh(std::move(v), smooth.faces());
  }
  out.mesh = std::move(smooth);
  return out;
}

namespace {

/// Mesh centred on its surface centroid and scaled to unit bounding radius.
TriMesh normalized(const TriMesh& mesh) {
  if (mesh.empty()) throw Error("empty geometry");
  Vec3 c = Vec3::Zero();
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const double a = mesh.areas()[f];
    c += a * (mesh.corner(f, 0) + mesh.corner(f, 1) + mesh.corner(f, 2)) / 3.0;
    total += a;
  }
  c /= total;
  const double r = bounding_radius(mesh, c);
  return transform(mesh, RigidPose(Quat::Identity(), -c / r), 1.0 / r);
}

Mat3 principal_axes(const std::vector<Vec3>& pts) {
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : pts) cov += (p - mean) * (p - mean).transpose();
  const Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  Mat3 r = es.eigenvectors();
  if (r.determinant() < 0) r.col(0) = -r.col(0);
  return r;
}

double mean_distance(const std::vector<Vec3>& pts, const MeshBvh& target, const RigidPose& pose) {
  double sum = 0.0;
  for (const Vec3& p : pts) sum += target.closest_point(pose.apply(p)).distance;
  return sum / static_cast<double>(pts.size());
}

/// Point-to-point ICP of `src` samples onto the `target` surface.
RigidPose icp(const std::vector<Vec3>& src, const MeshBvh& target, RigidPose pose, int iterations) {
  for (int it = 0; it < iterations; ++it) {
    Vec3 ms = Vec3::Zero();
    Vec3 mt = Vec3::Zero();
    std::vector<Vec3> moved(src.size());
    std::vector<Vec3> matched(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
      moved[i] = pose.apply(src[i]);
      matched[i] = target.closest_point(moved[i]).point;
      ms += moved[i];
      mt += matched[i];
    }
    ms /= static_cast<double>(src.size());
    mt /= static_cast<double>(src.size());
    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) h += (moved[i] - ms) * (matched[i] - mt).transpose();
    const Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixV() * svd.matrixU().transpose();
    if (r.determinant() < 0) {
      Mat3 v = svd.matrixV();
      v.col(2) = -v.col(2);
      r = v * svd.matrixU().transpose();
    }
    const RigidPose step = RigidPose::from_matrix(r, mt - r * ms);
    pose = step * pose;
    if (step.translation.norm() < 1e-9 && rotation_distance(step.rotation, Quat::Identity()) < 1e-9) {
      break;
    }
  }
  return pose;
}

/// Aligns `src` onto `dst` and returns the symmetric mean distance.
double aligned_distance(const std::vector<Vec3>& src_pts, const MeshBvh& src,
                        const std::vector<Vec3>& dst_pts, const MeshBvh& dst,
                        const ChamferOptions& opts) {
  std::vector<Vec3> subset;
  const std::size_t stride = std::max<std::size_t>(1, src_pts.size() / std::max<std::size_t>(1, opts.icp_points));
  for (std::size_t i = 0; i < src_pts.size(); i += stride) subset.push_back(src_pts[i]);

  std::vector<RigidPose> starts{RigidPose::identity()};
  if (opts.principal_axes) {
    const Mat3 ps = principal_axes(src_pts);
    const Mat3 pd = principal_axes(dst_pts);
    for (int s = 0; s < 4; ++s) {
      Mat3 flip = Mat3::Identity();
      if (s & 1) flip(0, 0) = flip(2, 2) = -1;
      if (s & 2) flip(1, 1) = flip(2, 2) = -1;
      starts.push_back(RigidPose::from_matrix(pd * flip * ps.transpose(), Vec3::Zero()));
    }
  }
  RigidPose best_pose;
  double best = std::numeric_limits<double>::infinity();
  for (const RigidPose& s : starts) {
    const RigidPose p = icp(subset, dst, s, opts.icp_iterations);
    const double d = mean_distance(subset, dst, p);
    if (d < best) {
      best = d;
      best_pose = p;
    }
  }
  const double forward = mean_distance(src_pts, dst, best_pose);
  const double backward = mean_distance(dst_pts, src, best_pose.inverse());
  return 0.5 * (forward + backward);
}

}  // namespace

double chamfer_distance(const TriMesh& a, const TriMesh& b, const ChamferOptions& opts) {
  if (opts.n_samples == 0) throw Error("chamfer needs at least one sample");
  const MeshBvh ba(std::make_shared<const TriMesh>(normalized(a)));
  const MeshBvh bb(std::make_shared<const TriMesh>(normalized(b)));
  auto points = [&](const MeshBvh& m) {
    std::vector<Vec3> pts;
    for (const SurfaceSample& s : surface_sample(m.mesh(), opts.n_samples, opts.seed)) {
      pts.push_back(s.point);
    }
    return pts;
  };
  const std::vector<Vec3> pa = points(ba);
  const std::vector<Vec3> pb = points(bb);
  return std::min(aligned_distance(pa, ba, pb, bb, opts), aligned_distance(pb, bb, pa, ba, opts));
}

const char* to_string(FailureLabel label) {
  switch (label) {
    case FailureLabel::None:
      return "none";
    case FailureLabel::Shape:
      return "shape";
    case FailureLabel::Scale:
      return "scale";
    case FailureLabel::Pose:
      return "pose";
  }
  return "none";
}

void FailureThresholds::validate() const {
  if (!(tau_shape >= 0 && tau_scale >= 0 && tau_rot_deg >= 0 && tau_trans >= 0)) {
    throw Error("failure thresholds must be non-negative");
  }
}

FailureAttribution classify_failure(const TriMesh& gt_mesh, const RigidPose& gt_pose,
                                    double gt_scale, const Reconstruction& est,
                                    const FailureThresholds& th, const ChamferOptions& chamfer) {
  th.validate();
  if (!(gt_scale > 0 && est.scale > 0)) throw Error("scale must be positive");
  FailureAttribution out;
  out.shape_error = chamfer_distance(gt_mesh, est.mesh, chamfer);
  out.scale_error = std::abs(std::log(est.scale / gt_scale));
  out.rotation_error_deg = rad2deg(rotation_distance(gt_pose.rotation, est.pose.rotation));
  out.translation_error = (gt_pose.translation - est.pose.translation).norm();
  if (out.shape_error > th.tau_shape) {
    out.label = FailureLabel::Shape;
  } else if (out.scale_error > th.tau_scale) {
    out.label = FailureLabel::Scale;
  } else if (out.rotation_error_deg > th.tau_rot_deg || out.translation_error > th.tau_trans) {
    out.label = FailureLabel::Pose;
  }
  return out;
}

}  // namespace graspkit
