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

#include "graspkit/geometry.hpp"

namespace graspkit {

/// Reconstruction error model. Each axis draws from its own random stream,
/// so changing one sigma leaves the draws of the other axes untouched and a
/// sweep over sigma reuses the same standardized draws.
struct PerturbationSpec {
  double rot_sigma_deg = 0.0;
  double trans_sigma = 0.0;
  /// Standard deviation of ln(scale).
  double scale_sigma = 0.0;
  /// Standard deviation of vertex displacement along the vertex normal (m).
  double shape_jitter = 0.0;
  int smooth_iters = 0;
  double smooth_lambda = 0.5;

  void validate() const;
  bool is_zero() const;
};

struct Reconstruction {
  TriMesh mesh;
  RigidPose pose;
  double scale = 1.0;
};

/// pose' = pose * dP with dP a rotation of |N(0, rot_sigma)| about a uniform
/// axis and an N(0, trans_sigma) translation; scale' = exp(N(0, scale_sigma));
/// mesh' = Laplacian smoothing followed by normal jitter.
Reconstruction perturb_reconstruction(const TriMesh& mesh, const RigidPose& pose,
                                      const PerturbationSpec& spec, std::uint64_t seed);

/// Uniform-weight Laplacian smoothing: v += lambda (mean(neighbours) - v).
TriMesh laplacian_smooth(const TriMesh& mesh, int iterations, double lambda = 0.5);

struct ChamferOptions {
  std::size_t n_samples = 2000;
  std::uint64_t seed = 0;
  /// Try principal-axis alignments in addition to the identity before ICP.
  bool principal_axes = true;
  int icp_iterations = 15;
  std::size_t icp_points = 200;
};

/// Shape-only distance. Both meshes are centred on their surface centroid
/// and scaled to unit bounding radius, rigidly aligned by ICP, and compared
/// by the mean of the two directed point-to-surface distances. The smaller
/// of the two alignment directions is reported, which makes the result
/// symmetric in (a, b).
double chamfer_distance(const TriMesh& a, const TriMesh& b, const ChamferOptions& opts = {});

enum class FailureLabel { None, Shape, Scale, Pose };

const char* to_string(FailureLabel label);

struct FailureThresholds {
  double tau_shape = 0.01;
  double tau_scale = 0.05;
  double tau_rot_deg = 5.0;
  double tau_trans = 0.005;

  void validate() const;
};

struct FailureAttribution {
  FailureLabel label = FailureLabel::None;
  double shape_error = 0.0;
  /// |ln(scale_est / scale_gt)|
  double scale_error = 0.0;
  double rotation_error_deg = 0.0;
  double translation_error = 0.0;
};

/// Shape, then scale, then pose: the first violated test names the cause.
FailureAttribution classify_failure(const TriMesh& gt_mesh, const RigidPose& gt_pose,
                                    double gt_scale, const Reconstruction& est,
                                    const FailureThresholds& thresholds,
                                    const ChamferOptions& chamfer = {});

}  // namespace graspkit
