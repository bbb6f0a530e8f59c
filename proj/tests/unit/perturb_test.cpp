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

#include <gtest/gtest.h>

#include <cmath>

#include "graspkit/perturb.hpp"
#include "graspkit/primitives.hpp"
#include "graspkit/rng.hpp"

namespace graspkit {
namespace {

const RigidPose kPose(Quat(Eigen::AngleAxisd(0.4, Vec3(0, 0, 1))), {0.1, 0.2, 0.03});

TEST(Perturb, ZeroSpecIsIdentity) {
  const TriMesh m = make_box({0.04, 0.05, 0.06});
  const Reconstruction r = perturb_reconstruction(m, kPose, {}, 3);
  EXPECT_EQ(r.mesh.vertices(), m.vertices());
  EXPECT_EQ(r.mesh.faces(), m.faces());
  EXPECT_EQ(r.pose.translation, kPose.translation);
  EXPECT_EQ(r.pose.rotation.coeffs(), kPose.rotation.coeffs());
  EXPECT_EQ(r.scale, 1.0);
}

TEST(Perturb, ScaleOnlyTouchesScale) {
  const TriMesh m = make_cylinder(0.02, 0.05);
  PerturbationSpec s;
  s.scale_sigma = 0.1;
  const Reconstruction r = perturb_reconstruction(m, kPose, s, 3);
  EXPECT_EQ(r.mesh.vertices(), m.vertices());
  EXPECT_EQ(r.pose.translation, kPose.translation);
  EXPECT_EQ(r.pose.rotation.coeffs(), kPose.rotation.coeffs());
  EXPECT_NE(r.scale, 1.0);
}

TEST(Perturb, ShapeKeepsTopology) {
  const TriMesh m = make_icosphere(0.03, 2);
  PerturbationSpec s;
  s.shape_jitter = 0.002;
  s.smooth_iters = 2;
  const Reconstruction r = perturb_reconstruction(m, kPose, s, 3);
  EXPECT_EQ(r.mesh.num_vertices(), m.num_vertices());
  EXPECT_EQ(r.mesh.faces(), m.faces());
  EXPECT_NE(r.mesh.vertices(), m.vertices());
}

TEST(Perturb, RotationMagnitudeIsHalfNormal) {
  const TriMesh m = make_box(Vec3::Constant(0.01));
  PerturbationSpec s;
  s.rot_sigma_deg = 7.0;
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Reconstruction r = perturb_reconstruction(m, kPose, s, 1000 + i);
    sum += rad2deg(rotation_distance(r.pose.rotation, kPose.rotation));
  }
  const double expect = 7.0 * std::sqrt(2.0 / kPi);
  EXPECT_NEAR(sum / n, expect, 0.05 * expect);
}

TEST(Perturb, TranslationIsIsotropicGaussian) {
  const TriMesh m = make_box(Vec3::Constant(0.01));
  PerturbationSpec s;
  s.trans_sigma = 0.004;
  const int n = 10000;
  Vec3 sum = Vec3::Zero();
  Vec3 sq = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const Reconstruction r = perturb_reconstruction(m, RigidPose::identity(), s, 5000 + i);
    sum += r.pose.translation;
    sq += r.pose.translation.cwiseProduct(r.pose.translation);
  }
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(sum[k] / n, 0.0, 4 * 0.004 / std::sqrt(n));
    EXPECT_NEAR(std::sqrt(sq[k] / n), 0.004, 0.05 * 0.004);
  }
}

TEST(Perturb, DeterministicAndSeedsIndependent) {
  const TriMesh m = make_box(Vec3::Constant(0.01));
  PerturbationSpec s;
  s.trans_sigma = 0.01;
  s.scale_sigma = 0.1;
  const Reconstruction a = perturb_reconstruction(m, kPose, s, 77);
  const Reconstruction b = perturb_reconstruction(m, kPose, s, 77);
  EXPECT_EQ(a.pose.translation, b.pose.translation);
  EXPECT_EQ(a.scale, b.scale);

  const int n = 10000;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = std::log(perturb_reconstruction(m, kPose, s, 2 * i).scale);
    y[i] = std::log(perturb_reconstruction(m, kPose, s, 2 * i + 1).scale);
  }
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 0.05);
}

TEST(Perturb, AxesUseSeparateStreams) {
  const TriMesh m = make_box(Vec3::Constant(0.01));
  PerturbationSpec a;
  a.trans_sigma = 0.003;
  PerturbationSpec b = a;
  b.rot_sigma_deg = 5.0;
  b.scale_sigma = 0.2;
  const Reconstruction ra = perturb_reconstruction(m, RigidPose::identity(), a, 9);
  const Reconstruction rb = perturb_reconstruction(m, RigidPose::identity(), b, 9);
  EXPECT_EQ(ra.pose.translation, rb.pose.translation);
  EXPECT_NE(ra.pose.rotation.coeffs(), rb.pose.rotation.coeffs());
}

TEST(Perturb, NegativeSigmaRejected) {
  PerturbationSpec s;
  s.rot_sigma_deg = -1;
  EXPECT_THROW(s.validate(), Error);
}

TEST(LaplacianSmooth, ShrinksSphereKeepsCounts) {
  const TriMesh m = make_icosphere(0.05, 2);
  const TriMesh s = laplacian_smooth(m, 5, 0.5);
  EXPECT_EQ(s.num_vertices(), m.num_vertices());
  double mean = 0.0;
  for (const Vec3& v : s.vertices()) mean += v.norm() / s.num_vertices();
  EXPECT_LT(mean, 0.05);
  EXPECT_GT(mean, 0.04);
  EXPECT_EQ(laplacian_smooth(m, 0).vertices(), m.vertices());
}

TEST(Chamfer, SelfIsZero) {
  const TriMesh m = make_capsule(0.02, 0.04);
  EXPECT_NEAR(chamfer_distance(m, m), 0.0, 1e-9);
}

TEST(Chamfer, ScaleNormalized) {
  const TriMesh m = make_icosphere(0.03, 3);
  EXPECT_NEAR(chamfer_distance(m, transform(m, RigidPose::identity(), 2.0)), 0.0, 1e-9);
}

TEST(Chamfer, InvariantToRigidMotionAndSymmetric) {
  const TriMesh a = make_box({0.03, 0.05, 0.08});
  const TriMesh b = make_cylinder(0.025, 0.07);
  const RigidPose p(Quat(Eigen::AngleAxisd(0.9, Vec3(1, -2, 0.5).normalized())), {0.3, 0.1, 0.2});
  const double ab = chamfer_distance(a, b);
  EXPECT_GT(ab, 0.01);
  EXPECT_DOUBLE_EQ(ab, chamfer_distance(b, a));
  EXPECT_NEAR(chamfer_distance(transform(a, p, 1.7), b), ab, 0.05 * ab);
}

TEST(Chamfer, SphereVersusCubeStableAcrossSeeds) {
  const TriMesh sphere = make_icosphere(1.0, 3);
  const TriMesh cube = make_box(Vec3::Constant(2.0 / std::sqrt(3.0)), 4);
  std::vector<double> d;
  for (const std::uint64_t seed : {1, 2, 3}) {
    ChamferOptions o;
    o.n_samples = 20000;
    o.seed = seed;
    d.push_back(chamfer_distance(sphere, cube, o));
  }
  EXPECT_GT(d[0], 0.0);
  for (const double v : d) EXPECT_NEAR(v, d[0], 0.05 * d[0]);
}

TEST(Classify, ExactIsNone) {
  const TriMesh m = make_box({0.04, 0.05, 0.06});
  const Reconstruction est{m, kPose, 1.0};
  EXPECT_EQ(classify_failure(m, kPose, 1.0, est, {}).label, FailureLabel::None);
}

TEST(Classify, ScaleOneAndAHalf) {
  const TriMesh m = make_box({0.04, 0.05, 0.06});
  FailureThresholds th;
  th.tau_scale = 0.1;
  const FailureAttribution a = classify_failure(m, kPose, 1.0, {m, kPose, 1.5}, th);
  EXPECT_EQ(a.label, FailureLabel::Scale);
  EXPECT_NEAR(a.scale_error, std::log(1.5), 1e-12);
}

TEST(Classify, PrecedenceShapeScalePose) {
  const TriMesh m = make_box({0.04, 0.05, 0.06});
  const TriMesh wrong = make_icosphere(0.04, 2);
  RigidPose moved = kPose;
  moved.translation.x() += 0.02;
  EXPECT_EQ(classify_failure(m, kPose, 1.0, {wrong, moved, 1.5}, {}).label, FailureLabel::Shape);
  EXPECT_EQ(classify_failure(m, kPose, 1.0, {m, moved, 1.5}, {}).label, FailureLabel::Scale);
  EXPECT_EQ(classify_failure(m, kPose, 1.0, {m, moved, 1.0}, {}).label, FailureLabel::Pose);
  RigidPose turned = kPose;
  turned.rotation = kPose.rotation * Quat(Eigen::AngleAxisd(deg2rad(8), Vec3::UnitX()));
  EXPECT_EQ(classify_failure(m, kPose, 1.0, {m, turned, 1.0}, {}).label, FailureLabel::Pose);
}

TEST(Classify, LabelsNamed) {
  EXPECT_STREQ(to_string(FailureLabel::None), "none");
  EXPECT_STREQ(to_string(FailureLabel::Shape), "shape");
  EXPECT_STREQ(to_string(FailureLabel::Scale), "scale");
  EXPECT_STREQ(to_string(FailureLabel::Pose), "pose");
}

}  // namespace
}  // namespace graspkit
