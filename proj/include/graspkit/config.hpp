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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "graspkit/antipodal.hpp"
#include "graspkit/eval.hpp"
#include "graspkit/perturb.hpp"
#include "graspkit/scene.hpp"

namespace graspkit {

struct PartialViewSettings {
  double depth_noise = 0.0;
  double tube_radius = 0.003;
  double min_separation = 0.005;
  bool estimate_normals = true;
  int normal_window = 2;
  double normal_radius = 0.01;
};

struct ReconstructionSettings {
  /// Re-extract reconstructions with marching cubes on their SDF.
  bool remesh = false;
  double voxel = 0.005;
};

struct NamedPerturbation {
  std::string name;
  PerturbationSpec spec;
};

struct GridStudy {
  std::vector<int> clutter{1, 5, 10};
  int scenes = 20;
  std::vector<std::string> generators{"modular-exact", "partial-view"};
  std::vector<NamedPerturbation> perturbations;
};

/// One-axis-at-a-time sweep. Every axis shares the scenes and the random
/// draws, only the sigma changes.
struct SweepStudy {
  bool enabled = false;
  int seeds = 20;
  int clutter = 5;
  std::string generator = "modular-perturbed";
  std::vector<double> rot_sigma_deg;
  std::vector<double> trans_sigma;
  std::vector<double> scale_sigma;
  std::vector<double> shape_jitter;
};

struct ExternalStudy {
  std::string scene;
  std::string grasps;
  std::vector<std::string> generators{"external-file", "filtered-external"};
};

/// Camera on a sphere around the table centre looking at it.
struct CameraSettings {
  double fx = 600.0;
  double fy = 600.0;
  double cx = 319.5;
  double cy = 239.5;
  int width = 640;
  int height = 480;
  double elevation_deg = 45.0;
  double azimuth_deg = -90.0;
  double distance = 0.7;

  Camera build() const;
};

struct RunConfig {
  std::uint64_t seed = 7;
  std::vector<std::string> objects;
  double object_scale = 1.0;
  GripperSpec gripper;
  EvalParams contact;
  SamplerOptions sampler;
  FilterPolicy filter;
  PartialViewSettings partial_view;
  double placement_radius = 0.12;
  double mu_table = 0.5;
  CameraSettings camera;
  ReconstructionSettings reconstruction;
  FailureThresholds failure;
  ChamferOptions chamfer;
  GridStudy grid;
  SweepStudy sweep;
  std::optional<ExternalStudy> external;
  std::string out = "out";
  /// Directory relative paths are resolved against.
  std::filesystem::path base_dir;
};

/// The default desk-scale configuration.
RunConfig default_config();

/// Parses JSON text. Unknown keys and wrong types are errors.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Checks ranges, generator names and that every referenced file exists.
void validate_config(const RunConfig& cfg);

/// Fully resolved configuration as JSON text (`indent` < 0 for one line).
std::string config_to_json(const RunConfig& cfg, int indent = 2);

std::filesystem::path resolve_path(const RunConfig& cfg, const std::string& p);

SettleOptions settle_options(const RunConfig& cfg);

inline const std::vector<std::string>& known_generators() {
  static const std::vector<std::string> names{"modular-exact",        "modular-perturbed",
                                              "partial-view",         "filtered-partial-view",
                                              "external-file",        "filtered-external"};
  return names;
}

}  // namespace graspkit
