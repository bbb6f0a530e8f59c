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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graspkit/config.hpp"
#include "graspkit/eval.hpp"
#include "graspkit/perturb.hpp"

namespace graspkit {

/// Reconstructed counterpart of a ground-truth scene, one entry per instance.
struct ReconstructedScene {
  Scene scene;
  std::vector<Reconstruction> parts;
  /// Present when the reconstruction was perturbed.
  std::vector<std::optional<FailureAttribution>> attribution;
};

/// Exact copy when `spec` is empty, otherwise each instance is perturbed
/// with a stream derived from `seeds` and its object id. With remeshing on,
/// every reconstruction is re-extracted from its SDF by marching cubes.
ReconstructedScene reconstruct_scene(const Scene& gt, const PerturbationSpec* spec,
                                     const RunConfig& cfg, const SeedTree& seeds);

/// Per-object antipodal sampling on every instance of `scene`.
GraspSet sample_scene(const Scene& scene, const RunConfig& cfg, const SeedTree& seeds);

/// Partial-view sampling on the whole observed cloud, capped per object.
GraspSet sample_partial_view(const DepthObservation& obs, const Camera& camera, std::size_t objects,
                             const RunConfig& cfg, std::uint64_t seed);

std::vector<CatalogEntry> load_catalog(const RunConfig& cfg);

struct CellKey {
  std::string study;
  std::string generator;
  int clutter = 0;
  std::string perturbation;
};

struct GraspRecord {
  int scene = 0;
  int grasp_id = 0;
  double score = 0.0;
  GraspOutcome outcome;
  std::optional<FailureAttribution> attribution;
};

struct CellResult {
  CellKey key;
  std::size_t scenes = 0;
  std::uint64_t seed = 0;
  MetricsReport metrics;
  std::vector<GraspRecord> records;
};

struct BenchmarkResult {
  std::vector<CellResult> cells;
};

struct BenchmarkOptions {
  int jobs = 1;
  bool grid = true;
  bool sweep = true;
  bool external = true;
  std::function<void(const std::string&)> progress;
};

BenchmarkResult run_benchmark(const RunConfig& cfg, const BenchmarkOptions& opts = {});

/// report.csv, summary.json, grasps.csv, plot_stacked.csv and
/// failure_fractions.csv. Only report.csv carries wall-clock times.
void write_reports(const BenchmarkResult& result, const RunConfig& cfg,
                   const std::filesystem::path& dir);

/// Names of the timing columns in report.csv.
const std::vector<std::string>& timing_columns();

}  // namespace graspkit
