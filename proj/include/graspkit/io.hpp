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

#include <filesystem>
#include <string>

#include "graspkit/antipodal.hpp"
#include "graspkit/geometry.hpp"
#include "graspkit/scene.hpp"

namespace graspkit {

/// OBJ (v / f records, 1-based, polygons fan-split) or ASCII PLY, chosen by
/// extension. Coordinates are multiplied by `scale`. Throws with the line
/// number on malformed records and when no faces survive cleaning.
TriMesh load_mesh(const std::filesystem::path& path, double scale = 1.0);

/// Writes OBJ or ASCII PLY by extension with round-trip float formatting.
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path);

/// A primitive descriptor ("box:...", "sphere:...") or a mesh path resolved
/// against `base`.
TriMesh load_geometry(const std::string& source, const std::filesystem::path& base = {},
                      double scale = 1.0);

/// JSON Lines: a header object, then one object per grasp with position,
/// quaternion [w, x, y, z], width, score, source and object_id. Other keys
/// are carried through in Grasp::extras.
void write_grasp_set(const GraspSet& set, const std::filesystem::path& path);
GraspSet read_grasp_set(const std::filesystem::path& path);
std::string format_grasp_set(const GraspSet& set);
GraspSet parse_grasp_set(const std::string& text);

/// JSON scene description. Mesh entries are primitive descriptors or paths
/// relative to the scene file.
void write_scene(const Scene& scene, const std::filesystem::path& path);
Scene read_scene(const std::filesystem::path& path);

/// Text header (origin, voxel_size, dims, sign, data file) plus little-endian
/// float32 samples with x fastest. `positive-inside` fields are negated.
ScalarField read_sdf(const std::filesystem::path& header);
void write_sdf(const ScalarField& field, const std::filesystem::path& header);

/// Depth as little-endian uint16 millimetres (0 = no return) with a text
/// header next to it.
void write_depth(const DepthObservation& obs, const Camera& camera,
                 const std::filesystem::path& header);

std::string read_text(const std::filesystem::path& path);
/// Writes via a temporary file and rename.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace graspkit
