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

#include <string>

#include "graspkit/geometry.hpp"

namespace graspkit {

// Closed, outward-wound meshes centered on the origin.

/// Axis-aligned box with `subdivisions` quads per face edge.
TriMesh make_box(const Vec3& size, int subdivisions = 1);
TriMesh make_icosphere(double radius, int subdivisions = 3);
/// Cylinder along z.
TriMesh make_cylinder(double radius, double height, int segments = 32, int stacks = 4);
/// Capsule along z; `length` is the cylindrical part only.
TriMesh make_capsule(double radius, double length, int segments = 24, int rings = 6);

/// Parses "box:sx,sy,sz", "sphere:r", "cylinder:r,h" or "capsule:r,l".
/// Returns false when `spec` does not name a primitive.
bool parse_primitive(const std::string& spec, TriMesh& out);

}  // namespace graspkit
