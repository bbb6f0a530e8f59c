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

#include "graspkit/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "graspkit/primitives.hpp"

namespace graspkit {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

namespace {

std::string lower_extension(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

[[noreturn]] void fail_at(const fs::path& path, std::size_t line, const std::string& what) {
  throw Error(fmt::format("{}:{}: {}", path.string(), line, what));
}

double parse_double(const std::string& tok, const fs::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size() || !std::isfinite(v)) throw Error("");
    return v;
  } catch (const std::exception&) {
    fail_at(path, line, "bad number '" + tok + "'");
  }
}

long parse_long(const std::string& tok, const fs::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size()) throw Error("");
    return v;
  } catch (const std::exception&) {
    fail_at(path, line, "bad index '" + tok + "'");
  }
}

TriMesh load_obj(const fs::path& path, double scale) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      std::string x, y, z;
      if (!(ss >> x >> y >> z)) fail_at(path, lineno, "vertex needs 3 coordinates");
      verts.emplace_back(parse_double(x, path, lineno) * scale, parse_double(y, path, lineno) * scale,
                         parse_double(z, path, lineno) * scale);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ss >> tok) {
        const long v = parse_long(tok.substr(0, tok.find('/')), path, lineno);
        const long resolved = v < 0 ? static_cast<long>(verts.size()) + v : v - 1;
        if (v == 0 || resolved < 0 || resolved >= static_cast<long>(verts.size())) {
          fail_at(path, lineno, "face index out of range");
        }
        idx.push_back(static_cast<int>(resolved));
      }
      if (idx.size() < 3) fail_at(path, lineno, "face needs at least 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  return TriMesh(std::move(verts), std::move(faces));
}

TriMesh load_ply(const fs::path& path, double scale) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) fail_at(path, lineno, "unexpected end of file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  next_line();
  if (line != "ply") fail_at(path, lineno, "missing ply magic");

  struct Element {
    std::string name;
    long count = 0;
    std::vector<std::string> props;
  };
  std::vector<Element> elements;
  for (;;) {
    next_line();
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "end_header") break;
    if (tag == "format") {
      std::string fmt_name;
      ss >> fmt_name;
      if (fmt_name != "ascii") fail_at(path, lineno, "only ASCII PLY is supported");
    } else if (tag == "element") {
      Element e;
      std::string count;
      ss >> e.name >> count;
      e.count = parse_long(count, path, lineno);
      elements.push_back(e);
    } else if (tag == "property") {
      if (elements.empty()) fail_at(path, lineno, "property before element");
      std::vector<std::string> words;
      std::string w;
      while (ss >> w) words.push_back(w);
      if (words.empty()) fail_at(path, lineno, "empty property");
      elements.back().props.push_back(words.back());
    } else if (tag != "comment" && tag != "obj_info" && !tag.empty()) {
      fail_at(path, lineno, "unknown header record '" + tag + "'");
    }
  }

  std::vector<Vec3> verts;
  std::vector<Face> faces;
  for (const Element& e : elements) {
    for (long r = 0; r < e.count; ++r) {
      next_line();
      std::istringstream ss(line);
      std::vector<std::string> toks;
      std::string t;
      while (ss >> t) toks.push_back(t);
      if (e.name == "vertex") {
        Vec3 p = Vec3::Zero();
        int found = 0;
        for (std::size_t k = 0; k < e.props.size(); ++k) {
          const int axis = e.props[k] == "x" ? 0 : e.props[k] == "y" ? 1 : e.props[k] == "z" ? 2 : -1;
          if (axis < 0) continue;
          if (k >= toks.size()) fail_at(path, lineno, "vertex record too short");
          p[axis] = parse_double(toks[k], path, lineno) * scale;
          ++found;
        }
        if (found != 3) fail_at(path, lineno, "vertex needs x, y and z");
        verts.push_back(p);
      } else if (e.name == "face") {
        if (toks.empty()) fail_at(path, lineno, "empty face record");
        const long n = parse_long(toks[0], path, lineno);
        if (n < 3 || static_cast<long>(toks.size()) < n + 1) fail_at(path, lineno, "bad face record");
        std::vector<int> idx;
        for (long k = 1; k <= n; ++k) {
          const long v = parse_long(toks[k], path, lineno);
          if (v < 0 || v >= static_cast<long>(verts.size())) fail_at(path, lineno, "face index out of range");
          idx.push_back(static_cast<int>(v));
        }
        for (std::size_t k = 1; k + 1 < idx.size(); ++k) faces.push_back({idx[0], idx[k], idx[k + 1]});
      }
    }
  }
  return TriMesh(std::move(verts), std::move(faces));
}

}  // namespace

TriMesh load_mesh(const fs::path& path, double scale) {
  if (!(scale > 0)) throw Error("mesh scale must be positive");
  if (!fs::exists(path)) throw Error("missing mesh file " + path.string());
  const std::string ext = lower_extension(path);
  TriMesh mesh;
  if (ext == ".obj") {
    mesh = load_obj(path, scale);
  } else if (ext == ".ply") {
    mesh = load_ply(path, scale);
  } else {
    throw Error("unsupported mesh format " + path.string());
  }
  if (mesh.empty()) throw Error("no faces in " + path.string());
  return mesh;
}

void save_mesh(const TriMesh& mesh, const fs::path& path) {
  const std::string ext = lower_extension(path);
  std::string out;
  if (ext == ".obj") {
    out += "# graspkit mesh\n";
    for (const Vec3& v : mesh.vertices()) out += fmt::format("v {} {} {}\n", v.x(), v.y(), v.z());
    for (const Face& f : mesh.faces()) out += fmt::format("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1);
  } else if (ext == ".ply") {
    out += fmt::format(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\n"
        "property double z\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.num_vertices(), mesh.num_faces());
    for (const Vec3& v : mesh.vertices()) out += fmt::format("{} {} {}\n", v.x(), v.y(), v.z());
    for (const Face& f : mesh.faces()) out += fmt::format("3 {} {} {}\n", f[0], f[1], f[2]);
  } else {
    throw Error("unsupported mesh format " + path.string());
  }
  write_text(path, out);
}

TriMesh load_geometry(const std::string& source, const fs::path& base, double scale) {
  TriMesh mesh;
  if (parse_primitive(source, mesh)) {
    return scale == 1.0 ? mesh : transform(mesh, RigidPose::identity(), scale);
  }
  fs::path p(source);
  if (p.is_relative() && !base.empty()) p = base / p;
  return load_mesh(p, scale);
}

// ---------------------------------------------------------------------------
// Grasp records

namespace {

constexpr const char* kGraspFormat = "graspkit-grasps";

json grasp_to_json(const Grasp& g) {
  const Quat q = canonical(g.pose.rotation);
  json j;
  j["position"] = {g.pose.translation.x(), g.pose.translation.y(), g.pose.translation.z()};
  j["quaternion"] = {q.w(), q.x(), q.y(), q.z()};
  j["width"] = g.width;
  j["score"] = g.score;
  j["source"] = to_string(g.source);
  j["object_id"] = g.object_id;
  for (const auto& [k, raw] : g.extras) j[k] = json::parse(raw);
  return j;
}

std::array<double, 4> numbers(const json& j, const char* key, std::size_t n, std::size_t index) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_array() || it->size() != n) {
    throw Error(fmt::format("grasp {}: '{}' must be an array of {} numbers", index, key, n));
  }
  std::array<double, 4> out{};
  for (std::size_t k = 0; k < n; ++k) {
    if (!(*it)[k].is_number()) throw Error(fmt::format("grasp {}: '{}' must hold numbers", index, key));
    out[k] = (*it)[k].get<double>();
  }
  return out;
}

Grasp grasp_from_json(const json& j, std::size_t index) {
  if (!j.is_object()) throw Error(fmt::format("grasp {}: record is not an object", index));
  Grasp g;
  const auto p = numbers(j, "position", 3, index);
  const auto q = numbers(j, "quaternion", 4, index);
  Quat quat(q[0], q[1], q[2], q[3]);
  const double norm = quat.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-6) {
    throw Error(fmt::format("grasp {}: quaternion is not unit (norm {})", index, norm));
  }
  if (std::abs(norm - 1.0) > 1e-12) quat.normalize();
  g.pose = RigidPose(quat, Vec3(p[0], p[1], p[2]));
  if (!j.contains("width") || !j["width"].is_number()) {
    throw Error(fmt::format("grasp {}: missing width", index));
  }
  g.width = j["width"].get<double>();
  if (!(g.width > 0)) throw Error(fmt::format("grasp {}: width must be positive", index));
  g.score = j.value("score", 0.0);
  g.source = parse_grasp_source(j.value("source", std::string("external")));
  g.object_id = j.value("object_id", -1);
  for (const auto& [k, v] : j.items()) {
    if (k == "position" || k == "quaternion" || k == "width" || k == "score" || k == "source" ||
        k == "object_id") {
      continue;
    }
    g.extras.emplace_back(k, v.dump());
  }
  return g;
}

}  // namespace

std::string format_grasp_set(const GraspSet& set) {
  json header;
  header["format"] = kGraspFormat;
  header["version"] = 1;
  header["generator"] = set.generator;
  header["seed"] = set.seed;
  header["count"] = set.grasps.size();
  std::string out = header.dump() + "\n";
  for (const Grasp& g : set.grasps) out += grasp_to_json(g).dump() + "\n";
  return out;
}

GraspSet parse_grasp_set(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  GraspSet set;
  bool have_header = false;
  std::size_t index = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(fmt::format("grasp file line {}: {}", lineno, e.what()));
    }
    if (!have_header) {
      if (!j.is_object() || j.value("format", std::string()) != kGraspFormat) {
        throw Error("grasp file: missing graspkit-grasps header line");
      }
      if (j.value("version", 0) != 1) throw Error("grasp file: unsupported version");
      set.generator = j.value("generator", std::string());
      set.seed = j.value("seed", std::uint64_t{0});
      have_header = true;
      continue;
    }
    set.grasps.push_back(grasp_from_json(j, index++));
  }
  if (!have_header) throw Error("grasp file: missing graspkit-grasps header line");
  return set;
}

void write_grasp_set(const GraspSet& set, const fs::path& path) {
  write_text(path, format_grasp_set(set));
}

GraspSet read_grasp_set(const fs::path& path) { return parse_grasp_set(read_text(path)); }

// ---------------------------------------------------------------------------
// Scenes

namespace {

json pose_json(const RigidPose& p) {
  const Quat q = canonical(p.rotation);
  return json{{"quaternion", {q.w(), q.x(), q.y(), q.z()}},
              {"translation", {p.translation.x(), p.translation.y(), p.translation.z()}}};
}

RigidPose pose_from(const json& j, const std::string& where) {
  auto arr = [&](const char* key, std::size_t n) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != n) {
      throw Error(where + ": '" + key + "' must be an array of " + std::to_string(n) + " numbers");
    }
    return j[key].get<std::vector<double>>();
  };
  const auto q = arr("quaternion", 4);
  const auto t = arr("translation", 3);
  Quat quat(q[0], q[1], q[2], q[3]);
  if (std::abs(quat.norm() - 1.0) > 1e-6) throw Error(where + ": quaternion is not unit");
  quat.normalize();
  return RigidPose(quat, Vec3(t[0], t[1], t[2]));
}

}  // namespace

void write_scene(const Scene& scene, const fs::path& path) {
  const Camera& c = scene.camera();
  json j;
  j["format"] = "graspkit-scene";
  j["version"] = 1;
  j["mu_table"] = scene.mu_table();
  j["camera"] = {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy},
                 {"width", c.width}, {"height", c.height}, {"pose", pose_json(c.pose)}};
  json list = json::array();
  for (const Instance& inst : scene.instances()) {
    json e;
    e["id"] = inst.object_id;
    if (!inst.source.empty()) {
      e["mesh"] = inst.source;
    } else {
      json v = json::array();
      for (const Vec3& p : inst.mesh->vertices()) v.push_back({p.x(), p.y(), p.z()});
      json f = json::array();
      for (const Face& t : inst.mesh->faces()) f.push_back({t[0], t[1], t[2]});
      e["vertices"] = std::move(v);
      e["faces"] = std::move(f);
    }
    e["pose"] = pose_json(inst.pose);
    e["scale"] = inst.scale;
    list.push_back(std::move(e));
  }
  j["instances"] = std::move(list);
  write_text(path, j.dump(2) + "\n");
}

Scene read_scene(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  if (j.value("format", std::string()) != "graspkit-scene") {
    throw Error(path.string() + ": not a graspkit-scene file");
  }
  const fs::path base = path.parent_path();
  Camera cam = Camera::default_view();
  if (j.contains("camera")) {
    const json& c = j["camera"];
    cam.fx = c.value("fx", cam.fx);
    cam.fy = c.value("fy", cam.fy);
    cam.cx = c.value("cx", cam.cx);
    cam.cy = c.value("cy", cam.cy);
    cam.width = c.value("width", cam.width);
    cam.height = c.value("height", cam.height);
    if (c.contains("pose")) cam.pose = pose_from(c["pose"], "camera pose");
  }
  std::map<std::string, std::shared_ptr<const TriMesh>> cache;
  std::vector<Instance> instances;
  if (!j.contains("instances") || !j["instances"].is_array()) {
    throw Error(path.string() + ": missing instances array");
  }
  for (const json& e : j["instances"]) {
    Instance inst;
    if (!e.contains("id")) throw Error(path.string() + ": instance without id");
    inst.object_id = e["id"].get<int>();
    const std::string where = fmt::format("{}: instance {}", path.string(), inst.object_id);
    if (e.contains("mesh")) {
      inst.source = e["mesh"].get<std::string>();
      auto& slot = cache[inst.source];
      if (!slot) slot = std::make_shared<const TriMesh>(load_geometry(inst.source, base));
      inst.mesh = slot;
    } else if (e.contains("vertices") && e.contains("faces")) {
      std::vector<Vec3> v;
      for (const auto& p : e["vertices"]) v.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
      std::vector<Face> f;
      for (const auto& t : e["faces"]) f.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
      inst.mesh = std::make_shared<const TriMesh>(std::move(v), std::move(f));
    } else {
      throw Error(where + ": needs 'mesh' or inline geometry");
    }
    inst.pose = e.contains("pose") ? pose_from(e["pose"], where) : RigidPose::identity();
    inst.scale = e.value("scale", 1.0);
    instances.push_back(std::move(inst));
  }
  return Scene(std::move(instances), cam, j.value("mu_table", 0.5));
}

// ---------------------------------------------------------------------------
// Grids

namespace {

std::map<std::string, std::vector<std::string>> read_header(const fs::path& path,
                                                            const std::string& magic) {
  std::istringstream in(read_text(path));
  std::string line;
  std::map<std::string, std::vector<std::string>> out;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key) || key[0] == '#') continue;
    std::vector<std::string> vals;
    std::string v;
    while (ss >> v) vals.push_back(v);
    if (lineno == 1) {
      if (key != magic) fail_at(path, lineno, "expected '" + magic + "' header");
      continue;
    }
    out[key] = vals;
  }
  if (lineno == 0) throw Error(path.string() + ": empty header");
  return out;
}

const std::vector<std::string>& field(const std::map<std::string, std::vector<std::string>>& h,
                                      const std::string& key, std::size_t n, const fs::path& path) {
  const auto it = h.find(key);
  if (it == h.end() || it->second.size() != n) {
    throw Error(path.string() + ": header needs '" + key + "' with " + std::to_string(n) + " values");
  }
  return it->second;
}

}  // namespace

ScalarField read_sdf(const fs::path& header) {
  const auto h = read_header(header, "graspkit-sdf");
  ScalarField f;
  const auto& o = field(h, "origin", 3, header);
  for (int k = 0; k < 3; ++k) f.origin[k] = parse_double(o[k], header, 0);
  f.voxel_size = parse_double(field(h, "voxel_size", 1, header)[0], header, 0);
  const auto& d = field(h, "dims", 3, header);
  for (int k = 0; k < 3; ++k) f.dims[k] = static_cast<int>(parse_long(d[k], header, 0));
  const std::string sign = h.count("sign") ? field(h, "sign", 1, header)[0] : "negative-inside";
  if (sign != "negative-inside" && sign != "positive-inside") {
    throw Error(header.string() + ": sign must be negative-inside or positive-inside");
  }
  const fs::path data = header.parent_path() / field(h, "data", 1, header)[0];
  const std::string raw = read_text(data);
  if (f.dims[0] < 2 || f.dims[1] < 2 || f.dims[2] < 2) throw Error(header.string() + ": dims must be >= 2");
  const std::size_t n = static_cast<std::size_t>(f.dims[0]) * f.dims[1] * f.dims[2];
  if (raw.size() != 4 * n) {
    throw Error(fmt::format("{}: expected {} bytes, found {}", data.string(), 4 * n, raw.size()));
  }
  f.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[4 * i + b])) << (8 * b);
    const double v = std::bit_cast<float>(u);
    f.values[i] = sign == "positive-inside" ? -v : v;
  }
  f.validate();
  return f;
}

void write_sdf(const ScalarField& f, const fs::path& header) {
  f.validate();
  const fs::path data = header.stem().string() + ".raw";
  std::string raw;
  raw.reserve(4 * f.values.size());
  for (const double v : f.values) {
    const std::uint32_t u = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) raw.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
  }
  write_text(header.parent_path() / data, raw);
  write_text(header, fmt::format("graspkit-sdf 1\norigin {} {} {}\nvoxel_size {}\ndims {} {} {}\n"
                                 "sign negative-inside\ndata {}\n",
                                 f.origin.x(), f.origin.y(), f.origin.z(), f.voxel_size, f.dims[0],
                                 f.dims[1], f.dims[2], data.string()));
}

void write_depth(const DepthObservation& obs, const Camera& c, const fs::path& header) {
  const fs::path data = header.stem().string() + ".raw";
  std::string raw;
  raw.reserve(2 * obs.depth.size());
  for (const float d : obs.depth) {
    const double mm = std::round(static_cast<double>(d) * 1000.0);
    const auto u = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
    raw.push_back(static_cast<char>(u & 0xFF));
    raw.push_back(static_cast<char>(u >> 8));
  }
  write_text(header.parent_path() / data, raw);
  const Quat q = canonical(c.pose.rotation);
  write_text(header,
             fmt::format("graspkit-depth 1\nwidth {}\nheight {}\nfx {}\nfy {}\ncx {}\ncy {}\n"
                         "camera_position {} {} {}\ncamera_quaternion {} {} {} {}\n"
                         "units millimetre\nencoding uint16-le\ndata {}\n",
                         obs.width, obs.height, c.fx, c.fy, c.cx, c.cy, c.pose.translation.x(),
                         c.pose.translation.y(), c.pose.translation.z(), q.w(), q.x(), q.y(), q.z(),
                         data.string()));
}

}  // namespace graspkit
