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

#include "graspkit/config.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "graspkit/io.hpp"
#include "graspkit/primitives.hpp"

namespace graspkit {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

Camera CameraSettings::build() const {
  const double el = deg2rad(elevation_deg);
  const double az = deg2rad(azimuth_deg);
  const Vec3 eye = distance * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
  Camera c = Camera::look_at(eye, Vec3::Zero());
  c.fx = fx;
  c.fy = fy;
  c.cx = cx;
  c.cy = cy;
  c.width = width;
  c.height = height;
  return c;
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.objects = {"box:0.05,0.04,0.07",   "box:0.03,0.06,0.09",   "box:0.06,0.06,0.03",
                 "cylinder:0.025,0.10",  "cylinder:0.03,0.06",   "cylinder:0.018,0.12",
                 "sphere:0.03",          "sphere:0.022",         "capsule:0.02,0.05",
                 "capsule:0.015,0.07"};
  cfg.grid.perturbations = {{"nominal", PerturbationSpec{3.0, 0.003, 0.03, 0.0005, 0, 0.5}}};
  return cfg;
}

namespace {

/// Strict reader: every key of the object must be consumed.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw Error(where_ + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw Error(fmt::format("{}.{} has the wrong type", where_, key));
    }
  }

  const json* sub(const char* key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw Error(fmt::format("unknown config key {}.{}", where_, k));
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

void read_perturbation(Reader& r, PerturbationSpec& p) {
  r.get("rot_sigma_deg", p.rot_sigma_deg);
  r.get("trans_sigma", p.trans_sigma);
  r.get("scale_sigma", p.scale_sigma);
  r.get("shape_jitter", p.shape_jitter);
  r.get("smooth_iters", p.smooth_iters);
  r.get("smooth_lambda", p.smooth_lambda);
}

json perturbation_json(const PerturbationSpec& p) {
  return json{{"rot_sigma_deg", p.rot_sigma_deg}, {"trans_sigma", p.trans_sigma},
              {"scale_sigma", p.scale_sigma},     {"shape_jitter", p.shape_jitter},
              {"smooth_iters", p.smooth_iters},   {"smooth_lambda", p.smooth_lambda}};
}

}  // namespace

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed config: ") + e.what());
  }
  RunConfig cfg = default_config();
  cfg.base_dir = base_dir;
  Reader root(j, "config");
  int version = 1;
  root.get("version", version);
  if (version != 1) throw Error("unsupported config version " + std::to_string(version));
  root.get("seed", cfg.seed);
  root.get("objects", cfg.objects);
  root.get("object_scale", cfg.object_scale);
  root.get("out", cfg.out);

  if (const json* s = root.sub("gripper")) {
    Reader r(*s, root.path("gripper"));
    GripperSpec& g = cfg.gripper;
    r.get("max_width", g.max_width);
    r.get("finger_depth", g.finger_depth);
    r.get("finger_thickness", g.finger_thickness);
    r.get("finger_width", g.finger_width);
    r.get("palm_depth", g.palm_depth);
    r.get("tip_length", g.tip_length);
    r.get("closing_clearance", g.closing_clearance);
    r.get("open_margin", g.open_margin);
    r.finish();
  }
  if (const json* s = root.sub("contact")) {
    Reader r(*s, root.path("contact"));
    r.get("mu", cfg.contact.mu);
    r.get("torsion_ratio", cfg.contact.torsion_ratio);
    r.get("cone_edges", cfg.contact.cone_edges);
    r.get("eps_min", cfg.contact.eps_min);
    r.get("tau_arm", cfg.contact.tau_arm);
    r.finish();
  }
  if (const json* s = root.sub("sampler")) {
    Reader r(*s, root.path("sampler"));
    r.get("attempts", cfg.sampler.attempts);
    r.get("cap", cfg.sampler.cap);
    r.get("rolls", cfg.sampler.rolls);
    r.get("standoff", cfg.sampler.standoff);
    r.get("dedup_translation", cfg.sampler.dedup_translation);
    r.get("dedup_rotation_deg", cfg.sampler.dedup_rotation_deg);
    r.finish();
  }
  if (const json* s = root.sub("filter")) {
    Reader r(*s, root.path("filter"));
    r.get("min_approach_angle_deg", cfg.filter.min_approach_angle_deg);
    r.get("min_table_clearance", cfg.filter.min_table_clearance);
    r.get("collision", cfg.filter.collision);
    r.finish();
  }
  if (const json* s = root.sub("partial_view")) {
    Reader r(*s, root.path("partial_view"));
    PartialViewSettings& p = cfg.partial_view;
    r.get("depth_noise", p.depth_noise);
    r.get("tube_radius", p.tube_radius);
    r.get("min_separation", p.min_separation);
    r.get("estimate_normals", p.estimate_normals);
    r.get("normal_window", p.normal_window);
    r.get("normal_radius", p.normal_radius);
    r.finish();
  }
  if (const json* s = root.sub("scene")) {
    Reader r(*s, root.path("scene"));
    r.get("placement_radius", cfg.placement_radius);
    r.get("mu_table", cfg.mu_table);
    if (const json* c = r.sub("camera")) {
      Reader rc(*c, r.path("camera"));
      CameraSettings& cs = cfg.camera;
      rc.get("fx", cs.fx);
      rc.get("fy", cs.fy);
      rc.get("cx", cs.cx);
      rc.get("cy", cs.cy);
      rc.get("width", cs.width);
      rc.get("height", cs.height);
      rc.get("elevation_deg", cs.elevation_deg);
      rc.get("azimuth_deg", cs.azimuth_deg);
      rc.get("distance", cs.distance);
      rc.finish();
    }
    r.finish();
  }
  if (const json* s = root.sub("reconstruction")) {
    Reader r(*s, root.path("reconstruction"));
    r.get("remesh", cfg.reconstruction.remesh);
    r.get("voxel", cfg.reconstruction.voxel);
    r.finish();
  }
  if (const json* s = root.sub("failure")) {
    Reader r(*s, root.path("failure"));
    r.get("tau_shape", cfg.failure.tau_shape);
    r.get("tau_scale", cfg.failure.tau_scale);
    r.get("tau_rot_deg", cfg.failure.tau_rot_deg);
    r.get("tau_trans", cfg.failure.tau_trans);
    r.get("chamfer_samples", cfg.chamfer.n_samples);
    r.get("chamfer_principal_axes", cfg.chamfer.principal_axes);
    r.finish();
  }
  if (const json* s = root.sub("grid")) {
    Reader r(*s, root.path("grid"));
    r.get("clutter", cfg.grid.clutter);
    r.get("scenes", cfg.grid.scenes);
    r.get("generators", cfg.grid.generators);
    if (const json* ps = r.sub("perturbations")) {
      if (!ps->is_array()) throw Error("config.grid.perturbations must be an array");
      cfg.grid.perturbations.clear();
      for (std::size_t i = 0; i < ps->size(); ++i) {
        Reader rp((*ps)[i], fmt::format("config.grid.perturbations[{}]", i));
        NamedPerturbation np;
        rp.get("name", np.name);
        read_perturbation(rp, np.spec);
        rp.finish();
        cfg.grid.perturbations.push_back(np);
      }
    }
    r.finish();
  }
  if (const json* s = root.sub("sweep")) {
    Reader r(*s, root.path("sweep"));
    SweepStudy& w = cfg.sweep;
    w.enabled = true;
    r.get("enabled", w.enabled);
    r.get("seeds", w.seeds);
    r.get("clutter", w.clutter);
    r.get("generator", w.generator);
    r.get("rot_sigma_deg", w.rot_sigma_deg);
    r.get("trans_sigma", w.trans_sigma);
    r.get("scale_sigma", w.scale_sigma);
    r.get("shape_jitter", w.shape_jitter);
    r.finish();
  }
  if (const json* s = root.sub("external")) {
    Reader r(*s, root.path("external"));
    ExternalStudy e;
    r.get("scene", e.scene);
    r.get("grasps", e.grasps);
    r.get("generators", e.generators);
    r.finish();
    cfg.external = e;
  }
  root.finish();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw Error("missing config file " + path.string());
  return parse_config(read_text(path), path.parent_path());
}

fs::path resolve_path(const RunConfig& cfg, const std::string& p) {
  fs::path out(p);
  if (out.is_relative() && !cfg.base_dir.empty()) out = cfg.base_dir / out;
  return out;
}

SettleOptions settle_options(const RunConfig& cfg) {
  SettleOptions o;
  o.placement_radius = cfg.placement_radius;
  o.mu_table = cfg.mu_table;
  o.camera = cfg.camera.build();
  return o;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.objects.empty()) throw Error("config.objects is empty");
  for (const std::string& o : cfg.objects) {
    TriMesh probe;
    if (parse_primitive(o, probe)) continue;
    const fs::path p = resolve_path(cfg, o);
    if (!fs::exists(p)) throw Error("missing mesh file " + p.string());
  }
  if (!(cfg.object_scale > 0)) throw Error("config.object_scale must be positive");
  cfg.gripper.validate();
  cfg.contact.validate();
  cfg.sampler.validate();
  cfg.filter.validate();
  cfg.failure.validate();
  cfg.camera.build().validate();
  if (!(cfg.placement_radius >= 0)) throw Error("config.scene.placement_radius must be non-negative");
  if (!(cfg.mu_table >= 0)) throw Error("config.scene.mu_table must be non-negative");
  if (!(cfg.partial_view.depth_noise >= 0 && cfg.partial_view.tube_radius > 0 &&
        cfg.partial_view.min_separation >= 0 && cfg.partial_view.normal_window >= 1 &&
        cfg.partial_view.normal_radius > 0)) {
    throw Error("config.partial_view has an out-of-range value");
  }
  if (cfg.reconstruction.remesh && !(cfg.reconstruction.voxel > 0)) {
    throw Error("config.reconstruction.voxel must be positive");
  }
  if (cfg.chamfer.n_samples < 1) throw Error("config.failure.chamfer_samples must be at least 1");
  auto known = [](const std::string& g) {
    const auto& k = known_generators();
    return std::find(k.begin(), k.end(), g) != k.end();
  };
  for (const int c : cfg.grid.clutter) {
    if (c < 1) throw Error("config.grid.clutter sizes must be at least 1");
  }
  if (cfg.grid.scenes < 1) throw Error("config.grid.scenes must be at least 1");
  for (const std::string& g : cfg.grid.generators) {
    if (!known(g)) throw Error("unknown generator '" + g + "'");
    if (g == "external-file" || g == "filtered-external") {
      throw Error("generator '" + g + "' belongs in config.external");
    }
  }
  std::set<std::string> names;
  for (const NamedPerturbation& p : cfg.grid.perturbations) {
    if (p.name.empty() || p.name == "none") throw Error("perturbation names must be non-empty and not 'none'");
    if (!names.insert(p.name).second) throw Error("duplicate perturbation name '" + p.name + "'");
    p.spec.validate();
  }
  if (cfg.sweep.enabled) {
    if (cfg.sweep.seeds < 1 || cfg.sweep.clutter < 1) throw Error("config.sweep needs seeds and clutter >= 1");
    if (cfg.sweep.generator != "modular-perturbed" && cfg.sweep.generator != "filtered-partial-view") {
      throw Error("config.sweep.generator must use a reconstruction");
    }
    for (const auto* axis : {&cfg.sweep.rot_sigma_deg, &cfg.sweep.trans_sigma, &cfg.sweep.scale_sigma,
                             &cfg.sweep.shape_jitter}) {
      for (const double v : *axis) {
        if (!(v >= 0)) throw Error("config.sweep sigmas must be non-negative");
      }
    }
  }
  if (cfg.external) {
    for (const std::string* f : {&cfg.external->scene, &cfg.external->grasps}) {
      if (f->empty()) throw Error("config.external needs scene and grasps");
      if (!fs::exists(resolve_path(cfg, *f))) throw Error("missing file " + resolve_path(cfg, *f).string());
    }
    for (const std::string& g : cfg.external->generators) {
      if (g != "external-file" && g != "filtered-external") {
        throw Error("config.external.generators accepts external-file and filtered-external");
      }
    }
  }
}

std::string config_to_json(const RunConfig& cfg, int indent) {
  json j;
  j["version"] = 1;
  j["seed"] = cfg.seed;
  j["objects"] = cfg.objects;
  j["object_scale"] = cfg.object_scale;
  j["out"] = cfg.out;
  const GripperSpec& g = cfg.gripper;
  j["gripper"] = {{"max_width", g.max_width},
                  {"finger_depth", g.finger_depth},
                  {"finger_thickness", g.finger_thickness},
                  {"finger_width", g.finger_width},
                  {"palm_depth", g.palm_depth},
                  {"tip_length", g.tip_length},
                  {"closing_clearance", g.closing_clearance},
                  {"open_margin", g.open_margin}};
  j["contact"] = {{"mu", cfg.contact.mu},
                  {"torsion_ratio", cfg.contact.torsion_ratio},
                  {"cone_edges", cfg.contact.cone_edges},
                  {"eps_min", cfg.contact.eps_min},
                  {"tau_arm", cfg.contact.tau_arm}};
  j["sampler"] = {{"attempts", cfg.sampler.attempts},
                  {"cap", cfg.sampler.cap},
                  {"rolls", cfg.sampler.rolls},
                  {"standoff", cfg.sampler.standoff},
                  {"dedup_translation", cfg.sampler.dedup_translation},
                  {"dedup_rotation_deg", cfg.sampler.dedup_rotation_deg}};
  j["filter"] = {{"min_approach_angle_deg", cfg.filter.min_approach_angle_deg},
                 {"min_table_clearance", cfg.filter.min_table_clearance},
                 {"collision", cfg.filter.collision}};
  const PartialViewSettings& p = cfg.partial_view;
  j["partial_view"] = {{"depth_noise", p.depth_noise},         {"tube_radius", p.tube_radius},
                       {"min_separation", p.min_separation},   {"estimate_normals", p.estimate_normals},
                       {"normal_window", p.normal_window},     {"normal_radius", p.normal_radius}};
  const CameraSettings& c = cfg.camera;
  j["scene"] = {{"placement_radius", cfg.placement_radius},
                {"mu_table", cfg.mu_table},
                {"camera",
                 {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width},
                  {"height", c.height}, {"elevation_deg", c.elevation_deg},
                  {"azimuth_deg", c.azimuth_deg}, {"distance", c.distance}}}};
  j["reconstruction"] = {{"remesh", cfg.reconstruction.remesh}, {"voxel", cfg.reconstruction.voxel}};
  j["failure"] = {{"tau_shape", cfg.failure.tau_shape},
                  {"tau_scale", cfg.failure.tau_scale},
                  {"tau_rot_deg", cfg.failure.tau_rot_deg},
                  {"tau_trans", cfg.failure.tau_trans},
                  {"chamfer_samples", cfg.chamfer.n_samples},
                  {"chamfer_principal_axes", cfg.chamfer.principal_axes}};
  json perts = json::array();
  for (const NamedPerturbation& np : cfg.grid.perturbations) {
    json e = {{"name", np.name}};
    const json fields = perturbation_json(np.spec);
    for (const auto& [k, v] : fields.items()) e[k] = v;
    perts.push_back(std::move(e));
  }
  j["grid"] = {{"clutter", cfg.grid.clutter},
               {"scenes", cfg.grid.scenes},
               {"generators", cfg.grid.generators},
               {"perturbations", perts}};
  const SweepStudy& w = cfg.sweep;
  j["sweep"] = {{"enabled", w.enabled},           {"seeds", w.seeds},
                {"clutter", w.clutter},           {"generator", w.generator},
                {"rot_sigma_deg", w.rot_sigma_deg}, {"trans_sigma", w.trans_sigma},
                {"scale_sigma", w.scale_sigma},   {"shape_jitter", w.shape_jitter}};
  if (cfg.external) {
    j["external"] = {{"scene", cfg.external->scene},
                     {"grasps", cfg.external->grasps},
                     {"generators", cfg.external->generators}};
  }
  return j.dump(indent);
}

}  // namespace graspkit
