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

// graspkit command-line interface.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "graspkit/benchmark.hpp"
#include "graspkit/bvh.hpp"
#include "graspkit/config.hpp"
#include "graspkit/io.hpp"

namespace fs = std::filesystem;
using namespace graspkit;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
};

struct Overrides {
  std::optional<double> mu;
  std::optional<std::size_t> cap;
  std::optional<int> attempts;
  std::vector<int> clutter;
  std::optional<int> scenes;
  std::optional<double> rot_sigma;
  std::optional<double> trans_sigma;
  std::optional<double> scale_sigma;
  std::optional<double> shape_jitter;

  bool any_sigma() const { return rot_sigma || trans_sigma || scale_sigma || shape_jitter; }
};

void add_common(CLI::App* cmd, Common& c, bool with_jobs) {
  cmd->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--out", c.out, "Output path");
  if (with_jobs) cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

void add_contact_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--mu", o.mu, "Friction coefficient")->check(CLI::NonNegativeNumber);
}

void add_sampler_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--cap", o.cap, "Grasps kept per object")->check(CLI::PositiveNumber);
  cmd->add_option("--attempts", o.attempts, "Contact samples per object")->check(CLI::PositiveNumber);
}

void add_sigma_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--rot-sigma", o.rot_sigma, "Rotation sigma (deg)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--trans-sigma", o.trans_sigma, "Translation sigma (m)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--scale-sigma", o.scale_sigma, "Log-scale sigma")->check(CLI::NonNegativeNumber);
  cmd->add_option("--shape-jitter", o.shape_jitter, "Vertex jitter sigma (m)")->check(CLI::NonNegativeNumber);
}

RunConfig load(const Common& c, const Overrides& o) {
  RunConfig cfg = c.config.empty() ? default_config() : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (o.mu) cfg.contact.mu = *o.mu;
  if (o.cap) cfg.sampler.cap = *o.cap;
  if (o.attempts) cfg.sampler.attempts = *o.attempts;
  if (!o.clutter.empty()) cfg.grid.clutter = o.clutter;
  if (o.scenes) {
    cfg.grid.scenes = *o.scenes;
    cfg.sweep.seeds = *o.scenes;
  }
  return cfg;
}

PerturbationSpec custom_perturbation(const Overrides& o) {
  PerturbationSpec p;
  p.rot_sigma_deg = o.rot_sigma.value_or(0.0);
  p.trans_sigma = o.trans_sigma.value_or(0.0);
  p.scale_sigma = o.scale_sigma.value_or(0.0);
  p.shape_jitter = o.shape_jitter.value_or(0.0);
  p.validate();
  return p;
}

std::string or_default(const std::string& s, const char* fallback) { return s.empty() ? fallback : s; }

// -- subcommands ------------------------------------------------------------

int cmd_mesh_info(const std::string& source, double scale) {
  const TriMesh mesh = load_geometry(source, fs::current_path(), scale);
  const Aabb b = mesh.bounds();
  std::string volume = "n/a";
  if (mesh.is_watertight()) volume = fmt::format("{:.6g}", mass_properties(mesh).volume);
  std::cout << fmt::format(
      "mesh-info: vertices={} faces={} dropped={} watertight={} area={:.6g} volume={} "
      "bounds=[{:.6g},{:.6g},{:.6g}]..[{:.6g},{:.6g},{:.6g}]\n",
      mesh.num_vertices(), mesh.num_faces(), mesh.dropped_faces(),
      mesh.is_watertight() ? "yes" : "no", mesh.total_area(), volume, b.lo.x(), b.lo.y(), b.lo.z(),
      b.hi.x(), b.hi.y(), b.hi.z());
  return 0;
}

int cmd_sample(const Common& c, const Overrides& o, const std::string& source,
               const std::string& scene_path, bool partial, double noise, int rolls,
               int object_id) {
  RunConfig cfg = load(c, o);
  if (rolls > 0) cfg.sampler.rolls = rolls;
  GraspSet set;
  if (!scene_path.empty()) {
    const Scene scene = read_scene(scene_path);
    if (partial) {
      RenderOptions ro;
      ro.depth_noise = noise;
      ro.seed = SeedTree(cfg.seed).child("render").value();
      const DepthObservation obs = render_depth(scene, ro);
      // Same output the partial-view generator evaluates: sampled on the
      // cloud, then filtered against the cloud and the table plane.
      set = filter_grasps(obs.cloud,
                          sample_partial_view(obs, scene.camera(), scene.size(), cfg,
                                              SeedTree(cfg.seed).child("partial").value()),
                          cfg.filter, cfg.gripper)
                .kept;
    } else {
      set = sample_scene(scene, cfg, SeedTree(cfg.seed));
    }
  } else {
    if (source.empty()) throw Error("sample needs --mesh or --scene");
    if (partial) throw Error("--partial-view needs --scene");
    const TriMesh mesh = load_geometry(source, fs::current_path(), cfg.object_scale);
    set = sample_antipodal_grasps(mesh, cfg.gripper, cfg.contact.mu, cfg.sampler, cfg.seed,
                                  object_id);
  }
  const fs::path out = or_default(c.out, "grasps.jsonl");
  write_grasp_set(set, out);
  std::cout << fmt::format("sample: {} grasps -> {}\n", set.grasps.size(), out.string());
  return 0;
}

int cmd_settle(const Common& c, const Overrides& o, int count) {
  RunConfig cfg = load(c, o);
  cfg.external.reset();  // not needed to place objects
  validate_config(cfg);
  const std::vector<CatalogEntry> catalog = load_catalog(cfg);
  if (catalog.empty()) throw Error("config lists no objects");
  Rng rng = SeedTree(cfg.seed).child("pick").rng();
  const std::size_t offset = rng.index(catalog.size());
  std::vector<CatalogEntry> chosen;
  for (int k = 0; k < count; ++k) chosen.push_back(catalog[(offset + k) % catalog.size()]);
  const Scene scene = settle_scene(chosen, count, SeedTree(cfg.seed).child("settle").value(),
                                   settle_options(cfg));
  const fs::path out = or_default(c.out, "scene.json");
  write_scene(scene, out);
  std::cout << fmt::format("settle: {} objects -> {}\n", scene.size(), out.string());
  return 0;
}

int cmd_render(const Common& c, const std::string& scene_path, double noise) {
  const Scene scene = read_scene(scene_path);
  RenderOptions ro;
  ro.depth_noise = noise;
  ro.seed = SeedTree(c.seed.value_or(7)).child("render").value();
  const DepthObservation obs = render_depth(scene, ro);
  const fs::path out = or_default(c.out, "depth.txt");
  write_depth(obs, scene.camera(), out);
  std::cout << fmt::format("render: {}x{} depth, {} cloud points -> {}\n", obs.width, obs.height,
                           obs.cloud.size(), out.string());
  return 0;
}

int cmd_filter(const Common& c, const Overrides& o, const std::string& scene_path,
               const std::string& grasp_path, std::optional<double> min_angle,
               std::optional<double> clearance, bool no_collision, std::optional<int> target) {
  RunConfig cfg = load(c, o);
  if (min_angle) cfg.filter.min_approach_angle_deg = *min_angle;
  if (clearance) cfg.filter.min_table_clearance = *clearance;
  if (no_collision) cfg.filter.collision = false;
  cfg.filter.validate();
  const Scene scene = read_scene(scene_path);
  const GraspSet grasps = read_grasp_set(grasp_path);
  if (target) {
    scene.index_of(*target);
  } else {
    for (const Grasp& g : grasps.grasps) scene.index_of(g.object_id);
  }
  const FilterResult r = filter_grasps(scene, grasps, cfg.filter, cfg.gripper, target);
  std::map<std::string, int> reasons;
  for (const auto& [g, why] : r.rejected) ++reasons[to_string(why)];
  const fs::path out = or_default(c.out, "filtered.jsonl");
  write_grasp_set(r.kept, out);
  std::vector<std::string> why;
  for (const auto& [k, v] : reasons) why.push_back(fmt::format("{}={}", k, v));
  std::cout << fmt::format("filter: kept {} of {} ({}) -> {}\n", r.kept.grasps.size(),
                           grasps.grasps.size(), fmt::join(why, " "), out.string());
  return 0;
}

int cmd_eval(const Common& c, const Overrides& o, const std::string& scene_path,
             const std::string& grasp_path) {
  const RunConfig cfg = load(c, o);
  const Scene scene = read_scene(scene_path);
  const GraspSet grasps = read_grasp_set(grasp_path);
  for (std::size_t i = 0; i < grasps.grasps.size(); ++i) {
    if (!scene.find(grasps.grasps[i].object_id)) {
      throw Error(fmt::format("grasp {}: unknown object id {}", i, grasps.grasps[i].object_id));
    }
  }
  std::vector<GraspOutcome> outcomes;
  std::vector<std::size_t> per_object(scene.size(), 0);
  std::string csv = "grasp_id,object_id,outcome,collision_entity,force_closure,epsilon,stable\n";
  for (std::size_t i = 0; i < grasps.grasps.size(); ++i) {
    const Grasp& g = grasps.grasps[i];
    ++per_object[scene.index_of(g.object_id)];
    const GraspOutcome r =
        evaluate_grasp(scene, g, cfg.gripper, cfg.contact, g.object_id, static_cast<int>(i));
    csv += fmt::format("{},{},{},{},{},{},{}\n", i, g.object_id, to_string(r.outcome),
                       r.collision_entity ? std::to_string(*r.collision_entity) : "",
                       r.force_closure ? 1 : 0, r.epsilon, r.stable ? 1 : 0);
    outcomes.push_back(r);
  }
  if (!c.out.empty()) write_text(c.out, csv);
  if (outcomes.empty()) {
    std::cout << "eval: n=0 (empty grasp set)\n";
    return 0;
  }
  const MetricsReport m = compute_metrics(outcomes, per_object);
  std::cout << fmt::format(
      "eval: n={} gcr={:.4f} fcfr={:.4f} unstable={:.4f} success={:.4f} avg_grasps={:.2f}{}\n",
      m.evaluated, m.gcr, m.fcfr, m.unstable_rate, m.success_rate, m.avg_grasps_per_object,
      c.out.empty() ? "" : " -> " + c.out);
  return 0;
}

void print_cells(const BenchmarkResult& r) {
  for (const CellResult& cell : r.cells) {
    const MetricsReport& m = cell.metrics;
    std::cerr << fmt::format("  {:<6} {:<22} c={:<2} {:<20} n={:<5} gcr={:.3f} fcfr={:.3f} "
                             "unstable={:.3f} success={:.3f} avg={:.1f}\n",
                             cell.key.study, cell.key.generator, cell.key.clutter,
                             cell.key.perturbation, m.evaluated, m.gcr, m.fcfr, m.unstable_rate,
                             m.success_rate, m.avg_grasps_per_object);
  }
}

BenchmarkOptions bench_options(const Common& c, bool quiet) {
  BenchmarkOptions opts;
  opts.jobs = c.jobs;
  if (!quiet) opts.progress = [](const std::string& s) { std::cerr << "running " << s << "\n"; };
  return opts;
}

int cmd_bench(const Common& c, const Overrides& o, bool quiet) {
  RunConfig cfg = load(c, o);
  if (!c.out.empty()) cfg.out = c.out;
  validate_config(cfg);
  const BenchmarkResult r = run_benchmark(cfg, bench_options(c, quiet));
  const fs::path dir = resolve_path(cfg, cfg.out);
  write_reports(r, cfg, dir);
  if (!quiet) print_cells(r);
  std::cout << fmt::format("bench: {} cells -> {}\n", r.cells.size(), dir.string());
  return 0;
}

int cmd_perturb_study(const Common& c, const Overrides& o, bool quiet) {
  RunConfig cfg = load(c, o);
  if (!c.out.empty()) cfg.out = c.out;
  BenchmarkOptions opts = bench_options(c, quiet);
  opts.external = false;
  if (o.any_sigma()) {
    // A single custom perturbation evaluated like a grid cell.
    cfg.grid.generators = {"modular-perturbed"};
    cfg.grid.perturbations = {{"custom", custom_perturbation(o)}};
    if (o.clutter.empty()) cfg.grid.clutter = {cfg.sweep.clutter};
    cfg.grid.scenes = cfg.sweep.seeds;
    cfg.sweep.enabled = false;
    opts.sweep = false;
  } else {
    if (!cfg.sweep.enabled) throw Error("config has no sweep study; pass sigma flags instead");
    opts.grid = false;
  }
  validate_config(cfg);
  const BenchmarkResult r = run_benchmark(cfg, opts);
  const fs::path dir = resolve_path(cfg, cfg.out);
  write_reports(r, cfg, dir);
  if (!quiet) print_cells(r);
  std::cout << fmt::format("perturb-study: {} cells -> {}\n", r.cells.size(), dir.string());
  return 0;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int cmd_report(const std::string& in) {
  fs::path path = in;
  if (fs::is_directory(path)) path /= "report.csv";
  std::istringstream text(read_text(path));
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(text, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = split_csv(line);
    } else {
      rows.push_back(split_csv(line));
      if (rows.back().size() != header.size()) {
        throw Error(fmt::format("{}: row {} has {} fields, header has {}", path.string(), rows.size(),
                                rows.back().size(), header.size()));
      }
    }
  }
  if (header.empty()) throw Error(path.string() + ": no header row");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  const std::vector<std::string> shown{"study",    "generator", "clutter",
                                       "perturbation", "evaluated", "gcr",
                                       "fcfr",     "unstable",  "success",
                                       "avg_grasps_per_object", "t_total"};
  for (const std::string& s : shown) {
    if (!col.count(s)) throw Error(path.string() + ": missing column " + s);
  }
  for (auto& r : rows) {
    for (std::string& v : r) {
      if (v.find('.') == std::string::npos) continue;
      char* end = nullptr;
      const double x = std::strtod(v.c_str(), &end);
      if (end && *end == '\0') v = fmt::format("{:.4f}", x);
    }
  }
  std::vector<std::size_t> width(shown.size());
  for (std::size_t k = 0; k < shown.size(); ++k) {
    width[k] = shown[k].size();
    for (const auto& r : rows) width[k] = std::max(width[k], r[col[shown[k]]].size());
  }
  auto print_row = [&](auto&& cell) {
    std::string out;
    for (std::size_t k = 0; k < shown.size(); ++k) {
      out += fmt::format("{:<{}}", cell(k), width[k] + 2);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    std::cout << out << "\n";
  };
  print_row([&](std::size_t k) { return shown[k]; });
  for (const auto& r : rows) print_row([&](std::size_t k) { return r[col[shown[k]]]; });
  std::cout << fmt::format("report: {} cells in {}\n", rows.size(), path.string());
  return 0;
}

std::string json_error(const std::string& command, const std::string& message) {
  nlohmann::json j;
  j["error"] = message;
  j["command"] = command;
  return j.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graspkit: antipodal grasp synthesis and evaluation benchmarks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "graspkit 1.0");

  Common common;
  Overrides over;
  bool quiet = false;

  std::string mesh;
  double mesh_scale = 1.0;
  auto* mesh_info = app.add_subcommand("mesh-info", "Print mesh statistics");
  mesh_info->add_option("--mesh", mesh, "Mesh file or primitive descriptor")->required();
  mesh_info->add_option("--scale", mesh_scale, "Coordinate scale factor")->check(CLI::PositiveNumber);

  int rolls = 0;
  int object_id = 0;
  std::string scene_path;
  std::string grasp_path;
  double noise = 0.0;
  bool partial = false;
  auto* sample = app.add_subcommand("sample", "Sample antipodal grasps on a mesh or a scene");
  auto* sample_mesh = sample->add_option("--mesh", mesh, "Mesh file or primitive descriptor");
  auto* sample_scene_opt =
      sample->add_option("--scene", scene_path, "Scene file; samples every object")->check(CLI::ExistingFile);
  sample_mesh->excludes(sample_scene_opt);
  sample->add_flag("--partial-view", partial, "Sample from a rendered single-view cloud");
  sample->add_option("--depth-noise", noise, "Gaussian depth noise sigma (m)")->check(CLI::NonNegativeNumber);
  sample->add_option("--rolls", rolls, "Roll angles per contact pair")->check(CLI::PositiveNumber);
  sample->add_option("--object-id", object_id, "Object id written to each grasp");
  add_common(sample, common, false);
  add_contact_overrides(sample, over);
  add_sampler_overrides(sample, over);

  auto* render = app.add_subcommand("render", "Render a depth image of a scene");
  render->add_option("--scene", scene_path, "Scene file")->required()->check(CLI::ExistingFile);
  render->add_option("--depth-noise", noise, "Gaussian depth noise sigma (m)")->check(CLI::NonNegativeNumber);
  add_common(render, common, false);

  int count = 5;
  auto* settle = app.add_subcommand("settle", "Place catalog objects in stable poses on the table");
  settle->add_option("--clutter", count, "Number of objects")->check(CLI::PositiveNumber);
  add_common(settle, common, false);

  std::optional<double> min_angle;
  std::optional<double> clearance;
  bool no_collision = false;
  std::optional<int> target;
  auto* filter = app.add_subcommand("filter", "Filter grasps against a scene");
  filter->add_option("--scene", scene_path, "Scene file")->required()->check(CLI::ExistingFile);
  filter->add_option("--grasps", grasp_path, "Grasp file")->required()->check(CLI::ExistingFile);
  filter->add_option("--min-approach-angle", min_angle, "Minimum approach elevation (deg)");
  filter->add_option("--table-clearance", clearance, "Minimum grasp centre height (m)");
  filter->add_flag("--no-collision", no_collision, "Skip the collision check");
  filter->add_option("--target", target, "Target object id for every grasp");
  add_common(filter, common, false);

  auto* eval = app.add_subcommand("eval", "Evaluate grasps against a ground-truth scene");
  eval->add_option("--scene", scene_path, "Scene file")->required()->check(CLI::ExistingFile);
  eval->add_option("--grasps", grasp_path, "Grasp file")->required()->check(CLI::ExistingFile);
  add_common(eval, common, false);
  add_contact_overrides(eval, over);

  auto* perturb = app.add_subcommand("perturb-study", "Run the reconstruction-error sweep");
  add_common(perturb, common, true);
  add_contact_overrides(perturb, over);
  add_sampler_overrides(perturb, over);
  add_sigma_overrides(perturb, over);
  perturb->add_option("--clutter", over.clutter, "Objects per scene")->check(CLI::PositiveNumber);
  perturb->add_option("--scenes", over.scenes, "Scenes per cell")->check(CLI::PositiveNumber);
  perturb->add_flag("--quiet", quiet, "Only print the summary line");

  auto* bench = app.add_subcommand("bench", "Run the full benchmark suite");
  add_common(bench, common, true);
  add_contact_overrides(bench, over);
  add_sampler_overrides(bench, over);
  bench->add_option("--clutter", over.clutter, "Clutter sizes")->check(CLI::PositiveNumber);
  bench->add_option("--scenes", over.scenes, "Scenes per cell")->check(CLI::PositiveNumber);
  bench->add_flag("--quiet", quiet, "Only print the summary line");

  std::string in;
  auto* report = app.add_subcommand("report", "Print a benchmark report as a table");
  report->add_option("--in", in, "Report directory or report.csv")->required()->check(CLI::ExistingPath);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    if (chosen == mesh_info) return cmd_mesh_info(mesh, mesh_scale);
    if (chosen == sample) return cmd_sample(common, over, mesh, scene_path, partial, noise, rolls, object_id);
    if (chosen == render) return cmd_render(common, scene_path, noise);
    if (chosen == settle) return cmd_settle(common, over, count);
    if (chosen == filter) {
      return cmd_filter(common, over, scene_path, grasp_path, min_angle, clearance, no_collision,
                        target);
    }
    if (chosen == eval) return cmd_eval(common, over, scene_path, grasp_path);
    if (chosen == perturb) return cmd_perturb_study(common, over, quiet);
    if (chosen == bench) return cmd_bench(common, over, quiet);
    if (chosen == report) return cmd_report(in);
  } catch (const std::exception& e) {
    std::cerr << json_error(name, e.what()) << "\n";
    return 1;
  }
  return 2;
}
