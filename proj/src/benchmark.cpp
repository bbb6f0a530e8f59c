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

#include "graspkit/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "graspkit/bvh.hpp"
#include "graspkit/io.hpp"
#include "graspkit/primitives.hpp"

namespace graspkit {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

bool uses_reconstruction(const std::string& g) {
  return g == "modular-exact" || g == "modular-perturbed" || g == "filtered-partial-view" ||
         g == "filtered-external";
}

bool is_partial(const std::string& g) { return g == "partial-view" || g == "filtered-partial-view"; }

template <class Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(jobs, n); ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<CatalogEntry> load_catalog(const RunConfig& cfg) {
  std::vector<CatalogEntry> out;
  for (const std::string& o : cfg.objects) {
    auto mesh = std::make_shared<const TriMesh>(load_geometry(o, cfg.base_dir, cfg.object_scale));
    // The source must reload to the same geometry from anywhere: absolute
    // paths, and inline geometry once a scale factor has been applied.
    TriMesh probe;
    std::string source = parse_primitive(o, probe) ? o : fs::absolute(resolve_path(cfg, o)).string();
    if (cfg.object_scale != 1.0) source.clear();
    out.push_back({std::move(mesh), std::move(source)});
  }
  return out;
}

ReconstructedScene reconstruct_scene(const Scene& gt, const PerturbationSpec* spec,
                                     const RunConfig& cfg, const SeedTree& seeds) {
  std::vector<Instance> instances;
  std::vector<Reconstruction> parts;
  std::vector<std::optional<FailureAttribution>> attribution;
  for (const Instance& inst : gt.instances()) {
    Reconstruction r;
    if (spec) {
      r = perturb_reconstruction(*inst.mesh, inst.pose, *spec,
                                 seeds.child(static_cast<std::uint64_t>(inst.object_id)).value());
      r.scale *= inst.scale;
    } else {
      r.mesh = *inst.mesh;
      r.pose = inst.pose;
      r.scale = inst.scale;
    }
    if (cfg.reconstruction.remesh) {
      TriMesh remeshed = marching_cubes(mesh_sdf(r.mesh, cfg.reconstruction.voxel / r.scale));
      if (!remeshed.empty()) r.mesh = std::move(remeshed);
    }
    Instance ri = inst;
    ri.mesh = std::make_shared<const TriMesh>(r.mesh);
    ri.pose = r.pose;
    ri.scale = r.scale;
    instances.push_back(std::move(ri));
    parts.push_back(std::move(r));
    attribution.emplace_back();
  }
  return ReconstructedScene{Scene(std::move(instances), gt.camera(), gt.mu_table(), false),
                            std::move(parts), std::move(attribution)};
}

GraspSet sample_scene(const Scene& scene, const RunConfig& cfg, const SeedTree& seeds) {
  GraspSet all;
  all.seed = seeds.value();
  all.generator = "modular";
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const int id = scene.instances()[i].object_id;
    GraspSet g = sample_antipodal_grasps(scene.world(i), cfg.gripper, cfg.contact.mu, cfg.sampler,
                                         seeds.child(static_cast<std::uint64_t>(id)).value(), id);
    for (Grasp& x : g.grasps) all.grasps.push_back(std::move(x));
  }
  return all;
}

GraspSet sample_partial_view(const DepthObservation& obs_in, const Camera& camera,
                             std::size_t objects, const RunConfig& cfg, std::uint64_t seed) {
  DepthObservation obs = obs_in;
  if (cfg.partial_view.estimate_normals) {
    estimate_normals(obs, camera, cfg.partial_view.normal_window, cfg.partial_view.normal_radius);
  }
  PartialViewOptions po;
  po.sampler = cfg.sampler;
  po.sampler.attempts = cfg.sampler.attempts * static_cast<int>(std::max<std::size_t>(1, objects));
  po.sampler.cap = cfg.sampler.cap * std::max<std::size_t>(1, objects);
  po.tube_radius = cfg.partial_view.tube_radius;
  po.min_separation = cfg.partial_view.min_separation;
  GraspSet set;
  set.seed = seed;
  set.generator = "partial-view";
  if (obs.cloud.size() < 10) return set;
  GraspSet raw = partial_view_sample(obs.cloud, cfg.gripper, cfg.contact.mu, po, seed);
  std::map<int, std::size_t> per_object;
  for (Grasp& g : raw.grasps) {
    if (per_object[g.object_id]++ < cfg.sampler.cap) set.grasps.push_back(std::move(g));
  }
  return set;
}

namespace {

struct CellPlan {
  CellKey key;
  const PerturbationSpec* perturbation = nullptr;
  int scenes = 1;
  SeedTree seeds{0};
  /// Catalog indices per scene; empty for external cells.
  std::vector<std::vector<std::size_t>> objects;
};

struct SceneRun {
  std::vector<GraspRecord> records;
  std::vector<std::size_t> per_object;
  StageTimes times;
};

struct Context {
  const RunConfig& cfg;
  const std::vector<CatalogEntry>& catalog;
  std::shared_ptr<const Scene> external_scene;
  std::shared_ptr<const GraspSet> external_grasps;
};

SceneRun run_scene(const Context& ctx, const CellPlan& plan, int s) {
  const RunConfig& cfg = ctx.cfg;
  const std::string& gen = plan.key.generator;
  const SeedTree seeds = plan.seeds.child(static_cast<std::uint64_t>(s));
  const Stopwatch total;
  SceneRun run;

  Stopwatch sw;
  std::shared_ptr<const Scene> gt;
  if (ctx.external_scene) {
    gt = ctx.external_scene;
  } else {
    std::vector<CatalogEntry> chosen;
    for (const std::size_t i : plan.objects[s]) chosen.push_back(ctx.catalog[i]);
    gt = std::make_shared<const Scene>(settle_scene(chosen, static_cast<int>(chosen.size()),
                                                    seeds.child("settle").value(), settle_options(cfg)));
  }
  std::optional<DepthObservation> obs;
  if (is_partial(gen)) {
    RenderOptions ro;
    ro.depth_noise = cfg.partial_view.depth_noise;
    ro.seed = seeds.child("render").value();
    obs = render_depth(*gt, ro);
  }
  run.times.scene = sw.seconds();

  sw = Stopwatch();
  std::optional<ReconstructedScene> recon;
  if (uses_reconstruction(gen)) {
    recon = reconstruct_scene(*gt, plan.perturbation, cfg, seeds.child("recon"));
  }
  run.times.reconstruction = sw.seconds();

  sw = Stopwatch();
  GraspSet grasps;
  if (gen == "modular-exact" || gen == "modular-perturbed") {
    grasps = sample_scene(recon->scene, cfg, seeds.child("sample"));
  } else if (is_partial(gen)) {
    grasps = sample_partial_view(*obs, gt->camera(), gt->size(), cfg, seeds.child("partial").value());
  } else {
    grasps = *ctx.external_grasps;
  }
  run.times.sampling = sw.seconds();

  sw = Stopwatch();
  GraspSet kept;
  if (gen == "modular-exact" || gen == "modular-perturbed") {
    kept = filter_grasps(recon->scene, grasps, cfg.filter, cfg.gripper).kept;
  } else if (is_partial(gen)) {
    kept = filter_grasps(obs->cloud, grasps, cfg.filter, cfg.gripper).kept;
    if (gen == "filtered-partial-view") {
      kept = filter_by_reconstruction(recon->scene, kept, cfg.gripper, cfg.contact);
    }
  } else if (gen == "filtered-external") {
    kept = filter_by_reconstruction(recon->scene, grasps, cfg.gripper, cfg.contact);
  } else {
    kept = grasps;
  }
  run.times.filtering = sw.seconds();

  sw = Stopwatch();
  std::vector<std::optional<FailureAttribution>> attribution(gt->size());
  if (plan.perturbation && recon) {
    for (std::size_t i = 0; i < gt->size(); ++i) {
      const Instance& inst = gt->instances()[i];
      ChamferOptions co = cfg.chamfer;
      co.seed = seeds.child("chamfer").child(static_cast<std::uint64_t>(inst.object_id)).value();
      attribution[i] = classify_failure(*inst.mesh, inst.pose, inst.scale, recon->parts[i], cfg.failure, co);
    }
  }
  run.per_object.assign(gt->size(), 0);
  for (std::size_t k = 0; k < kept.grasps.size(); ++k) {
    const Grasp& g = kept.grasps[k];
    const std::size_t idx = gt->index_of(g.object_id);
    ++run.per_object[idx];
    GraspRecord rec;
    rec.scene = s;
    rec.grasp_id = static_cast<int>(k);
    rec.score = g.score;
    rec.outcome = evaluate_grasp(*gt, g, cfg.gripper, cfg.contact, g.object_id, static_cast<int>(k));
    rec.attribution = attribution[idx];
    run.records.push_back(std::move(rec));
  }
  run.times.evaluation = sw.seconds();
  run.times.total = total.seconds();
  return run;
}

CellResult run_cell(const Context& ctx, const CellPlan& plan, int jobs) {
  std::vector<SceneRun> runs(plan.scenes);
  parallel_for(plan.scenes, jobs, [&](int s) { runs[s] = run_scene(ctx, plan, s); });
  CellResult cell;
  cell.key = plan.key;
  cell.scenes = plan.scenes;
  cell.seed = plan.seeds.value();
  std::vector<GraspOutcome> outcomes;
  std::vector<std::size_t> per_object;
  StageTimes times;
  for (SceneRun& r : runs) {
    for (GraspRecord& rec : r.records) {
      outcomes.push_back(rec.outcome);
      cell.records.push_back(std::move(rec));
    }
    per_object.insert(per_object.end(), r.per_object.begin(), r.per_object.end());
    times += r.times;
  }
  if (!outcomes.empty()) {
    cell.metrics = compute_metrics(outcomes, per_object);
  } else {
    cell.metrics.objects = per_object.size();
  }
  cell.metrics.times = times;
  return cell;
}

std::vector<std::size_t> stratified(int scene, int count, std::size_t n) {
  std::vector<std::size_t> out;
  for (int k = 0; k < count; ++k) out.push_back((static_cast<std::size_t>(scene) * count + k) % n);
  return out;
}

std::string sigma_label(const char* axis, double v) { return fmt::format("{}={}", axis, v); }

}  // namespace

BenchmarkResult run_benchmark(const RunConfig& cfg, const BenchmarkOptions& opts) {
  validate_config(cfg);
  const std::vector<CatalogEntry> catalog = load_catalog(cfg);
  const SeedTree root(cfg.seed);
  Context ctx{cfg, catalog, nullptr, nullptr};
  BenchmarkResult result;

  auto report = [&](const CellPlan& plan) {
    if (opts.progress) {
      opts.progress(fmt::format("{} {} clutter={} perturbation={}", plan.key.study, plan.key.generator,
                                plan.key.clutter, plan.key.perturbation));
    }
  };

  if (opts.grid) {
    for (const int clutter : cfg.grid.clutter) {
      CellPlan base;
      base.key.study = "grid";
      base.key.clutter = clutter;
      base.scenes = cfg.grid.scenes;
      base.seeds = root.child("grid").child(static_cast<std::uint64_t>(clutter));
      for (int s = 0; s < base.scenes; ++s) base.objects.push_back(stratified(s, clutter, catalog.size()));
      for (const std::string& gen : cfg.grid.generators) {
        std::vector<const NamedPerturbation*> variants;
        if (gen == "modular-exact" || gen == "partial-view" || gen == "filtered-partial-view") {
          variants.push_back(nullptr);
        }
        if (gen == "modular-perturbed" || gen == "filtered-partial-view") {
          for (const NamedPerturbation& p : cfg.grid.perturbations) variants.push_back(&p);
        }
        for (const NamedPerturbation* p : variants) {
          CellPlan plan = base;
          plan.key.generator = gen;
          plan.key.perturbation = p ? p->name : "none";
          plan.perturbation = p ? &p->spec : nullptr;
          report(plan);
          result.cells.push_back(run_cell(ctx, plan, opts.jobs));
        }
      }
    }
  }

  if (opts.sweep && cfg.sweep.enabled) {
    const SweepStudy& w = cfg.sweep;
    std::vector<PerturbationSpec> specs;
    std::vector<std::string> names;
    auto add_axis = [&](const char* axis, const std::vector<double>& levels, double PerturbationSpec::*field) {
      for (const double v : levels) {
        PerturbationSpec p;
        p.*field = v;
        specs.push_back(p);
        names.push_back(sigma_label(axis, v));
      }
    };
    add_axis("rot_sigma_deg", w.rot_sigma_deg, &PerturbationSpec::rot_sigma_deg);
    add_axis("trans_sigma", w.trans_sigma, &PerturbationSpec::trans_sigma);
    add_axis("scale_sigma", w.scale_sigma, &PerturbationSpec::scale_sigma);
    add_axis("shape_jitter", w.shape_jitter, &PerturbationSpec::shape_jitter);
    CellPlan base;
    base.key.study = "sweep";
    base.key.generator = w.generator;
    base.key.clutter = w.clutter;
    base.scenes = w.seeds;
    base.seeds = root.child("sweep");
    for (int s = 0; s < base.scenes; ++s) base.objects.push_back(stratified(s, w.clutter, catalog.size()));
    for (std::size_t i = 0; i < specs.size(); ++i) {
      CellPlan plan = base;
      plan.key.perturbation = names[i];
      plan.perturbation = &specs[i];
      report(plan);
      result.cells.push_back(run_cell(ctx, plan, opts.jobs));
    }
  }

  if (opts.external && cfg.external) {
    Context ext = ctx;
    ext.external_scene = std::make_shared<const Scene>(read_scene(resolve_path(cfg, cfg.external->scene)));
    ext.external_grasps =
        std::make_shared<const GraspSet>(read_grasp_set(resolve_path(cfg, cfg.external->grasps)));
    for (const Grasp& g : ext.external_grasps->grasps) ext.external_scene->index_of(g.object_id);
    for (const std::string& gen : cfg.external->generators) {
      std::vector<const NamedPerturbation*> variants{nullptr};
      if (gen == "filtered-external") {
        for (const NamedPerturbation& p : cfg.grid.perturbations) variants.push_back(&p);
      }
      for (const NamedPerturbation* p : variants) {
        CellPlan plan;
        plan.key = {"external", gen, static_cast<int>(ext.external_scene->size()), p ? p->name : "none"};
        plan.perturbation = p ? &p->spec : nullptr;
        plan.scenes = 1;
        plan.seeds = root.child("external");
        report(plan);
        result.cells.push_back(run_cell(ext, plan, 1));
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Reports

const std::vector<std::string>& timing_columns() {
  static const std::vector<std::string> cols{"t_scene",      "t_reconstruction", "t_sampling",
                                             "t_filtering",  "t_evaluation",     "t_total"};
  return cols;
}

namespace {

std::string preamble(const char* kind, const RunConfig& cfg) {
  return fmt::format("# graspkit-{} 1\n# config {}\n", kind, config_to_json(cfg, -1));
}

std::string key_fields(const CellKey& k) {
  return fmt::format("{},{},{},{}", k.study, k.generator, k.clutter, k.perturbation);
}

}  // namespace

void write_reports(const BenchmarkResult& result, const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);

  std::string report = preamble("report", cfg);
  report +=
      "study,generator,clutter,perturbation,scenes,evaluated,objects,gcr,fcfr,unstable,success,"
      "success_no_stability,avg_grasps_per_object,max_grasps_per_object,cap,seed";
  for (const std::string& c : timing_columns()) report += "," + c;
  report += "\n";
  for (const CellResult& c : result.cells) {
    const MetricsReport& m = c.metrics;
    const StageTimes& t = m.times;
    report += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n",
                          key_fields(c.key), c.scenes, m.evaluated, m.objects, m.gcr, m.fcfr,
                          m.unstable_rate, m.success_rate, m.success_without_stability,
                          m.avg_grasps_per_object, m.max_grasps_per_object, cfg.sampler.cap, c.seed,
                          t.scene, t.reconstruction, t.sampling, t.filtering, t.evaluation, t.total);
  }
  write_text(dir / "report.csv", report);

  json summary;
  summary["format"] = "graspkit-summary";
  summary["version"] = 1;
  summary["config"] = json::parse(config_to_json(cfg, -1));
  summary["success_definition"] =
      "success: collision-free, force closure on ground-truth contacts and stable proxy; "
      "success_no_stability drops the stability proxy";
  summary["timing"] = "wall-clock stage times are reported in report.csv only";
  json cells = json::array();
  for (const CellResult& c : result.cells) {
    const MetricsReport& m = c.metrics;
    cells.push_back({{"study", c.key.study},
                     {"generator", c.key.generator},
                     {"clutter", c.key.clutter},
                     {"perturbation", c.key.perturbation},
                     {"scenes", c.scenes},
                     {"seed", c.seed},
                     {"evaluated", m.evaluated},
                     {"objects", m.objects},
                     {"gcr", m.gcr},
                     {"fcfr", m.fcfr},
                     {"unstable", m.unstable_rate},
                     {"success", m.success_rate},
                     {"success_no_stability", m.success_without_stability},
                     {"avg_grasps_per_object", m.avg_grasps_per_object},
                     {"max_grasps_per_object", m.max_grasps_per_object}});
  }
  summary["cells"] = std::move(cells);
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  std::string grasps = preamble("grasp-records", cfg);
  grasps +=
      "study,generator,clutter,perturbation,scene,grasp_id,object_id,score,outcome,collision_entity,"
      "force_closure,epsilon,stable,label,shape_error,scale_error,rotation_error_deg,translation_error\n";
  for (const CellResult& c : result.cells) {
    const std::string key = key_fields(c.key);
    for (const GraspRecord& r : c.records) {
      const GraspOutcome& o = r.outcome;
      const std::string entity = o.collision_entity ? std::to_string(*o.collision_entity) : "";
      std::string attr = ",,,,";
      if (r.attribution) {
        const FailureAttribution& a = *r.attribution;
        attr = fmt::format("{},{},{},{},{}", to_string(a.label), a.shape_error, a.scale_error,
                           a.rotation_error_deg, a.translation_error);
      }
      grasps += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", key, r.scene, r.grasp_id,
                            o.object_id, r.score, to_string(o.outcome), entity,
                            o.force_closure ? 1 : 0, o.epsilon, o.stable ? 1 : 0, attr);
    }
  }
  write_text(dir / "grasps.csv", grasps);

  std::string stacked = preamble("plot-stacked", cfg);
  stacked += "study,generator,clutter,perturbation,collision,fc_failure,unstable,success,avg_grasps_per_object\n";
  for (const CellResult& c : result.cells) {
    const MetricsReport& m = c.metrics;
    stacked += fmt::format("{},{},{},{},{},{}\n", key_fields(c.key), m.gcr, m.fcfr, m.unstable_rate,
                           m.success_rate, m.avg_grasps_per_object);
  }
  write_text(dir / "plot_stacked.csv", stacked);

  std::string fractions = preamble("failure-fractions", cfg);
  fractions += "study,generator,clutter,perturbation,failed,shape,scale,pose,none\n";
  for (const CellResult& c : result.cells) {
    std::array<std::size_t, 4> counts{};
    std::size_t failed = 0;
    for (const GraspRecord& r : c.records) {
      if (r.outcome.outcome == OutcomeClass::Success || !r.attribution) continue;
      ++failed;
      ++counts[static_cast<int>(r.attribution->label)];
    }
    if (failed == 0) continue;
    const double n = static_cast<double>(failed);
    fractions += fmt::format("{},{},{},{},{},{}\n", key_fields(c.key), failed,
                             counts[static_cast<int>(FailureLabel::Shape)] / n,
                             counts[static_cast<int>(FailureLabel::Scale)] / n,
                             counts[static_cast<int>(FailureLabel::Pose)] / n,
                             counts[static_cast<int>(FailureLabel::None)] / n);
  }
  write_text(dir / "failure_fractions.csv", fractions);
}

}  // namespace graspkit
