#include "matsplat/app/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "matsplat/error.hpp"
#include "matsplat/io/io.hpp"
#include "matsplat/label_project.hpp"
#include "matsplat/lidar.hpp"
#include "matsplat/mask_refine.hpp"
#include "matsplat/mesh_label.hpp"
#include "matsplat/metrics.hpp"
#include "matsplat/pbr.hpp"

namespace matsplat::app {

using json = nlohmann::ordered_json;

namespace {

void require_file(const fs::path& path, const char* what) {
  if (!fs::exists(path)) fail(ErrorKind::Io, std::string(what) + " not found: " + path.string());
}

void require_dir(const fs::path& path, const char* what) {
  if (!fs::is_directory(path)) fail(ErrorKind::Io, std::string(what) + " is not a directory: " + path.string());
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
}

fs::path with_suffix(const fs::path& path, const std::string& suffix) { return fs::path(path.string() + suffix); }

/// Any id below 255 is accepted; known ids keep their names.
Palette open_palette() {
  Palette p = default_palette();
  for (int c = 0; c < kUnlabeled; ++c) p.emplace(static_cast<ClassId>(c), "class_" + std::to_string(c));
  return p;
}

/// The file in `dir` belonging to image `name`: the exact name, else its stem
/// with one of `extensions`.
fs::path find_view_file(const fs::path& dir, const std::string& name, std::initializer_list<const char*> extensions) {
  if (fs::is_regular_file(dir / name) &&
      std::any_of(extensions.begin(), extensions.end(),
                  [&](const char* e) { return fs::path(name).extension() == e; }))
    return dir / name;
  for (const char* ext : extensions) {
    fs::path candidate = dir / fs::path(name).replace_extension(ext);
    if (fs::is_regular_file(candidate)) return candidate;
  }
  fail(ErrorKind::Io, "no file for image '" + name + "' in " + dir.string());
}

pbr::MaterialTable table_from(const std::optional<fs::path>& path) {
  if (!path) return pbr::default_table();
  require_file(*path, "material table");
  return pbr::load_material_table(*path);
}

json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string class_key(ClassId c) { return std::to_string(static_cast<int>(c)); }

}  // namespace

json run_refine(const RefineArgs& args) {
  require_file(args.materials, "material mask");
  require_file(args.instances, "instance masks");
  const MaterialMap materials = io::load_mask(args.materials, open_palette());
  const InstanceSet raw = io::load_instances(args.instances);
  if (raw.width != materials.width || raw.height != materials.height)
    fail(ErrorKind::Shape, "instance masks are " + std::to_string(raw.width) + "x" + std::to_string(raw.height) +
                               ", material mask is " + std::to_string(materials.width) + "x" +
                               std::to_string(materials.height));
  const InstanceSet instances = mask_refine::remove_overlaps(raw);
  const MaterialMap refined = mask_refine::refine_labels(materials, instances, args.threads);
  ensure_parent(args.output);
  io::write_mask(refined, args.output);

  std::size_t changed = 0;
  for (std::size_t i = 0; i < refined.pixels.size(); ++i) changed += refined.pixels[i] != materials.pixels[i];

  Provenance prov("refine");
  prov.input("materials", args.materials);
  prov.input("instances", args.instances);
  prov.output("refined", args.output);
  prov.write(args.output);

  json report;
  report["command"] = "refine";
  report["instances"] = raw.size();
  report["instances_after_overlap_removal"] = instances.size();
  report["changed_pixels"] = changed;
  report["output"] = args.output.generic_string();
  return report;
}

json run_project(const ProjectArgs& args) {
  require_file(args.splats, "splat file");
  require_dir(args.cameras, "camera model");
  require_dir(args.masks, "mask directory");
  if (!(args.alpha_threshold > 0.0 && args.alpha_threshold <= 1.0))
    fail(ErrorKind::Domain, "alpha threshold " + std::to_string(args.alpha_threshold) + " outside (0,1]");

  GaussianCloud cloud = io::load_gaussian_ply(args.splats);
  const std::vector<CameraModel> cameras = io::load_cameras(args.cameras);
  const Palette palette = open_palette();
  std::vector<MaterialMap> masks;
  masks.reserve(cameras.size());
  for (const auto& cam : cameras) masks.push_back(io::load_mask(find_view_file(args.masks, cam.id, {".png", ".pgm"}), palette));

  label_project::RasterOptions options;
  options.alpha_threshold = args.alpha_threshold;
  options.threads = args.threads;
  label_project::ProjectStats stats;
  const auto votes = label_project::project_labels(cloud, cameras, masks, options, &stats);
  cloud.labels = label_project::aggregate_labels(votes);
  ensure_parent(args.output);
  io::write_gaussian_ply(cloud, args.output);

  if (args.debug_dir) {
    fs::create_directories(*args.debug_dir);
    for (std::size_t v = 0; v < cameras.size(); ++v) {
      const auto proj = label_project::project_splats(cloud, cameras[v]);
      const auto view = label_project::rasterize_votes(proj.footprints, masks[v], options);
      const MaterialMap img = label_project::render_winner_labels(view, cloud.labels, palette);
      io::write_mask(img, *args.debug_dir / fs::path(cameras[v].id).replace_extension(".png").filename());
    }
  }

  std::map<ClassId, std::size_t> per_class;
  for (ClassId c : cloud.labels) ++per_class[c];

  Provenance prov("project");
  prov.parameter("alpha_threshold", args.alpha_threshold);
  prov.input("splats", args.splats);
  prov.input("cameras", args.cameras);
  prov.input("masks", args.masks);
  prov.output("labeled_splats", args.output);
  prov.write(args.output);

  json report;
  report["command"] = "project";
  report["gaussians"] = cloud.size();
  report["views"] = stats.views;
  report["labeled_pixels"] = stats.labeled_pixels;
  report["voting_pixels"] = stats.voting_pixels;
  report["votes"] = votes.total();
  report["dropped_behind_camera"] = stats.projection.behind_camera;
  report["dropped_outside_image"] = stats.projection.outside_image;
  report["dropped_degenerate"] = stats.projection.degenerate;
  json classes = json::object();
  for (const auto& [c, n] : per_class) classes[class_key(c)] = n;
  report["gaussians_per_class"] = classes;
  report["output"] = args.output.generic_string();
  return report;
}

json run_label_mesh(const LabelMeshArgs& args) {
  require_file(args.splats, "splat file");
  require_file(args.mesh, "mesh");
  if (args.knn_k < 1) fail(ErrorKind::Domain, "knn k must be at least 1");
  const GaussianCloud cloud = io::load_gaussian_ply(args.splats);
  if (!cloud.has_labels()) fail(ErrorKind::Input, args.splats.string() + " carries no class_id labels");
  const LabeledMesh mesh = io::load_mesh(args.mesh);

  mesh_label::AssignStats assign;
  LabeledMesh labeled =
      mesh_label::assign_gaussians_to_triangles(cloud.positions, cloud.labels, mesh, args.knn_k, args.threads, &assign);
  mesh_label::FillStats filled;
  if (args.fill) labeled = mesh_label::fill_unlabeled(labeled, mesh_label::kUnlimitedHops, &filled);
  ensure_parent(args.output);
  io::write_labeled_mesh(labeled, args.output);

  const auto summary = mesh_label::summarize(labeled);
  json doc;
  doc["triangles"] = summary.triangles;
  doc["labeled_gaussians"] = assign.labeled_gaussians;
  doc["knn_k"] = args.knn_k;
  doc["before_fill"] = {{"labeled", assign.labeled_triangles}, {"unlabeled", assign.unlabeled_triangles}};
  doc["hole_filling"] = args.fill;
  doc["filled"] = filled.filled;
  doc["labeled"] = summary.labeled;
  doc["unlabeled"] = summary.unlabeled;
  json area = json::object();
  for (const auto& [c, a] : summary.class_area) area[class_key(c)] = a;
  doc["class_area_m2"] = area;
  const fs::path summary_path = with_suffix(args.output, ".summary.json");
  write_text(summary_path, doc.dump(2) + "\n");

  Provenance prov("label-mesh");
  prov.parameter("knn_k", args.knn_k);
  prov.parameter("fill", args.fill);
  prov.input("splats", args.splats);
  prov.input("mesh", args.mesh);
  prov.output("labeled_mesh", args.output);
  prov.output("summary", summary_path);
  prov.write(args.output);

  json report = doc;
  report["command"] = "label-mesh";
  report["output"] = args.output.generic_string();
  return report;
}

json run_assign_pbr(const AssignPbrArgs& args) {
  require_file(args.mesh, "mesh");
  const pbr::MaterialTable table = table_from(args.materials);
  const LabeledMesh mesh = io::load_mesh(args.mesh);
  const pbr::BoundMesh bound = pbr::bind_materials(mesh, table);

  if (args.output.extension() != ".obj") fail(ErrorKind::Format, "assign-pbr writes OBJ; got " + args.output.string());
  const fs::path mtl = fs::path(args.output).replace_extension(".mtl");
  const fs::path binding = fs::path(args.output).replace_extension(".binding.json");
  ensure_parent(args.output);
  write_text(mtl, pbr::to_mtl(table));
  io::write_labeled_mesh(mesh, args.output, mtl.filename().string());

  std::map<ClassId, std::pair<std::size_t, double>> used;
  for (std::size_t t = 0; t < mesh.size(); ++t) {
    auto& u = used[mesh.labels[t]];
    ++u.first;
    u.second += mesh.area(t);
  }
  json doc;
  doc["triangles"] = mesh.size();
  json classes = json::object();
  for (const auto& [c, u] : used) {
    const pbr::PbrMaterial& m = table.resolve(c);
    classes[class_key(c)] = {{"material", m.name},
                             {"triangles", u.first},
                             {"area_m2", u.second},
                             {"diffuse_reflectivity_255", m.diffuse_reflectivity_255},
                             {"fallback", c == kUnlabeled}};
  }
  doc["classes"] = classes;
  write_text(binding, doc.dump(2) + "\n");

  Provenance prov("assign-pbr");
  prov.input("mesh", args.mesh);
  if (args.materials) prov.input("materials", *args.materials);
  else prov.parameter("materials", "built-in default table");
  prov.output("mesh", args.output);
  prov.output("mtl", mtl);
  prov.output("binding", binding);
  prov.write(args.output);

  json report = doc;
  report["command"] = "assign-pbr";
  report["output"] = args.output.generic_string();
  return report;
}

json run_simulate(const SimulateArgs& args) {
  require_file(args.mesh, "mesh");
  require_file(args.trajectory, "trajectory");
  if (args.pattern) require_file(*args.pattern, "scan pattern");
  if (!(args.range_noise >= 0) || !(args.power_noise >= 0)) fail(ErrorKind::Domain, "noise sigmas must be non-negative");
  const pbr::MaterialTable table = table_from(args.materials);
  const lidar::ScanPattern pattern = args.pattern ? lidar::load_scan_pattern(*args.pattern) : lidar::ScanPattern{};
  const Trajectory trajectory = io::load_trajectory(args.trajectory);
  const pbr::BoundMesh bound = pbr::bind_materials(io::load_mesh(args.mesh), table);

  lidar::SimulationOptions options;
  options.threads = args.threads;
  options.noise.enabled = args.range_noise > 0 || args.power_noise > 0;
  options.noise.range_sigma = args.range_noise;
  options.noise.power_sigma_relative = args.power_noise;
  options.noise.seed = args.seed;
  lidar::SimulationStats stats;
  const auto returns = lidar::simulate_scan(bound, pattern, trajectory, options, &stats);

  ensure_parent(args.output);
  if (args.output.extension() == ".bin") lidar::write_returns_binary(returns, args.output);
  else if (args.output.extension() == ".csv") lidar::write_returns_csv(returns, args.output);
  else fail(ErrorKind::Format, "point cloud output must end in .bin or .csv: " + args.output.string());

  struct Acc {
    std::size_t n = 0;
    std::uint64_t sum = 0;
    int lo = 255, hi = 0;
  };
  std::map<ClassId, Acc> per_class;
  for (const auto& r : returns) {
    Acc& a = per_class[r.class_id];
    ++a.n;
    a.sum += r.reflectivity;
    a.lo = std::min<int>(a.lo, r.reflectivity);
    a.hi = std::max<int>(a.hi, r.reflectivity);
  }
  json doc;
  doc["revolutions"] = stats.revolutions;
  doc["rays"] = stats.rays;
  doc["returns"] = stats.returns;
  doc["pattern"] = json::parse(lidar::to_json(pattern));
  json classes = json::object();
  for (const auto& [c, a] : per_class)
    classes[class_key(c)] = {{"material", table.resolve(c).name},
                             {"returns", a.n},
                             {"mean_reflectivity", static_cast<double>(a.sum) / static_cast<double>(a.n)},
                             {"min_reflectivity", a.lo},
                             {"max_reflectivity", a.hi},
                             {"table_reflectivity", table.resolve(c).diffuse_reflectivity_255}};
  doc["classes"] = classes;
  const fs::path report_path = with_suffix(args.output, ".report.json");
  write_text(report_path, doc.dump(2) + "\n");

  Provenance prov("simulate");
  prov.parameter("pattern", json::parse(lidar::to_json(pattern)));
  prov.parameter("range_noise_m", args.range_noise);
  prov.parameter("power_noise_relative", args.power_noise);
  prov.parameter("seed", args.seed);
  prov.input("mesh", args.mesh);
  if (args.materials) prov.input("materials", *args.materials);
  else prov.parameter("materials", "built-in default table");
  prov.input("trajectory", args.trajectory);
  if (args.pattern) prov.input("pattern", *args.pattern);
  prov.output("point_cloud", args.output);
  prov.output("report", report_path);
  prov.write(args.output);

  json report = doc;
  report["command"] = "simulate";
  report["output"] = args.output.generic_string();
  return report;
}

json run_evaluate(const EvaluateArgs& args) {
  require_file(args.sim, "simulated point cloud");
  require_file(args.ref, "reference point cloud");
  for (const auto& [a, b] : args.image_pairs) {
    require_file(a, "image");
    require_file(b, "reference image");
  }
  const auto sim = lidar::read_returns(args.sim);
  const auto ref = lidar::read_returns(args.ref);
  std::vector<Vec3> sim_xyz, ref_xyz;
  std::vector<std::uint8_t> sim_refl, ref_refl;
  for (const auto& r : sim) {
    sim_xyz.push_back(r.point);
    sim_refl.push_back(r.reflectivity);
  }
  for (const auto& r : ref) {
    ref_xyz.push_back(r.point);
    ref_refl.push_back(r.reflectivity);
  }
  const auto match = metrics::match_points(sim_xyz, ref_xyz, args.match_radius, args.threads);
  const auto errors = metrics::reflectivity_errors(match.pairs, sim_refl, ref_refl);
  const auto overall = metrics::summarize_errors(errors);

  std::map<ClassId, std::vector<double>> by_class;
  for (std::size_t i = 0; i < match.pairs.size(); ++i) by_class[sim[match.pairs[i].sim].class_id].push_back(errors[i]);

  json doc;
  doc["sim_points"] = sim.size();
  doc["ref_points"] = ref.size();
  doc["match_radius_m"] = args.match_radius;
  doc["matched"] = match.pairs.size();
  doc["unmatched"] = match.unmatched;
  doc["match_fraction"] = match.match_fraction(sim.size());
  doc["mae"] = overall.mae;
  doc["median"] = overall.median;
  json classes = json::object();
  for (const auto& [c, e] : by_class) {
    const auto s = metrics::summarize_errors(e);
    classes[class_key(c)] = {{"count", s.count}, {"mae", s.mae}, {"median", s.median}};
  }
  doc["per_class"] = classes;
  json images = json::array();
  for (const auto& [a, b] : args.image_pairs) {
    const Image8 ia = io::read_image(a), ib = io::read_image(b);
    images.push_back({{"image", a.generic_string()},
                      {"reference", b.generic_string()},
                      {"psnr_db", number_or_inf(metrics::psnr(ia, ib))},
                      {"ssim", metrics::ssim(ia, ib, args.threads)}});
  }
  doc["images"] = images;
  write_text(args.output, doc.dump(2) + "\n");

  if (args.errors_csv) {
    std::string out = "sim_index,ref_index,distance,sim_reflectivity,ref_reflectivity,abs_error,class_id\n";
    char buf[160];
    for (std::size_t i = 0; i < match.pairs.size(); ++i) {
      const auto& m = match.pairs[i];
      const int n = std::snprintf(buf, sizeof buf, "%zu,%zu,%.9g,%u,%u,%.17g,%u\n", m.sim, m.ref, m.distance,
                                  unsigned(sim_refl[m.sim]), unsigned(ref_refl[m.ref]), errors[i],
                                  unsigned(sim[m.sim].class_id));
      out.append(buf, static_cast<std::size_t>(n));
    }
    write_text(*args.errors_csv, out);
  }

  Provenance prov("evaluate");
  prov.parameter("match_radius_m", args.match_radius);
  prov.input("sim", args.sim);
  prov.input("ref", args.ref);
  for (std::size_t i = 0; i < args.image_pairs.size(); ++i) {
    prov.input("image_" + std::to_string(i), args.image_pairs[i].first);
    prov.input("reference_image_" + std::to_string(i), args.image_pairs[i].second);
  }
  prov.output("report", args.output);
  if (args.errors_csv) prov.output("errors_csv", *args.errors_csv);
  prov.write(args.output);

  json report = doc;
  report["command"] = "evaluate";
  report["output"] = args.output.generic_string();
  return report;
}

json run_pipeline(const PipelineArgs& args) {
  require_file(args.manifest, "manifest");
  json manifest;
  {
    std::ifstream in(args.manifest);
    try {
      manifest = json::parse(in);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::Format, args.manifest.string() + ": " + e.what());
    }
  }
  if (!manifest.is_object() || !manifest.contains("scenes") || !manifest["scenes"].is_array())
    fail(ErrorKind::Schema, args.manifest.string() + ": expected an object with a \"scenes\" array");
  const fs::path base = args.manifest.parent_path();

  // Validate every scene's paths up front so a bad manifest fails before any work.
  struct SceneSpec {
    std::string name;
    fs::path splats, mesh, cameras, masks, trajectory, output;
    std::optional<fs::path> instances, materials, pattern, reference;
    std::vector<std::pair<fs::path, fs::path>> images;
  };
  std::vector<SceneSpec> scenes;
  std::set<std::string> names;
  for (const auto& entry : manifest["scenes"]) {
    if (!entry.is_object()) fail(ErrorKind::Schema, "manifest scene entries must be objects");
    auto str = [&](const char* key, bool required) -> std::optional<std::string> {
      if (!entry.contains(key)) {
        if (required) fail(ErrorKind::Schema, std::string("manifest scene lacks \"") + key + "\"");
        return std::nullopt;
      }
      if (!entry[key].is_string()) fail(ErrorKind::Schema, std::string("manifest \"") + key + "\" must be a string");
      return entry[key].get<std::string>();
    };
    auto path = [&](const char* key) -> std::optional<fs::path> {
      const auto s = str(key, false);
      if (!s) return std::nullopt;
      return base / *s;
    };
    SceneSpec s;
    s.name = *str("name", true);
    if (!names.insert(s.name).second) fail(ErrorKind::Schema, "duplicate scene name '" + s.name + "'");
    s.splats = base / *str("splats", true);
    s.mesh = base / *str("mesh", true);
    s.cameras = base / *str("cameras", true);
    s.masks = base / *str("masks", true);
    s.trajectory = base / *str("trajectory", true);
    s.instances = path("instances");
    s.materials = path("materials");
    s.pattern = path("pattern");
    s.reference = path("reference");
    s.output = base / str("output", false).value_or("output/" + s.name);
    if (entry.contains("images")) {
      if (!entry["images"].is_array()) fail(ErrorKind::Schema, "manifest \"images\" must be an array");
      for (const auto& pair : entry["images"]) {
        if (!pair.is_object() || !pair.contains("image") || !pair.contains("reference") ||
            !pair["image"].is_string() || !pair["reference"].is_string())
          fail(ErrorKind::Schema, "manifest image entries need \"image\" and \"reference\" strings");
        s.images.emplace_back(base / pair["image"].get<std::string>(), base / pair["reference"].get<std::string>());
      }
    }
    require_file(s.splats, "splat file");
    require_file(s.mesh, "mesh");
    require_dir(s.cameras, "camera model");
    require_dir(s.masks, "mask directory");
    require_file(s.trajectory, "trajectory");
    if (s.instances) require_dir(*s.instances, "instance directory");
    if (s.materials) require_file(*s.materials, "material table");
    if (s.pattern) require_file(*s.pattern, "scan pattern");
    if (s.reference) require_file(*s.reference, "reference scan");
    scenes.push_back(std::move(s));
  }
  if (scenes.empty()) fail(ErrorKind::Schema, "manifest lists no scenes");

  json report;
  report["command"] = "pipeline";
  report["scenes"] = json::array();
  for (const SceneSpec& s : scenes) {
    fs::create_directories(s.output);
    json stages;
    fs::path masks = s.masks;
    if (s.instances) {
      masks = s.output / "refined_masks";
      fs::create_directories(masks);
      json refined = json::array();
      for (const auto& cam : io::load_cameras(s.cameras)) {
        RefineArgs r;
        r.materials = find_view_file(s.masks, cam.id, {".png", ".pgm"});
        r.instances = find_view_file(*s.instances, cam.id, {".png", ".pgm"});
        r.output = masks / r.materials.filename();
        r.threads = args.threads;
        refined.push_back(run_refine(r));
      }
      stages["refine"] = refined;
    }

    ProjectArgs p;
    p.splats = s.splats;
    p.cameras = s.cameras;
    p.masks = masks;
    p.output = s.output / "labeled_splats.ply";
    p.alpha_threshold = args.alpha_threshold;
    p.threads = args.threads;
    stages["project"] = run_project(p);

    LabelMeshArgs l;
    l.splats = p.output;
    l.mesh = s.mesh;
    l.output = s.output / "labeled_mesh.ply";
    l.knn_k = args.knn_k;
    l.fill = args.fill;
    l.threads = args.threads;
    stages["label_mesh"] = run_label_mesh(l);

    AssignPbrArgs a;
    a.mesh = l.output;
    a.materials = s.materials;
    a.output = s.output / "material_mesh.obj";
    stages["assign_pbr"] = run_assign_pbr(a);

    SimulateArgs sim;
    sim.mesh = a.output;
    sim.materials = s.materials;
    sim.trajectory = s.trajectory;
    sim.pattern = args.pattern ? args.pattern : s.pattern;
    sim.output = s.output / "scan.bin";
    sim.range_noise = args.range_noise;
    sim.power_noise = args.power_noise;
    sim.seed = args.seed;
    sim.threads = args.threads;
    stages["simulate"] = run_simulate(sim);

    if (s.reference) {
      EvaluateArgs e;
      e.sim = sim.output;
      e.ref = *s.reference;
      e.output = s.output / "evaluation.json";
      e.errors_csv = s.output / "evaluation_errors.csv";
      e.match_radius = args.match_radius;
      e.image_pairs = s.images;
      e.threads = args.threads;
      stages["evaluate"] = run_evaluate(e);
    }
    report["scenes"].push_back({{"name", s.name}, {"output", s.output.generic_string()}, {"stages", stages}});
  }
  return report;
}

}  // namespace matsplat::app
