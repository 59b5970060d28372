#include "matsplat/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "matsplat/bvh.hpp"
#include "matsplat/error.hpp"
#include "matsplat/io/io.hpp"

namespace matsplat::synthetic {

namespace {

// Scene layout, meters. The facade stands at the far edge of the ground.
constexpr double kGroundX0 = -12, kGroundX1 = 12, kGroundY0 = -4, kGroundY1 = 10;
constexpr double kWallZ1 = 6;
constexpr double kGlassX0 = -3, kGlassX1 = 3, kGlassZ0 = 1, kGlassZ1 = 4;

ClassId wall_class(double x, double z) {
  return (x > kGlassX0 && x < kGlassX1 && z > kGlassZ0 && z < kGlassZ1) ? classes::kGlass : classes::kConcrete;
}

/// Adds a grid over origin + a*u + b*v, a in [0, nu*cell], b in [0, nv*cell];
/// triangles face u x v. `label(a, b)` gives the class at a cell center.
template <typename LabelFn>
void add_plane(LabeledMesh& mesh, const Vec3& origin, const Vec3& u, const Vec3& v, int nu, int nv, double cell,
               LabelFn&& label) {
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  for (int j = 0; j <= nv; ++j)
    for (int i = 0; i <= nu; ++i) mesh.vertices.push_back(origin + (i * cell) * u + (j * cell) * v);
  auto vid = [&](int i, int j) { return base + static_cast<std::uint32_t>(j * (nu + 1) + i); };
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nu; ++i) {
      const ClassId c = label((i + 0.5) * cell, (j + 0.5) * cell);
      mesh.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      mesh.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
      mesh.labels.push_back(c);
      mesh.labels.push_back(c);
    }
  }
}

template <typename LabelFn>
void add_splats(GaussianCloud& cloud, std::vector<ClassId>& truth, const Vec3& origin, const Vec3& u,
                const Vec3& v, double extent_u, double extent_v, const Quat& rotation, const SceneOptions& o,
                LabelFn&& label) {
  const int nu = static_cast<int>(std::round(extent_u / o.splat_spacing));
  const int nv = static_cast<int>(std::round(extent_v / o.splat_spacing));
  const Vec3 scale(0.6 * o.splat_spacing, 0.6 * o.splat_spacing, 0.02);
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nu; ++i) {
      const double a = (i + 0.5) * o.splat_spacing, b = (j + 0.5) * o.splat_spacing;
      cloud.positions.push_back(origin + a * u + b * v);
      cloud.scales.push_back(scale);
      cloud.rotations.push_back(rotation);
      cloud.opacities.push_back(o.splat_opacity);
      truth.push_back(label(a, b));
    }
  }
}

}  // namespace

CameraModel look_camera(std::string id, const Vec3& center, double yaw, double pitch, int width, int height,
                        double focal) {
  const Vec3 forward(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), -std::sin(pitch));
  const Vec3 right = forward.cross(Vec3::UnitZ()).normalized();
  const Vec3 down = forward.cross(right);
  CameraModel cam;
  cam.id = std::move(id);
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = focal;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -(cam.rotation * center);
  return cam;
}

MaterialMap render_class_mask(const LabeledMesh& mesh, const CameraModel& camera, const Palette& palette) {
  const Bvh bvh(mesh);
  MaterialMap map;
  map.width = camera.width;
  map.height = camera.height;
  map.palette = palette;
  map.pixels.assign(static_cast<std::size_t>(camera.width) * camera.height, kUnlabeled);
  const Mat3 cam_to_world = camera.rotation.transpose();
  const Vec3 origin = camera.center();
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const Vec3 local((x + 0.5 - camera.cx) / camera.fx, (y + 0.5 - camera.cy) / camera.fy, 1.0);
      const Ray ray{origin, (cam_to_world * local).normalized()};
      if (const auto hit = bvh.trace(ray, 1e4))
        map.pixels[static_cast<std::size_t>(y) * camera.width + x] = mesh.labels[hit->triangle];
    }
  }
  return map;
}

Scene make_twin_scene(const SceneOptions& o) {
  Scene s;
  s.table = pbr::default_table();
  s.pattern = o.pattern;
  const Palette palette = s.table.palette();

  const int gx = static_cast<int>(std::round((kGroundX1 - kGroundX0) / o.cell));
  const int gy = static_cast<int>(std::round((kGroundY1 - kGroundY0) / o.cell));
  const int wz = static_cast<int>(std::round(kWallZ1 / o.cell));
  const Vec3 ground_origin(kGroundX0, kGroundY0, 0.0);
  const Vec3 wall_origin(kGroundX0, kGroundY1, 0.0);

  LabeledMesh& mesh = s.ground_truth;
  add_plane(mesh, ground_origin, Vec3::UnitX(), Vec3::UnitY(), gx, gy, o.cell,
            [](double, double) { return classes::kAsphalt; });
  add_plane(mesh, wall_origin, Vec3::UnitX(), Vec3::UnitZ(), gx, wz, o.cell,
            [](double a, double b) { return wall_class(kGroundX0 + a, b); });
  mesh.finalize();
  s.unlabeled = mesh;
  std::fill(s.unlabeled.labels.begin(), s.unlabeled.labels.end(), kUnlabeled);

  add_splats(s.splats, s.splat_truth, ground_origin, Vec3::UnitX(), Vec3::UnitY(), kGroundX1 - kGroundX0,
             kGroundY1 - kGroundY0, Quat::Identity(), o, [](double, double) { return classes::kAsphalt; });
  // Thin axis along the facade normal (-Y).
  const Quat wall_rot(Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitX()));
  add_splats(s.splats, s.splat_truth, wall_origin, Vec3::UnitX(), Vec3::UnitZ(), kGroundX1 - kGroundX0, kWallZ1,
             wall_rot, o, [](double a, double b) { return wall_class(kGroundX0 + a, b); });
  s.splats.validate();

  // Elevated views from two rows, each looking in four directions. Views facing
  // the facade tilt down less so its top edge stays in frame.
  constexpr double deg = std::numbers::pi / 180.0;
  int view = 0;
  for (double y : {-2.0, 4.0}) {
    for (double x : {-9.0, -3.0, 3.0, 9.0}) {
      for (double yaw : {90.0, -90.0, 0.0, 180.0}) {
        char name[32];
        std::snprintf(name, sizeof name, "view_%03d.png", view++);
        const double pitch = yaw == 90.0 ? 10.0 : 30.0;
        s.cameras.push_back(look_camera(name, Vec3(x, y, 4.0), yaw * deg, pitch * deg, o.image_width,
                                        o.image_height, o.focal));
      }
    }
  }
  for (const auto& cam : s.cameras) s.masks.push_back(render_class_mask(mesh, cam, palette));

  // Sensor at roof height driving along +X in front of the facade.
  const Vec3 start(-6.0, 2.0, 1.8), end(6.0, 2.0, 1.8);
  for (int k = 0; k <= 2; ++k) {
    Pose p;
    p.timestamp = o.trajectory_seconds * k / 2.0;
    p.translation = start + (end - start) * (k / 2.0);
    s.trajectory.poses.push_back(p);
  }
  return s;
}

void write_scene(const Scene& scene, const std::filesystem::path& dir, bool with_reference, int threads) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "masks");
  io::write_gaussian_ply(scene.splats, dir / "splats.ply");
  io::write_labeled_mesh(scene.unlabeled, dir / "mesh.ply");
  io::write_labeled_mesh(scene.ground_truth, dir / "ground_truth_mesh.ply");
  io::write_cameras(scene.cameras, dir / "sparse");
  for (std::size_t i = 0; i < scene.cameras.size(); ++i)
    io::write_mask(scene.masks[i], dir / "masks" / scene.cameras[i].id);
  io::write_trajectory(scene.trajectory, dir / "trajectory.csv");
  pbr::write_material_table(scene.table, dir / "materials.json");
  {
    std::ofstream out(dir / "pattern.json");
    out << lidar::to_json(scene.pattern);
  }

  nlohmann::ordered_json entry;
  entry["name"] = "synthetic_twin";
  entry["splats"] = "splats.ply";
  entry["mesh"] = "mesh.ply";
  entry["cameras"] = "sparse";
  entry["masks"] = "masks";
  entry["trajectory"] = "trajectory.csv";
  entry["materials"] = "materials.json";
  entry["pattern"] = "pattern.json";
  if (with_reference) {
    lidar::SimulationOptions sim;
    sim.threads = threads;
    const auto bound = pbr::bind_materials(scene.ground_truth, scene.table);
    lidar::write_returns_binary(lidar::simulate_scan(bound, scene.pattern, scene.trajectory, sim),
                                dir / "reference.bin");
    entry["reference"] = "reference.bin";
  }
  entry["output"] = "output";
  nlohmann::ordered_json manifest;
  manifest["scenes"] = nlohmann::ordered_json::array({entry});
  std::ofstream out(dir / "manifest.json");
  if (!out) fail(ErrorKind::Io, "cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << "\n";
}

}  // namespace matsplat::synthetic
