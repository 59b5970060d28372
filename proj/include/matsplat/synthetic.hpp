#pragma once

#include <filesystem>
#include <vector>

#include "matsplat/lidar.hpp"
#include "matsplat/pbr.hpp"
#include "matsplat/types.hpp"

namespace matsplat::synthetic {

/// Analytic street scene: an asphalt ground plane and a concrete facade with a
/// glass panel. Everything else (splats, camera views, masks, trajectory) is
/// derived from that geometry, so the ground truth is exact.
struct SceneOptions {
  double cell = 1.0;            // mesh grid spacing, meters
  double splat_spacing = 0.25;  // splat grid spacing on every surface, meters
  double splat_opacity = 0.95;
  int image_width = 320;
  int image_height = 240;
  double focal = 200.0;
  double trajectory_seconds = 0.5;
  lidar::ScanPattern pattern{};
};

struct Scene {
  LabeledMesh ground_truth;
  LabeledMesh unlabeled;  // same geometry, every triangle kUnlabeled
  GaussianCloud splats;   // no labels
  std::vector<ClassId> splat_truth;
  std::vector<CameraModel> cameras;
  std::vector<MaterialMap> masks;  // rendered from ground_truth
  Trajectory trajectory;
  pbr::MaterialTable table;
  lidar::ScanPattern pattern;
};

Scene make_twin_scene(const SceneOptions& options = {});

/// Per-pixel first-hit class of `mesh` seen from `camera` (kUnlabeled for misses).
MaterialMap render_class_mask(const LabeledMesh& mesh, const CameraModel& camera, const Palette& palette);

/// Camera at `center` looking along heading `yaw` (radians from +X toward +Y),
/// tilted down by `pitch` radians.
CameraModel look_camera(std::string id, const Vec3& center, double yaw, double pitch, int width, int height,
                        double focal);

/// Writes the scene as pipeline inputs plus a manifest.json naming them; with
/// `with_reference`, also a reference scan simulated on the ground-truth mesh.
void write_scene(const Scene& scene, const std::filesystem::path& dir, bool with_reference = true, int threads = 1);

}  // namespace matsplat::synthetic
