#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "matsplat/geometry.hpp"

namespace matsplat {

using ClassId = std::uint8_t;

/// Sentinel shared by masks, Gaussians and triangles for "no material".
inline constexpr ClassId kUnlabeled = 255;

/// The urban material classes recognized by the default palette and table.
namespace classes {
inline constexpr ClassId kGlass = 0;
inline constexpr ClassId kBrickCeramic = 1;
inline constexpr ClassId kConcrete = 2;
inline constexpr ClassId kAsphalt = 3;
inline constexpr ClassId kVegetation = 4;
inline constexpr ClassId kMetal = 5;
inline constexpr ClassId kPlastic = 6;
inline constexpr ClassId kGravel = 7;
inline constexpr ClassId kTreeTrunk = 8;
inline constexpr ClassId kRubber = 9;
}  // namespace classes

using Palette = std::map<ClassId, std::string>;

/// Palette of the ten urban classes, ids as in `classes`.
const Palette& default_palette();

/// Pinhole camera. Extrinsics map world points into the camera frame
/// (+Z forward, +X right, +Y down). Pixel (i, j) has its center at (i + 0.5, j + 0.5).
struct CameraModel {
  std::string id;
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
  Vec3 center() const { return -(rotation.transpose() * translation); }

  /// Throws Error(Data) when an invariant does not hold.
  void validate() const;
};

/// Splats with physical (already activated) parameters.
struct GaussianCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> scales;
  std::vector<Quat> rotations;
  std::vector<double> opacities;

  /// Per-splat pass-through attributes (colors, normals, ...), row-major
  /// size() x extra_names.size(). Never interpreted.
  std::vector<std::string> extra_names;
  std::vector<float> extra_values;

  /// Optional per-splat material label, written as a `class_id` property.
  std::vector<ClassId> labels;

  std::size_t size() const { return positions.size(); }
  bool has_labels() const { return !labels.empty(); }

  /// World-frame covariance R S S^T R^T of splat i.
  Mat3 covariance(std::size_t i) const;

  void validate() const;
};

/// Per-pixel class ids, row-major.
struct MaterialMap {
  int width = 0, height = 0;
  std::vector<ClassId> pixels;
  Palette palette;

  ClassId at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  void validate() const;
};

struct InstanceSet {
  int width = 0, height = 0;
  /// One binary mask (0/1 per pixel, row-major) per instance.
  std::vector<std::vector<std::uint8_t>> masks;

  std::size_t size() const { return masks.size(); }
  std::size_t pixel_count(std::size_t instance) const;
  /// Throws Error(Shape) if any mask has the wrong number of pixels.
  void validate() const;
};

struct Triangle {
  std::uint32_t a, b, c;
};

struct LabeledMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<ClassId> labels;
  std::vector<Vec3> normals;

  std::size_t size() const { return triangles.size(); }

  /// Recomputes unit normals from winding (counter-clockwise is the front face).
  /// Throws Error(Data) on an out-of-range index or a triangle with area <= 1e-12.
  void finalize();

  Vec3 centroid(std::size_t t) const;
  double area(std::size_t t) const;
};

inline constexpr double kMinTriangleArea = 1e-12;

struct Pose {
  double timestamp = 0;
  /// Sensor-to-world transform.
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();
};

struct Trajectory {
  std::vector<Pose> poses;

  double duration() const {
    return poses.empty() ? 0.0 : poses.back().timestamp - poses.front().timestamp;
  }
  /// Linear translation and spherical-linear rotation between bracketing samples.
  /// Times outside the recorded span clamp to the ends.
  Pose interpolate(double t) const;
  void validate() const;
};

}  // namespace matsplat
