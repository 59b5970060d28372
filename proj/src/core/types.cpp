#include "matsplat/error.hpp"
#include "matsplat/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace matsplat {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::UnsupportedModel: return "unsupported-model";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Data: return "data";
    case ErrorKind::Reference: return "reference";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Range: return "range";
    case ErrorKind::UnmappedClass: return "unmapped-class";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Input: return "input";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const Mat3 gram = r.transpose() * r;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

Mat3 rotation_from_wxyz(double w, double x, double y, double z) {
  Quat q(w, x, y, z);
  const double n = q.norm();
  if (!(n > 0) || !std::isfinite(n)) fail(ErrorKind::Data, "quaternion has zero or non-finite norm");
  q.coeffs() /= n;
  return q.toRotationMatrix();
}

const Palette& default_palette() {
  static const Palette palette = {
      {classes::kGlass, "glass"},         {classes::kBrickCeramic, "brick_ceramic"},
      {classes::kConcrete, "concrete"},   {classes::kAsphalt, "asphalt"},
      {classes::kVegetation, "vegetation"}, {classes::kMetal, "metal"},
      {classes::kPlastic, "plastic"},     {classes::kGravel, "gravel"},
      {classes::kTreeTrunk, "tree_trunk"}, {classes::kRubber, "rubber"},
  };
  return palette;
}

void CameraModel::validate() const {
  std::ostringstream why;
  if (!(fx > 0) || !(fy > 0)) why << "focal lengths must be positive; ";
  if (width <= 0 || height <= 0) why << "image size must be positive; ";
  if (!(cx > 0 && cx < width) || !(cy > 0 && cy < height))
    why << "principal point outside the image; ";
  if (!is_rotation(rotation)) why << "rotation is not orthonormal with det +1; ";
  if (!translation.allFinite()) why << "translation is not finite; ";
  const std::string msg = why.str();
  if (!msg.empty()) fail(ErrorKind::Data, "camera '" + id + "': " + msg.substr(0, msg.size() - 2));
}

Mat3 GaussianCloud::covariance(std::size_t i) const {
  const Mat3 r = rotations[i].toRotationMatrix();
  const Vec3 s2 = scales[i].cwiseProduct(scales[i]);
  return r * s2.asDiagonal() * r.transpose();
}

void GaussianCloud::validate() const {
  const std::size_t n = positions.size();
  if (scales.size() != n || rotations.size() != n || opacities.size() != n)
    fail(ErrorKind::Data, "gaussian cloud attribute arrays differ in length");
  if (!labels.empty() && labels.size() != n)
    fail(ErrorKind::Data, "gaussian label array length does not match splat count");
  if (extra_values.size() != n * extra_names.size())
    fail(ErrorKind::Data, "gaussian pass-through attribute array has the wrong size");
  for (std::size_t i = 0; i < n; ++i) {
    const auto where = [&] { return " at splat " + std::to_string(i); };
    if (!positions[i].allFinite()) fail(ErrorKind::Data, "non-finite position" + where());
    if (!scales[i].allFinite() || scales[i].minCoeff() <= 0)
      fail(ErrorKind::Data, "scale must be finite and positive" + where());
    if (!rotations[i].coeffs().allFinite() || std::abs(rotations[i].norm() - 1.0) > 1e-6)
      fail(ErrorKind::Data, "rotation quaternion is not unit-norm" + where());
    if (!(opacities[i] >= 0.0 && opacities[i] <= 1.0))
      fail(ErrorKind::Data, "opacity outside [0,1]" + where());
  }
}

void MaterialMap::validate() const {
  if (width <= 0 || height <= 0) fail(ErrorKind::Shape, "material map has empty dimensions");
  if (pixels.size() != static_cast<std::size_t>(width) * height)
    fail(ErrorKind::Shape, "material map pixel count does not match its dimensions");
  std::vector<bool> seen(256, false);
  for (ClassId c : pixels) seen[c] = true;
  for (int c = 0; c < 255; ++c) {
    if (seen[c] && !palette.count(static_cast<ClassId>(c)))
      fail(ErrorKind::Data, "class id " + std::to_string(c) + " is not in the palette");
  }
}

std::size_t InstanceSet::pixel_count(std::size_t instance) const {
  const auto& m = masks[instance];
  return static_cast<std::size_t>(std::count_if(m.begin(), m.end(), [](std::uint8_t v) { return v != 0; }));
}

void InstanceSet::validate() const {
  const std::size_t expected = static_cast<std::size_t>(width) * height;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (masks[i].size() != expected)
      fail(ErrorKind::Shape, "instance " + std::to_string(i) + " has " +
                                 std::to_string(masks[i].size()) + " pixels, expected " +
                                 std::to_string(expected));
  }
}

Vec3 LabeledMesh::centroid(std::size_t t) const {
  const Triangle& tri = triangles[t];
  return (vertices[tri.a] + vertices[tri.b] + vertices[tri.c]) / 3.0;
}

double LabeledMesh::area(std::size_t t) const {
  const Triangle& tri = triangles[t];
  return 0.5 * (vertices[tri.b] - vertices[tri.a]).cross(vertices[tri.c] - vertices[tri.a]).norm();
}

void LabeledMesh::finalize() {
  if (labels.empty()) labels.assign(triangles.size(), kUnlabeled);
  if (labels.size() != triangles.size())
    fail(ErrorKind::Data, "mesh label count does not match triangle count");
  for (const Vec3& v : vertices)
    if (!v.allFinite()) fail(ErrorKind::Data, "mesh has a non-finite vertex");
  normals.resize(triangles.size());
  const auto nv = vertices.size();
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Triangle& tri = triangles[t];
    if (tri.a >= nv || tri.b >= nv || tri.c >= nv)
      fail(ErrorKind::Data, "face " + std::to_string(t) + " references a vertex out of range");
    const Vec3 cross = (vertices[tri.b] - vertices[tri.a]).cross(vertices[tri.c] - vertices[tri.a]);
    const double len = cross.norm();
    if (!(0.5 * len > kMinTriangleArea))
      fail(ErrorKind::Data, "face " + std::to_string(t) + " is degenerate");
    normals[t] = cross / len;
  }
}

Pose Trajectory::interpolate(double t) const {
  if (poses.empty()) fail(ErrorKind::Input, "empty trajectory");
  if (t <= poses.front().timestamp) return poses.front();
  if (t >= poses.back().timestamp) return poses.back();
  const auto it = std::upper_bound(poses.begin(), poses.end(), t,
                                   [](double v, const Pose& p) { return v < p.timestamp; });
  const Pose& b = *it;
  const Pose& a = *(it - 1);
  const double u = (t - a.timestamp) / (b.timestamp - a.timestamp);
  Pose out;
  out.timestamp = t;
  out.translation = (1.0 - u) * a.translation + u * b.translation;
  out.rotation = a.rotation.slerp(u, b.rotation).normalized();
  return out;
}

void Trajectory::validate() const {
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (!std::isfinite(poses[i].timestamp) || !poses[i].translation.allFinite())
      fail(ErrorKind::Data, "trajectory sample " + std::to_string(i) + " is not finite");
    if (i > 0 && !(poses[i].timestamp > poses[i - 1].timestamp))
      fail(ErrorKind::Data, "trajectory timestamps must be strictly increasing (sample " +
                                std::to_string(i) + ")");
    if (!is_rotation(poses[i].rotation.toRotationMatrix()))
      fail(ErrorKind::Data, "trajectory sample " + std::to_string(i) + " has an invalid rotation");
  }
}

}  // namespace matsplat
