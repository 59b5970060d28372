#include "matsplat/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace matsplat {

namespace {

bool better(const Hit& a, const Hit& b) {
  if (a.range != b.range) return a.range < b.range;
  return a.triangle < b.triangle;
}

// Slab test; returns the entry distance or +inf on a miss.
double box_entry(const Eigen::AlignedBox3d& box, const Vec3& origin, const Vec3& inv_dir, double max_t) {
  double t0 = 0.0, t1 = max_t;
  for (int a = 0; a < 3; ++a) {
    double near = (box.min()[a] - origin[a]) * inv_dir[a];
    double far = (box.max()[a] - origin[a]) * inv_dir[a];
    if (std::isnan(near) || std::isnan(far)) {
      // Ray parallel to the slab and starting on its plane: inside iff within bounds.
      if (origin[a] < box.min()[a] || origin[a] > box.max()[a]) return std::numeric_limits<double>::infinity();
      continue;
    }
    if (near > far) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return std::numeric_limits<double>::infinity();
  }
  return t0;
}

}  // namespace

std::optional<Hit> intersect_triangle(const LabeledMesh& mesh, std::uint32_t triangle, const Ray& ray,
                                      double max_range) {
  const Triangle& tri = mesh.triangles[triangle];
  const Vec3& v0 = mesh.vertices[tri.a];
  const Vec3 e1 = mesh.vertices[tri.b] - v0;
  const Vec3 e2 = mesh.vertices[tri.c] - v0;
  const Vec3 n = mesh.normals[triangle];
  const double facing = -n.dot(ray.direction);
  if (!(facing > kGrazingCutoff)) return std::nullopt;  // back face, parallel or grazing

  // Moeller-Trumbore.
  const Vec3 p = ray.direction.cross(e2);
  const double det = e1.dot(p);
  if (det == 0.0) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 s = ray.origin - v0;
  const double u = s.dot(p) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = ray.direction.dot(q) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(q) * inv_det;
  if (!(t >= kMinHitRange) || !(t <= max_range)) return std::nullopt;
  return Hit{triangle, t, facing};
}

std::optional<Hit> trace_brute_force(const LabeledMesh& mesh, const Ray& ray, double max_range) {
  std::optional<Hit> best;
  for (std::uint32_t t = 0; t < mesh.size(); ++t) {
    const auto h = intersect_triangle(mesh, t, ray, max_range);
    if (h && (!best || better(*h, *best))) best = h;
  }
  return best;
}

Bvh::Bvh(const LabeledMesh& mesh, std::size_t leaf_size)
    : mesh_(&mesh), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  order_.resize(mesh.size());
  std::vector<Vec3> centroids(mesh.size());
  for (std::uint32_t t = 0; t < mesh.size(); ++t) {
    order_[t] = t;
    centroids[t] = mesh.centroid(t);
  }
  if (!order_.empty()) build(0, static_cast<std::uint32_t>(order_.size()), centroids);
}

std::int32_t Bvh::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({});
  Eigen::AlignedBox3d box;
  Eigen::AlignedBox3d cbox;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Triangle& tri = mesh_->triangles[order_[i]];
    box.extend(mesh_->vertices[tri.a]).extend(mesh_->vertices[tri.b]).extend(mesh_->vertices[tri.c]);
    cbox.extend(centroids[order_[i]]);
  }
  const double pad = 1e-9 * (1.0 + box.sizes().maxCoeff() + box.min().cwiseAbs().maxCoeff() +
                             box.max().cwiseAbs().maxCoeff());
  box.min().array() -= pad;
  box.max().array() += pad;
  nodes_[id].box = box;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= leaf_size_) return id;

  int axis = 0;
  cbox.sizes().maxCoeff(&axis);
  if (!(cbox.sizes()[axis] > 0)) return id;
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return centroids[a][axis] < centroids[b][axis]; });
  const std::int32_t left = build(begin, mid, centroids);
  const std::int32_t right = build(mid, end, centroids);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::optional<Hit> Bvh::trace(const Ray& ray, double max_range) const {
  std::optional<Hit> best;
  if (nodes_.empty()) return best;
  const Vec3 inv_dir = ray.direction.cwiseInverse();
  // Boxes are padded at build time and pruning keeps entries equal to the current best,
  // so ties resolve to the lowest triangle index as in the brute-force scan.
  std::int32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    const double limit = best ? best->range : max_range;
    const double entry = box_entry(node.box, ray.origin, inv_dir, max_range);
    if (!(entry <= limit)) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const auto h = intersect_triangle(*mesh_, order_[i], ray, max_range);
        if (h && (!best || better(*h, *best))) best = h;
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  return best;
}

}  // namespace matsplat
