#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "matsplat/geometry.hpp"

namespace matsplat {

struct Neighbor {
  std::size_t index = 0;
  double distance2 = 0;  // squared Euclidean distance

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Static 3D KD-tree. Results are ordered by (distance, index), so equidistant
/// points resolve to the lowest index exactly as a linear scan would.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points, std::size_t leaf_size = 8);

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  /// Up to k nearest points, closest first.
  std::vector<Neighbor> nearest(const Vec3& query, std::size_t k) const;

  /// Closest point with distance <= radius, if any.
  std::optional<Neighbor> nearest_within(const Vec3& query, double radius) const;

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // range in order_
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& q, std::size_t k, double& bound, std::vector<Neighbor>& heap) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_ = 8;
};

/// Squared distance computed the same way by the tree and by brute-force checks.
inline double distance2(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace matsplat
