#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "matsplat/types.hpp"

namespace matsplat {

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

struct Hit {
  std::uint32_t triangle = 0;
  double range = 0;      // distance along the ray, meters
  double cos_incidence = 0;

  friend bool operator==(const Hit&, const Hit&) = default;
};

/// Hits closer than this are ignored (self-intersection guard).
inline constexpr double kMinHitRange = 1e-9;
/// Incidence cosines at or below this count as misses.
inline constexpr double kGrazingCutoff = 1e-3;

/// Single ray/triangle test used by both the BVH and brute-force paths. Only
/// front faces (normal opposing the ray) at range in [kMinHitRange, max_range]
/// with cosine above kGrazingCutoff count.
std::optional<Hit> intersect_triangle(const LabeledMesh& mesh, std::uint32_t triangle, const Ray& ray,
                                      double max_range);

/// Closest hit by exhaustive scan (ties: lowest triangle index).
std::optional<Hit> trace_brute_force(const LabeledMesh& mesh, const Ray& ray, double max_range);

/// Axis-aligned bounding volume hierarchy over a mesh. The mesh must outlive the BVH.
class Bvh {
 public:
  explicit Bvh(const LabeledMesh& mesh, std::size_t leaf_size = 4);

  /// Closest hit; identical to trace_brute_force including tie-breaking.
  std::optional<Hit> trace(const Ray& ray, double max_range) const;

  const LabeledMesh& mesh() const { return *mesh_; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);

  const LabeledMesh* mesh_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::size_t leaf_size_;
};

}  // namespace matsplat
