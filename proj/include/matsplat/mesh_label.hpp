#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "matsplat/types.hpp"

namespace matsplat::mesh_label {

struct AssignStats {
  std::size_t labeled_gaussians = 0;
  std::size_t labeled_triangles = 0;
  std::size_t unlabeled_triangles = 0;
};

/// Each labeled Gaussian votes for its k nearest triangles (by distance to the
/// triangle centroid); a triangle takes the majority of its votes (ties: lowest
/// id) and is kUnlabeled when it received none. Existing mesh labels are replaced.
/// Throws Error(Input) for an empty mesh and Error(Shape) when labels and
/// positions differ in length.
LabeledMesh assign_gaussians_to_triangles(std::span<const Vec3> positions, std::span<const ClassId> labels,
                                          const LabeledMesh& mesh, std::size_t k = 1, int threads = 1,
                                          AssignStats* stats = nullptr);

/// Triangles sharing an edge (two identical vertex indices) are adjacent.
std::vector<std::vector<std::uint32_t>> edge_adjacency(const LabeledMesh& mesh);

inline constexpr std::size_t kUnlimitedHops = std::numeric_limits<std::size_t>::max();

struct FillStats {
  std::size_t filled = 0;
  std::size_t still_unlabeled = 0;
};

/// Multi-source BFS over edge adjacency: each unlabeled triangle within
/// max_hops of a labeled one takes the label of its nearest labeled triangles
/// in hop distance (ties: lowest id). Labeled triangles never change.
LabeledMesh fill_unlabeled(const LabeledMesh& mesh, std::size_t max_hops = kUnlimitedHops,
                           FillStats* stats = nullptr);

struct MeshSummary {
  std::size_t triangles = 0;
  std::size_t labeled = 0;
  std::size_t unlabeled = 0;
  std::map<ClassId, double> class_area;  // m^2, kUnlabeled included
};

MeshSummary summarize(const LabeledMesh& mesh);

}  // namespace matsplat::mesh_label
