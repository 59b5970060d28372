#include "matsplat/mesh_label.hpp"

#include <algorithm>
#include <unordered_map>

#include "matsplat/error.hpp"
#include "matsplat/kdtree.hpp"
#include "matsplat/parallel.hpp"
#include "matsplat/vote_histogram.hpp"

namespace matsplat::mesh_label {

LabeledMesh assign_gaussians_to_triangles(std::span<const Vec3> positions, std::span<const ClassId> labels,
                                          const LabeledMesh& mesh, std::size_t k, int threads,
                                          AssignStats* stats) {
  if (mesh.triangles.empty()) fail(ErrorKind::Input, "mesh has no triangles");
  if (positions.size() != labels.size())
    fail(ErrorKind::Shape, "gaussian positions and labels differ in length");
  if (k == 0) fail(ErrorKind::Domain, "k must be at least 1");

  std::vector<Vec3> centroids(mesh.size());
  for (std::size_t t = 0; t < mesh.size(); ++t) centroids[t] = mesh.centroid(t);
  const KdTree tree(std::move(centroids));

  std::vector<std::vector<Neighbor>> hits(positions.size());
  parallel_for(positions.size(), threads, [&](std::size_t g) {
    if (labels[g] == kUnlabeled) return;
    hits[g] = tree.nearest(positions[g], k);
  });

  std::vector<VoteHistogram> votes(mesh.size());
  AssignStats local;
  for (std::size_t g = 0; g < positions.size(); ++g) {
    if (labels[g] == kUnlabeled) continue;
    ++local.labeled_gaussians;
    for (const Neighbor& n : hits[g]) votes[n.index].add(labels[g]);
  }

  LabeledMesh out = mesh;
  for (std::size_t t = 0; t < out.size(); ++t) {
    out.labels[t] = votes[t].argmax();
    if (out.labels[t] == kUnlabeled) ++local.unlabeled_triangles;
    else ++local.labeled_triangles;
  }
  if (stats) *stats = local;
  return out;
}

std::vector<std::vector<std::uint32_t>> edge_adjacency(const LabeledMesh& mesh) {
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> edges;
  edges.reserve(mesh.size() * 3);
  auto key = [](std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
  };
  for (std::uint32_t t = 0; t < mesh.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    edges[key(tri.a, tri.b)].push_back(t);
    edges[key(tri.b, tri.c)].push_back(t);
    edges[key(tri.c, tri.a)].push_back(t);
  }
  std::vector<std::vector<std::uint32_t>> adj(mesh.size());
  for (const auto& [_, tris] : edges)
    for (std::uint32_t a : tris)
      for (std::uint32_t b : tris)
        if (a != b) adj[a].push_back(b);
  for (auto& n : adj) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return adj;
}

LabeledMesh fill_unlabeled(const LabeledMesh& mesh, std::size_t max_hops, FillStats* stats) {
  const auto adj = edge_adjacency(mesh);
  LabeledMesh out = mesh;

  std::vector<std::uint32_t> frontier;
  for (std::uint32_t t = 0; t < mesh.size(); ++t)
    if (mesh.labels[t] != kUnlabeled) frontier.push_back(t);

  // Level-synchronous: a triangle reached at hop h takes the minimum label over
  // its neighbours from hop h-1, which equals the minimum over all seeds at hop distance h.
  std::vector<bool> reached(mesh.size(), false);
  for (std::uint32_t t : frontier) reached[t] = true;
  FillStats local;
  std::size_t hop = 0;
  std::vector<std::uint32_t> next;
  while (!frontier.empty() && hop < max_hops) {
    ++hop;
    next.clear();
    for (std::uint32_t t : frontier)
      for (std::uint32_t n : adj[t])
        if (!reached[n]) {
          if (out.labels[n] == kUnlabeled) next.push_back(n);
          out.labels[n] = std::min(out.labels[n], out.labels[t]);
        }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    for (std::uint32_t n : next) reached[n] = true;
    local.filled += next.size();
    std::swap(frontier, next);
  }
  for (ClassId c : out.labels)
    if (c == kUnlabeled) ++local.still_unlabeled;
  if (stats) *stats = local;
  return out;
}

MeshSummary summarize(const LabeledMesh& mesh) {
  MeshSummary s;
  s.triangles = mesh.size();
  for (std::size_t t = 0; t < mesh.size(); ++t) {
    if (mesh.labels[t] == kUnlabeled) ++s.unlabeled;
    else ++s.labeled;
    s.class_area[mesh.labels[t]] += mesh.area(t);
  }
  return s;
}

}  // namespace matsplat::mesh_label
