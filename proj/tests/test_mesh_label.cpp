#include <doctest.h>

#include <random>

#include "matsplat/mesh_label.hpp"
#include "oracles.hpp"
#include "scene_gen.hpp"
#include "test_util.hpp"

using namespace matsplat;
using namespace matsplat::mesh_label;

namespace {

/// n x n grid of quads on z = 0, two triangles per quad.
LabeledMesh grid(int n) {
  LabeledMesh m;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices.emplace_back(i, j, 0);
  auto v = [&](int i, int j) { return static_cast<std::uint32_t>(j * (n + 1) + i); };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      m.triangles.push_back({v(i, j), v(i + 1, j), v(i + 1, j + 1)});
      m.triangles.push_back({v(i, j), v(i + 1, j + 1), v(i, j + 1)});
    }
  m.finalize();
  return m;
}

LabeledMesh random_soup(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-5, 5), e(-0.5, 0.5);
  LabeledMesh m;
  for (int t = 0; t < n; ++t) {
    const Vec3 c(u(rng), u(rng), u(rng));
    for (int k = 0; k < 3; ++k) m.vertices.push_back(c + Vec3(e(rng), e(rng), e(rng)));
    const auto b = static_cast<std::uint32_t>(3 * t);
    m.triangles.push_back({b, b + 1, b + 2});
  }
  m.finalize();
  return m;
}

}  // namespace

TEST_CASE("a gaussian at a centroid labels that triangle") {
  const LabeledMesh mesh = grid(3);
  const std::vector<Vec3> pos = {mesh.centroid(7)};
  const std::vector<ClassId> labels = {classes::kGravel};
  AssignStats stats;
  const LabeledMesh out = assign_gaussians_to_triangles(pos, labels, mesh, 1, 1, &stats);
  for (std::size_t t = 0; t < out.size(); ++t) CHECK(out.labels[t] == (t == 7 ? classes::kGravel : kUnlabeled));
  CHECK(stats.labeled_triangles == 1);
  CHECK(stats.unlabeled_triangles == out.size() - 1);
}

TEST_CASE("unlabeled gaussians cast no votes") {
  const LabeledMesh mesh = grid(2);
  const std::vector<Vec3> pos = {mesh.centroid(0), mesh.centroid(1)};
  const std::vector<ClassId> labels = {kUnlabeled, kUnlabeled};
  const LabeledMesh out = assign_gaussians_to_triangles(pos, labels, mesh);
  CHECK(std::all_of(out.labels.begin(), out.labels.end(), [](ClassId c) { return c == kUnlabeled; }));
}

TEST_CASE("assignment errors") {
  const std::vector<Vec3> pos = {Vec3::Zero()};
  const std::vector<ClassId> labels = {1};
  CHECK(testutil::error_kind([&] { assign_gaussians_to_triangles(pos, labels, LabeledMesh{}); }) == "input");
  const std::vector<ClassId> two = {1, 2};
  CHECK(testutil::error_kind([&] { assign_gaussians_to_triangles(pos, two, grid(1)); }) == "shape");
}

TEST_CASE("knn transfer equals the exhaustive oracle and is rigid-invariant") {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-6, 6);
  std::uniform_int_distribution<int> cls(0, 10);
  for (int trial = 0; trial < 100; ++trial) {
    const LabeledMesh mesh = random_soup(rng, 100);
    std::vector<Vec3> pos;
    std::vector<ClassId> labels;
    for (int g = 0; g < 200; ++g) {
      pos.emplace_back(u(rng), u(rng), u(rng));
      const int c = cls(rng);
      labels.push_back(c == 10 ? kUnlabeled : static_cast<ClassId>(c));
    }
    const std::size_t k = 1 + trial % 3;
    const LabeledMesh out = assign_gaussians_to_triangles(pos, labels, mesh, k, 1 + trial % 4);
    REQUIRE(out.labels == oracle::knn_labels(pos, labels, mesh, k));

    const Mat3 r = scene_gen::random_rotation(rng).toRotationMatrix();
    const Vec3 t(u(rng), u(rng), u(rng));
    LabeledMesh moved = mesh;
    for (auto& v : moved.vertices) v = r * v + t;
    moved.finalize();
    std::vector<Vec3> moved_pos;
    for (const auto& p : pos) moved_pos.push_back(r * p + t);
    CHECK(assign_gaussians_to_triangles(moved_pos, labels, moved, k).labels == out.labels);
  }
}

TEST_CASE("edge adjacency on a strip") {
  const LabeledMesh mesh = grid(2);
  const auto adj = edge_adjacency(mesh);
  REQUIRE(adj.size() == 8);
  // triangle 0 (lower right of the first quad) touches its partner and the quad to the right
  CHECK(adj[0] == std::vector<std::uint32_t>{1, 3});
}

TEST_CASE("fill resolves ties to the lower class id") {
  LabeledMesh strip;
  strip.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {2, 1, 0}};
  strip.triangles = {{0, 1, 2}, {1, 3, 2}, {1, 4, 3}};
  strip.labels = {classes::kMetal, kUnlabeled, classes::kConcrete};
  strip.finalize();
  FillStats stats;
  const LabeledMesh out = fill_unlabeled(strip, kUnlimitedHops, &stats);
  CHECK(out.labels[1] == classes::kConcrete);
  CHECK(stats.filled == 1);

  const LabeledMesh full = grid(2);
  LabeledMesh labeled = full;
  labeled.labels.assign(labeled.size(), classes::kAsphalt);
  CHECK(fill_unlabeled(labeled).labels == labeled.labels);
}

TEST_CASE("fill equals per-triangle BFS oracle") {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> cls(0, 30);
  for (int trial = 0; trial < 60; ++trial) {
    LabeledMesh mesh = grid(6);
    for (auto& l : mesh.labels) {
      const int c = cls(rng);
      l = c < 4 ? static_cast<ClassId>(c) : kUnlabeled;
    }
    for (std::size_t hops : {kUnlimitedHops, std::size_t{1}, std::size_t{2}}) {
      FillStats stats;
      const LabeledMesh out = fill_unlabeled(mesh, hops, &stats);
      const auto expect = oracle::fill(mesh, hops);
      REQUIRE(out.labels == expect);
      CHECK(stats.still_unlabeled == static_cast<std::size_t>(std::count(expect.begin(), expect.end(), kUnlabeled)));
    }
  }
}

TEST_CASE("summary areas") {
  LabeledMesh mesh = grid(2);
  std::fill(mesh.labels.begin(), mesh.labels.begin() + 4, classes::kGlass);
  const MeshSummary s = summarize(mesh);
  CHECK(s.triangles == 8);
  CHECK(s.labeled == 4);
  CHECK(s.unlabeled == 4);
  CHECK(s.class_area.at(classes::kGlass) == doctest::Approx(2.0));
  CHECK(s.class_area.at(kUnlabeled) == doctest::Approx(2.0));
}
