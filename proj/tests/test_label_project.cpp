#include <doctest.h>

#include <random>

#include "matsplat/label_project.hpp"
#include "oracles.hpp"
#include "scene_gen.hpp"
#include "test_util.hpp"

using namespace matsplat;
using namespace matsplat::label_project;

namespace {

GaussianCloud single(const Vec3& p, double s, double opacity) {
  GaussianCloud c;
  c.positions = {p};
  c.scales = {Vec3(s, s, s)};
  c.rotations = {Quat::Identity()};
  c.opacities = {opacity};
  return c;
}

void append(GaussianCloud& c, const GaussianCloud& other) {
  for (std::size_t i = 0; i < other.size(); ++i) {
    c.positions.push_back(other.positions[i]);
    c.scales.push_back(other.scales[i]);
    c.rotations.push_back(other.rotations[i]);
    c.opacities.push_back(other.opacities[i]);
  }
}

MaterialMap uniform_mask(int w, int h, ClassId c) {
  MaterialMap m;
  m.width = w;
  m.height = h;
  m.palette = default_palette();
  m.pixels.assign(static_cast<std::size_t>(w) * h, c);
  return m;
}

Vec2 pixel_of(const CameraModel& cam, const Vec3& world) {
  const Vec3 p = cam.to_camera(world);
  return {cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy};
}

}  // namespace

TEST_CASE("on-axis isotropic splat has a circular footprint") {
  const CameraModel cam = scene_gen::identity_camera(64, 64, 100);
  for (double d : {1.0, 2.5, 10.0}) {
    const double s = 0.05;
    const auto proj = project_splats(single(Vec3(0, 0, d), s, 0.8), cam);
    REQUIRE(proj.footprints.size() == 1);
    const auto& f = proj.footprints[0];
    const double sigma_px = 100 * s / d;
    CHECK(f.cov(0, 0) == doctest::Approx(sigma_px * sigma_px + kCovarianceRegularizer).epsilon(1e-12));
    CHECK(f.cov(1, 1) == doctest::Approx(sigma_px * sigma_px + kCovarianceRegularizer).epsilon(1e-12));
    CHECK(std::abs(f.cov(0, 1)) < 1e-12);
    CHECK(f.mean.isApprox(Vec2(32, 32)));
    CHECK(f.depth == d);
  }
}

TEST_CASE("splats behind the camera or far outside are dropped") {
  const CameraModel cam = scene_gen::identity_camera(32, 32, 30);
  GaussianCloud c = single(Vec3(0, 0, -2), 0.1, 0.9);
  append(c, single(Vec3(100, 0, 1), 0.01, 0.9));
  append(c, single(Vec3(0, 0, 2), 0.1, 0.9));
  const auto proj = project_splats(c, cam);
  CHECK(proj.stats.behind_camera == 1);
  CHECK(proj.stats.outside_image == 1);
  REQUIRE(proj.footprints.size() == 1);
  CHECK(proj.footprints[0].gaussian == 2);
}

TEST_CASE("projected covariance matches finite-difference propagation") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    CameraModel cam = scene_gen::identity_camera(320, 240, 250);
    cam.rotation = scene_gen::random_rotation(rng).toRotationMatrix();
    cam.translation = Vec3(u(rng), u(rng), u(rng));
    // a point in front of the camera, inside the image
    const Vec3 local(u(rng) * 0.5, u(rng) * 0.4, 2 + 3 * (u(rng) + 1));
    const Vec3 world = cam.rotation.transpose() * (local - cam.translation);
    GaussianCloud c = single(world, 0.1, 0.5);
    c.scales[0] = Vec3(0.05 + 0.2 * std::abs(u(rng)), 0.05 + 0.2 * std::abs(u(rng)), 0.01 + 0.2 * std::abs(u(rng)));
    c.rotations[0] = scene_gen::random_rotation(rng);
    const auto proj = project_splats(c, cam);
    REQUIRE(proj.footprints.size() == 1);

    Eigen::Matrix<double, 2, 3> jac;
    const double h = 1e-5;
    for (int k = 0; k < 3; ++k) {
      Vec3 e = Vec3::Zero();
      e[k] = h;
      jac.col(k) = (pixel_of(cam, world + e) - pixel_of(cam, world - e)) / (2 * h);
    }
    const Mat2 expect = jac * c.covariance(0) * jac.transpose() + kCovarianceRegularizer * Mat2::Identity();
    const Mat2& got = proj.footprints[0].cov;
    const double scale = expect.cwiseAbs().maxCoeff();
    CHECK((got - expect).cwiseAbs().maxCoeff() / scale < 1e-4);
  }
}

TEST_CASE("single opaque splat collects every vote it wins") {
  const CameraModel cam = scene_gen::identity_camera(32, 32, 30);
  const GaussianCloud c = single(Vec3(0, 0, 2), 0.3, 1.0);
  const MaterialMap mask = uniform_mask(32, 32, classes::kAsphalt);
  const auto proj = project_splats(c, cam);
  const auto view = rasterize_votes(proj.footprints, mask);
  std::size_t expected = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) expected += footprint_alpha(proj.footprints[0], Vec2(x + 0.5, y + 0.5)) >= 0.5;
  GaussianVotes votes(1);
  votes.add_view(view, mask);
  CHECK(expected > 50);
  CHECK(votes.per_gaussian[0].count(classes::kAsphalt) == expected);
  CHECK(votes.per_gaussian[0].total() == expected);
  CHECK(aggregate_labels(votes) == std::vector<ClassId>{classes::kAsphalt});
}

TEST_CASE("fully opaque front splat hides a coaxial rear splat") {
  const CameraModel cam = scene_gen::identity_camera(32, 32, 30);
  GaussianCloud c = single(Vec3(0, 0, 4), 0.2, 0.7);  // rear, listed first
  append(c, single(Vec3(0, 0, 2), 0.2, 1.0));
  const MaterialMap mask = uniform_mask(32, 32, classes::kConcrete);
  const auto votes = project_labels(c, std::vector<CameraModel>{cam}, std::vector<MaterialMap>{mask});
  CHECK(votes.per_gaussian[0].total() == 0);
  CHECK(votes.per_gaussian[1].total() > 0);
}

TEST_CASE("unlabeled pixels never vote") {
  const CameraModel cam = scene_gen::identity_camera(32, 32, 30);
  const GaussianCloud c = single(Vec3(0, 0, 2), 0.5, 1.0);
  const auto votes = project_labels(c, std::vector<CameraModel>{cam}, std::vector<MaterialMap>{uniform_mask(32, 32, kUnlabeled)});
  CHECK(votes.total() == 0);
  CHECK(aggregate_labels(votes) == std::vector<ClassId>{kUnlabeled});
}

TEST_CASE("tiled rasterizer equals the per-pixel oracle") {
  std::mt19937_64 rng(101);
  const CameraModel cam = scene_gen::identity_camera(32, 32, 30);
  for (int scene = 0; scene < 200; ++scene) {
    const GaussianCloud c = scene_gen::random_splats(rng, 20);
    const MaterialMap mask = scene_gen::random_mask(rng, 32, 32);
    const auto proj = project_splats(c, cam);
    for (double threshold : {0.5, 0.2}) {
      RasterOptions opt;
      opt.alpha_threshold = threshold;
      const auto view = rasterize_votes(proj.footprints, mask, opt);
      REQUIRE(view.winner == oracle::rasterize(proj.footprints, mask, threshold));
    }
  }
}

TEST_CASE("aggregation equals histogram argmax over the oracle's votes") {
  std::mt19937_64 rng(202);
  const CameraModel cam = scene_gen::identity_camera(32, 32, 30);
  for (int scene = 0; scene < 100; ++scene) {
    const GaussianCloud c = scene_gen::random_splats(rng, 20);
    std::vector<MaterialMap> masks;
    std::vector<CameraModel> cams;
    for (int v = 0; v < 3; ++v) {
      masks.push_back(scene_gen::random_mask(rng, 32, 32));
      cams.push_back(cam);
    }
    const auto labels = aggregate_labels(project_labels(c, cams, masks));
    std::vector<std::array<std::uint64_t, 256>> counts(c.size());
    for (auto& h : counts) h.fill(0);
    for (int v = 0; v < 3; ++v) {
      const auto winners = oracle::rasterize(project_splats(c, cam).footprints, masks[v], 0.5);
      for (std::size_t p = 0; p < winners.size(); ++p)
        if (winners[p] >= 0) ++counts[winners[p]][masks[v].pixels[p]];
    }
    for (std::size_t g = 0; g < c.size(); ++g) CHECK(labels[g] == oracle::histogram_argmax(counts[g]));
  }
}

TEST_CASE("thread count does not change votes") {
  std::mt19937_64 rng(303);
  const CameraModel cam = scene_gen::identity_camera(96, 80, 60);
  const GaussianCloud c = scene_gen::random_splats(rng, 200);
  const MaterialMap mask = scene_gen::random_mask(rng, 96, 80);
  const auto proj = project_splats(c, cam);
  RasterOptions one, many;
  many.threads = 8;
  CHECK(rasterize_votes(proj.footprints, mask, one).winner == rasterize_votes(proj.footprints, mask, many).winner);
}

TEST_CASE("argument validation") {
  const CameraModel cam = scene_gen::identity_camera(32, 32, 30);
  const GaussianCloud c = single(Vec3(0, 0, 2), 0.1, 1.0);
  CHECK(testutil::error_kind([&] {
          project_labels(c, std::vector<CameraModel>{cam}, std::vector<MaterialMap>{uniform_mask(16, 32, 0)});
        }) == "shape");
  RasterOptions bad;
  bad.alpha_threshold = 0.0;
  CHECK(testutil::error_kind([&] { rasterize_votes({}, uniform_mask(4, 4, 0), bad); }) == "domain");
}

TEST_CASE("winner label rendering") {
  ViewVotes v;
  v.width = 2;
  v.height = 1;
  v.winner = {1, -1};
  const std::vector<ClassId> labels = {classes::kGlass, classes::kMetal};
  const MaterialMap m = render_winner_labels(v, labels, default_palette());
  CHECK(m.pixels == std::vector<ClassId>{classes::kMetal, kUnlabeled});
}
