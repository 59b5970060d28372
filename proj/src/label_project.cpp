#include "matsplat/label_project.hpp"

#include <algorithm>
#include <cmath>

#include "matsplat/error.hpp"
#include "matsplat/parallel.hpp"

namespace matsplat::label_project {

namespace {

// Bounding boxes are padded so rounding in sqrt never excludes a pixel the
// exact ellipse test would accept; the ellipse test itself decides coverage.
constexpr double kBoxPad = 1e-6;
constexpr double kFallbackTransmittance = 0.5;

}  // namespace

Projection project_splats(const GaussianCloud& cloud, const CameraModel& camera) {
  Projection out;
  out.footprints.reserve(cloud.size());
  const Mat3& w = camera.rotation;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 pc = camera.to_camera(cloud.positions[i]);
    const double z = pc.z();
    if (!(z > kNearPlane)) {
      ++out.stats.behind_camera;
      continue;
    }
    const double inv_z = 1.0 / z;
    // Jacobian evaluated at the point clamped to kFovClamp times the half field of view.
    const double lim_x = kFovClamp * 0.5 * camera.width / camera.fx;
    const double lim_y = kFovClamp * 0.5 * camera.height / camera.fy;
    const double tx = std::clamp(pc.x() * inv_z, -lim_x, lim_x) * z;
    const double ty = std::clamp(pc.y() * inv_z, -lim_y, lim_y) * z;
    Eigen::Matrix<double, 2, 3> j;
    j << camera.fx * inv_z, 0.0, -camera.fx * tx * inv_z * inv_z,
        0.0, camera.fy * inv_z, -camera.fy * ty * inv_z * inv_z;
    const Eigen::Matrix<double, 2, 3> jw = j * w;
    Mat2 cov = jw * cloud.covariance(i) * jw.transpose();
    cov(0, 1) = cov(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
    cov(0, 0) += kCovarianceRegularizer;
    cov(1, 1) += kCovarianceRegularizer;

    const Vec2 mean(camera.fx * pc.x() * inv_z + camera.cx, camera.fy * pc.y() * inv_z + camera.cy);
    const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
    if (!mean.allFinite() || !cov.allFinite() || !(det > 0)) {
      ++out.stats.degenerate;
      continue;
    }
    const double rx = kSupportSigma * std::sqrt(cov(0, 0));
    const double ry = kSupportSigma * std::sqrt(cov(1, 1));
    if (mean.x() < -rx || mean.x() > camera.width + rx || mean.y() < -ry || mean.y() > camera.height + ry) {
      ++out.stats.outside_image;
      continue;
    }
    SplatFootprint f;
    f.gaussian = static_cast<std::uint32_t>(i);
    f.mean = mean;
    f.cov = cov;
    f.conic << cov(1, 1) / det, -cov(0, 1) / det, -cov(1, 0) / det, cov(0, 0) / det;
    f.depth = z;
    f.opacity = cloud.opacities[i];
    out.footprints.push_back(f);
    ++out.stats.projected;
  }
  return out;
}

double footprint_alpha(const SplatFootprint& f, const Vec2& p) {
  const Vec2 d = p - f.mean;
  const double q = d.dot(f.conic * d);
  if (!(q <= kSupportSigma * kSupportSigma)) return 0.0;
  return f.opacity * std::exp(-0.5 * q);
}

bool depth_less(const SplatFootprint& a, const SplatFootprint& b) {
  if (a.depth != b.depth) return a.depth < b.depth;
  return a.gaussian < b.gaussian;
}

ViewVotes rasterize_votes(std::span<const SplatFootprint> footprints, const MaterialMap& mask,
                          const RasterOptions& options) {
  const int width = mask.width, height = mask.height;
  if (mask.pixels.size() != static_cast<std::size_t>(width) * height)
    fail(ErrorKind::Shape, "mask pixel buffer does not match its dimensions");
  if (!(options.alpha_threshold > 0.0 && options.alpha_threshold <= 1.0))
    fail(ErrorKind::Domain, "alpha threshold " + std::to_string(options.alpha_threshold) + " outside (0,1]");

  std::vector<std::uint32_t> order(footprints.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return depth_less(footprints[a], footprints[b]); });

  const int tiles_x = (width + kTileSize - 1) / kTileSize;
  const int tiles_y = (height + kTileSize - 1) / kTileSize;
  std::vector<std::vector<std::uint32_t>> tiles(static_cast<std::size_t>(tiles_x) * tiles_y);

  for (std::uint32_t idx : order) {
    const SplatFootprint& f = footprints[idx];
    const double cov_det = f.cov.determinant();
    if (!(cov_det > 0) || !(f.cov(0, 0) > 0))
      fail(ErrorKind::Internal, "footprint of gaussian " + std::to_string(f.gaussian) + " is not positive-definite");
    const double rx = kSupportSigma * std::sqrt(f.cov(0, 0)) + kBoxPad;
    const double ry = kSupportSigma * std::sqrt(f.cov(1, 1)) + kBoxPad;
    // Pixel centers sit at integer + 0.5.
    const double x0 = std::ceil(f.mean.x() - rx - 0.5), x1 = std::floor(f.mean.x() + rx - 0.5);
    const double y0 = std::ceil(f.mean.y() - ry - 0.5), y1 = std::floor(f.mean.y() + ry - 0.5);
    if (x1 < 0 || y1 < 0 || x0 > width - 1 || y0 > height - 1 || x0 > x1 || y0 > y1) continue;
    const int px0 = static_cast<int>(std::max(0.0, x0)), px1 = static_cast<int>(std::min<double>(width - 1, x1));
    const int py0 = static_cast<int>(std::max(0.0, y0)), py1 = static_cast<int>(std::min<double>(height - 1, y1));
    for (int ty = py0 / kTileSize; ty <= py1 / kTileSize; ++ty)
      for (int tx = px0 / kTileSize; tx <= px1 / kTileSize; ++tx)
        tiles[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(idx);
  }

  ViewVotes out;
  out.width = width;
  out.height = height;
  out.winner.assign(mask.pixels.size(), -1);
  const double threshold = options.alpha_threshold;

  parallel_for(tiles.size(), options.threads, [&](std::size_t tile) {
    const auto& list = tiles[tile];
    if (list.empty()) return;
    const int tx = static_cast<int>(tile % tiles_x), ty = static_cast<int>(tile / tiles_x);
    const int xe = std::min(width, (tx + 1) * kTileSize), ye = std::min(height, (ty + 1) * kTileSize);
    for (int y = ty * kTileSize; y < ye; ++y) {
      for (int x = tx * kTileSize; x < xe; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * width + x;
        if (mask.pixels[p] == kUnlabeled) continue;
        const Vec2 center(x + 0.5, y + 0.5);
        double transmittance = 1.0;
        double best_weight = 0.0;
        std::int64_t best = -1, chosen = -1;
        for (std::uint32_t idx : list) {
          const SplatFootprint& f = footprints[idx];
          const double alpha = footprint_alpha(f, center);
          if (alpha <= 0.0) continue;
          if (alpha >= threshold) {
            chosen = f.gaussian;
            break;
          }
          const double weight = alpha * transmittance;
          if (weight > best_weight) {
            best_weight = weight;
            best = f.gaussian;
          }
          transmittance *= 1.0 - alpha;
        }
        if (chosen < 0 && transmittance < kFallbackTransmittance) chosen = best;
        out.winner[p] = chosen;
      }
    }
  });
  return out;
}

void GaussianVotes::add_view(const ViewVotes& view, const MaterialMap& mask) {
  for (std::size_t p = 0; p < view.winner.size(); ++p) {
    const std::int64_t g = view.winner[p];
    if (g < 0) continue;
    if (static_cast<std::size_t>(g) >= per_gaussian.size())
      fail(ErrorKind::Internal, "vote for gaussian " + std::to_string(g) + " outside the cloud");
    per_gaussian[static_cast<std::size_t>(g)].add(mask.pixels[p]);
  }
}

void GaussianVotes::merge(const GaussianVotes& other) {
  if (other.per_gaussian.size() != per_gaussian.size())
    fail(ErrorKind::Shape, "cannot merge vote sets of different sizes");
  for (std::size_t i = 0; i < per_gaussian.size(); ++i) per_gaussian[i].merge(other.per_gaussian[i]);
}

std::uint64_t GaussianVotes::total() const {
  std::uint64_t t = 0;
  for (const auto& h : per_gaussian) t += h.total();
  return t;
}

GaussianVotes project_labels(const GaussianCloud& cloud, std::span<const CameraModel> cameras,
                             std::span<const MaterialMap> masks, const RasterOptions& options,
                             ProjectStats* stats) {
  if (cameras.size() != masks.size()) fail(ErrorKind::Shape, "camera and mask counts differ");
  GaussianVotes votes(cloud.size());
  ProjectStats local;
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    const CameraModel& cam = cameras[v];
    const MaterialMap& mask = masks[v];
    if (mask.width != cam.width || mask.height != cam.height)
      fail(ErrorKind::Shape, "mask for view '" + cam.id + "' is " + std::to_string(mask.width) + "x" +
                                 std::to_string(mask.height) + ", camera is " + std::to_string(cam.width) +
                                 "x" + std::to_string(cam.height));
    const Projection proj = project_splats(cloud, cam);
    const ViewVotes view = rasterize_votes(proj.footprints, mask, options);
    votes.add_view(view, mask);

    ++local.views;
    local.projection.projected += proj.stats.projected;
    local.projection.behind_camera += proj.stats.behind_camera;
    local.projection.outside_image += proj.stats.outside_image;
    local.projection.degenerate += proj.stats.degenerate;
    for (std::size_t p = 0; p < mask.pixels.size(); ++p) {
      if (mask.pixels[p] != kUnlabeled) ++local.labeled_pixels;
      if (view.winner[p] >= 0) ++local.voting_pixels;
    }
  }
  if (stats) *stats = local;
  return votes;
}

std::vector<ClassId> aggregate_labels(const GaussianVotes& votes) {
  std::vector<ClassId> labels(votes.per_gaussian.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = votes.per_gaussian[i].argmax();
  return labels;
}

MaterialMap render_winner_labels(const ViewVotes& view, std::span<const ClassId> labels, const Palette& palette) {
  MaterialMap out;
  out.width = view.width;
  out.height = view.height;
  out.palette = palette;
  out.pixels.assign(view.winner.size(), kUnlabeled);
  for (std::size_t p = 0; p < view.winner.size(); ++p) {
    const std::int64_t g = view.winner[p];
    if (g >= 0 && static_cast<std::size_t>(g) < labels.size()) out.pixels[p] = labels[static_cast<std::size_t>(g)];
  }
  return out;
}

}  // namespace matsplat::label_project
