#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "matsplat/types.hpp"
#include "matsplat/vote_histogram.hpp"

namespace matsplat::label_project {

/// Isotropic screen-space regularizer added to every projected covariance (px^2).
inline constexpr double kCovarianceRegularizer = 0.3;
/// Footprints have compact support: the ellipse d^T Σ^-1 d <= kSupportSigma^2.
inline constexpr double kSupportSigma = 3.0;
inline constexpr int kTileSize = 16;
/// Splats closer than this (view-space z, meters) are dropped.
inline constexpr double kNearPlane = 0.2;
/// The projection Jacobian is evaluated no further off-axis than this multiple
/// of the half field of view.
inline constexpr double kFovClamp = 1.3;

/// A splat projected into one view.
struct SplatFootprint {
  std::uint32_t gaussian = 0;
  Vec2 mean;     // pixels
  Mat2 cov;      // pixels^2
  Mat2 conic;    // cov^-1
  double depth = 0;    // view-space z, meters
  double opacity = 0;
};

struct ProjectionStats {
  std::size_t projected = 0;
  std::size_t behind_camera = 0;  // nearer than kNearPlane
  std::size_t outside_image = 0;
  std::size_t degenerate = 0;
};

struct Projection {
  std::vector<SplatFootprint> footprints;
  ProjectionStats stats;
};

/// Local-affine (EWA) projection of every splat. Splats nearer than kNearPlane,
/// a mean more than 3 sigma outside the image, or a non-finite footprint are dropped
/// and counted in `stats`.
Projection project_splats(const GaussianCloud& cloud, const CameraModel& camera);

/// Opacity-weighted Gaussian falloff at pixel position `p`, zero outside the support ellipse.
double footprint_alpha(const SplatFootprint& f, const Vec2& p);

/// Strict front-to-back order: depth ascending, then gaussian index.
bool depth_less(const SplatFootprint& a, const SplatFootprint& b);

struct RasterOptions {
  double alpha_threshold = 0.5;
  int threads = 1;
};

/// Per-pixel vote recipient for one view (-1: the pixel votes for no one).
struct ViewVotes {
  int width = 0, height = 0;
  std::vector<std::int64_t> winner;
};

/// Tile-based vote rasterization. For every labeled pixel the footprints are
/// walked front to back; the first with alpha >= threshold takes the vote. If
/// none does and the accumulated transmittance falls below 0.5, the largest
/// blending weight alpha*T wins (earliest on ties). Unlabeled pixels never vote.
ViewVotes rasterize_votes(std::span<const SplatFootprint> footprints, const MaterialMap& mask,
                          const RasterOptions& options = {});

struct GaussianVotes {
  std::vector<VoteHistogram> per_gaussian;

  explicit GaussianVotes(std::size_t n = 0) : per_gaussian(n) {}
  void add_view(const ViewVotes& view, const MaterialMap& mask);
  void merge(const GaussianVotes& other);
  std::uint64_t total() const;
};

struct ProjectStats {
  std::size_t views = 0;
  std::size_t labeled_pixels = 0;
  std::size_t voting_pixels = 0;
  ProjectionStats projection;
};

/// Projects every view's mask onto the cloud and accumulates unweighted votes.
/// masks[i] must match cameras[i] in size (Error(Shape)).
GaussianVotes project_labels(const GaussianCloud& cloud, std::span<const CameraModel> cameras,
                             std::span<const MaterialMap> masks, const RasterOptions& options = {},
                             ProjectStats* stats = nullptr);

/// Per-Gaussian majority label (ties: lowest id, no votes: kUnlabeled).
std::vector<ClassId> aggregate_labels(const GaussianVotes& votes);

/// Debug view: each pixel carries the final label of the Gaussian it voted for.
MaterialMap render_winner_labels(const ViewVotes& view, std::span<const ClassId> labels,
                                 const Palette& palette);

}  // namespace matsplat::label_project
