#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "matsplat/geometry.hpp"
#include "matsplat/image.hpp"

namespace matsplat::metrics {

struct Match {
  std::size_t sim = 0;
  std::size_t ref = 0;
  double distance = 0;
};

struct MatchResult {
  std::vector<Match> pairs;  // in simulated-point order
  std::size_t unmatched = 0;

  double match_fraction(std::size_t sim_count) const {
    return sim_count == 0 ? 0.0 : static_cast<double>(pairs.size()) / static_cast<double>(sim_count);
  }
};

/// Pairs every simulated point with its nearest reference point within `radius`
/// (inclusive; ties to the lowest reference index). Reference points may be reused.
/// Error(Input) on an empty cloud, Error(Domain) unless radius > 0.
MatchResult match_points(std::span<const Vec3> sim, std::span<const Vec3> ref, double radius, int threads = 1);

struct ErrorSummary {
  double mae = 0;
  double median = 0;  // lower of the two middle values for even counts
  std::size_t count = 0;
};

/// Error(Input) when empty.
ErrorSummary summarize_errors(std::span<const double> absolute_errors);

/// Absolute reflectivity differences over matched pairs, in pair order.
std::vector<double> reflectivity_errors(std::span<const Match> pairs, std::span<const std::uint8_t> sim_reflectivity,
                                        std::span<const std::uint8_t> ref_reflectivity);

ErrorSummary reflectivity_error(std::span<const Match> pairs, std::span<const std::uint8_t> sim_reflectivity,
                                std::span<const std::uint8_t> ref_reflectivity);

/// Returned by psnr for identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// 10 log10(255^2 / MSE) over all channels. Error(Shape) on size mismatch.
double psnr(const Image8& a, const Image8& b);

/// Mean SSIM over the valid region of an 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, L = 255, averaged over channels. Images must be at
/// least 11x11 (Error(Shape)).
double ssim(const Image8& a, const Image8& b, int threads = 1);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

}  // namespace matsplat::metrics
