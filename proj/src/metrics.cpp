#include "matsplat/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "matsplat/error.hpp"
#include "matsplat/kdtree.hpp"
#include "matsplat/parallel.hpp"

namespace matsplat::metrics {

MatchResult match_points(std::span<const Vec3> sim, std::span<const Vec3> ref, double radius, int threads) {
  if (sim.empty() || ref.empty()) fail(ErrorKind::Input, "cannot match empty point clouds");
  if (!(radius > 0)) fail(ErrorKind::Domain, "match radius must be positive");
  const KdTree tree(std::vector<Vec3>(ref.begin(), ref.end()));
  std::vector<std::optional<Neighbor>> found(sim.size());
  parallel_for(sim.size(), threads, [&](std::size_t i) { found[i] = tree.nearest_within(sim[i], radius); });

  MatchResult out;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    if (found[i]) out.pairs.push_back({i, found[i]->index, std::sqrt(found[i]->distance2)});
    else ++out.unmatched;
  }
  return out;
}

ErrorSummary summarize_errors(std::span<const double> absolute_errors) {
  if (absolute_errors.empty()) fail(ErrorKind::Input, "no matched pairs to summarize");
  ErrorSummary s;
  s.count = absolute_errors.size();
  double sum = 0;
  for (double e : absolute_errors) sum += e;
  s.mae = sum / static_cast<double>(s.count);
  std::vector<double> sorted(absolute_errors.begin(), absolute_errors.end());
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>((s.count - 1) / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  s.median = *mid;
  return s;
}

std::vector<double> reflectivity_errors(std::span<const Match> pairs, std::span<const std::uint8_t> sim_reflectivity,
                                        std::span<const std::uint8_t> ref_reflectivity) {
  std::vector<double> errors;
  errors.reserve(pairs.size());
  for (const Match& m : pairs) {
    if (m.sim >= sim_reflectivity.size() || m.ref >= ref_reflectivity.size())
      fail(ErrorKind::Shape, "match refers to a point outside the reflectivity arrays");
    errors.push_back(std::abs(double(sim_reflectivity[m.sim]) - double(ref_reflectivity[m.ref])));
  }
  return errors;
}

ErrorSummary reflectivity_error(std::span<const Match> pairs, std::span<const std::uint8_t> sim_reflectivity,
                                std::span<const std::uint8_t> ref_reflectivity) {
  const auto errors = reflectivity_errors(pairs, sim_reflectivity, ref_reflectivity);
  return summarize_errors(errors);
}

namespace {

void check_same_shape(const Image8& a, const Image8& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    fail(ErrorKind::Shape, "images differ in shape: " + std::to_string(a.width) + "x" + std::to_string(a.height) + "x" +
                               std::to_string(a.channels) + " vs " + std::to_string(b.width) + "x" +
                               std::to_string(b.height) + "x" + std::to_string(b.channels));
  if (a.data.size() != static_cast<std::size_t>(a.width) * a.height * a.channels || b.data.size() != a.data.size())
    fail(ErrorKind::Shape, "image buffer does not match its dimensions");
}

std::array<double, kSsimWindow> gaussian_taps() {
  std::array<double, kSsimWindow> g{};
  double sum = 0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    g[i] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

}  // namespace

double psnr(const Image8& a, const Image8& b) {
  check_same_shape(a, b);
  if (a.data.empty()) fail(ErrorKind::Shape, "images are empty");
  double sse = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = double(a.data[i]) - double(b.data[i]);
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(a.data.size());
  if (mse == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const Image8& a, const Image8& b, int threads) {
  check_same_shape(a, b);
  if (a.width < kSsimWindow || a.height < kSsimWindow)
    fail(ErrorKind::Shape, "SSIM needs images of at least 11x11 pixels");
  const auto g = gaussian_taps();
  const int w = a.width, h = a.height, ch = a.channels;
  const int ow = w - kSsimWindow + 1, oh = h - kSsimWindow + 1;
  const double c1 = (kSsimK1 * 255.0) * (kSsimK1 * 255.0);
  const double c2 = (kSsimK2 * 255.0) * (kSsimK2 * 255.0);

  double channel_sum = 0;
  for (int c = 0; c < ch; ++c) {
    // Horizontal pass of the five moments, then vertical pass per output row.
    const std::size_t hsize = static_cast<std::size_t>(h) * ow;
    std::vector<double> hx(hsize), hy(hsize), hxx(hsize), hyy(hsize), hxy(hsize);
    parallel_for(static_cast<std::size_t>(h), threads, [&](std::size_t y) {
      for (int x = 0; x < ow; ++x) {
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int k = 0; k < kSsimWindow; ++k) {
          const double va = a.at(x + k, static_cast<int>(y), c);
          const double vb = b.at(x + k, static_cast<int>(y), c);
          sx += g[k] * va;
          sy += g[k] * vb;
          // Products of 8-bit values are exact, which keeps SSIM(a,b) == SSIM(b,a) bitwise.
          sxx += g[k] * (va * va);
          syy += g[k] * (vb * vb);
          sxy += g[k] * (va * vb);
        }
        const std::size_t i = y * ow + x;
        hx[i] = sx, hy[i] = sy, hxx[i] = sxx, hyy[i] = syy, hxy[i] = sxy;
      }
    });
    std::vector<double> row_sums(static_cast<std::size_t>(oh));
    parallel_for(static_cast<std::size_t>(oh), threads, [&](std::size_t y) {
      double row = 0;
      for (int x = 0; x < ow; ++x) {
        double mx = 0, my = 0, exx = 0, eyy = 0, exy = 0;
        for (int k = 0; k < kSsimWindow; ++k) {
          const std::size_t i = (y + k) * ow + x;
          mx += g[k] * hx[i];
          my += g[k] * hy[i];
          exx += g[k] * hxx[i];
          eyy += g[k] * hyy[i];
          exy += g[k] * hxy[i];
        }
        const double vx = exx - mx * mx, vy = eyy - my * my, cov = exy - mx * my;
        row += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      }
      row_sums[y] = row;
    });
    double total = 0;
    for (double r : row_sums) total += r;
    channel_sum += total / (static_cast<double>(ow) * oh);
  }
  return channel_sum / ch;
}

}  // namespace matsplat::metrics
