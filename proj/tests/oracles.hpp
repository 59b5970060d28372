#pragma once

// Slow, direct reference implementations used only by the tests. None of them
// call into the code they check beyond plain data types.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <vector>

#include "matsplat/image.hpp"
#include "matsplat/label_project.hpp"
#include "matsplat/types.hpp"

namespace oracle {

using namespace matsplat;

inline ClassId histogram_argmax(const std::array<std::uint64_t, 256>& counts) {
  ClassId best = kUnlabeled;
  std::uint64_t best_n = 0;
  for (int c = 0; c < 255; ++c) {
    if (counts[c] > best_n) {
      best_n = counts[c];
      best = static_cast<ClassId>(c);
    }
  }
  return best;
}

/// Per-pixel vote without tiles: all footprints, sorted front to back.
inline std::vector<std::int64_t> rasterize(const std::vector<label_project::SplatFootprint>& fps,
                                           const MaterialMap& mask, double threshold) {
  std::vector<std::size_t> order(fps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::make_pair(fps[a].depth, fps[a].gaussian) < std::make_pair(fps[b].depth, fps[b].gaussian);
  });
  std::vector<std::int64_t> out(mask.pixels.size(), -1);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * mask.width + x;
      if (mask.pixels[p] == kUnlabeled) continue;
      double t = 1.0, best_w = 0.0;
      std::int64_t best = -1, pick = -1;
      for (std::size_t i : order) {
        const auto& f = fps[i];
        const double dx = x + 0.5 - f.mean.x(), dy = y + 0.5 - f.mean.y();
        const double q = dx * (f.conic(0, 0) * dx + f.conic(0, 1) * dy) + dy * (f.conic(1, 0) * dx + f.conic(1, 1) * dy);
        if (q > 9.0) continue;
        const double a = f.opacity * std::exp(-0.5 * q);
        if (a <= 0) continue;
        if (a >= threshold) {
          pick = f.gaussian;
          break;
        }
        if (a * t > best_w) {
          best_w = a * t;
          best = f.gaussian;
        }
        t *= 1.0 - a;
      }
      if (pick < 0 && t < 0.5) pick = best;
      out[p] = pick;
    }
  }
  return out;
}

/// Majority label inside each (disjoint) instance; unlabeled pixels abstain.
inline std::vector<ClassId> refine(const MaterialMap& m, const InstanceSet& inst) {
  std::vector<ClassId> out = m.pixels;
  for (const auto& mask : inst.masks) {
    std::array<std::uint64_t, 256> counts{};
    for (std::size_t p = 0; p < mask.size(); ++p)
      if (mask[p] && m.pixels[p] != kUnlabeled) ++counts[m.pixels[p]];
    const ClassId c = histogram_argmax(counts);
    if (c == kUnlabeled) continue;
    for (std::size_t p = 0; p < mask.size(); ++p)
      if (mask[p]) out[p] = c;
  }
  return out;
}

inline Vec3 centroid(const LabeledMesh& mesh, std::size_t t) {
  const Triangle& tri = mesh.triangles[t];
  return (mesh.vertices[tri.a] + mesh.vertices[tri.b] + mesh.vertices[tri.c]) / 3.0;
}

/// Exhaustive k-nearest-centroid voting.
inline std::vector<ClassId> knn_labels(const std::vector<Vec3>& pos, const std::vector<ClassId>& labels,
                                       const LabeledMesh& mesh, std::size_t k) {
  std::vector<std::array<std::uint64_t, 256>> votes(mesh.triangles.size());
  for (auto& v : votes) v.fill(0);
  std::vector<Vec3> cents;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) cents.push_back(centroid(mesh, t));
  for (std::size_t g = 0; g < pos.size(); ++g) {
    if (labels[g] == kUnlabeled) continue;
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t t = 0; t < cents.size(); ++t) d.emplace_back((pos[g] - cents[t]).squaredNorm(), t);
    std::sort(d.begin(), d.end());
    for (std::size_t i = 0; i < std::min(k, d.size()); ++i) ++votes[d[i].second][labels[g]];
  }
  std::vector<ClassId> out;
  for (const auto& v : votes) out.push_back(histogram_argmax(v));
  return out;
}

/// BFS from every unlabeled triangle separately to the nearest labeled ones.
inline std::vector<ClassId> fill(const LabeledMesh& mesh, std::size_t max_hops) {
  const std::size_t n = mesh.triangles.size();
  auto shares_edge = [&](std::size_t a, std::size_t b) {
    const auto& ta = mesh.triangles[a];
    const auto& tb = mesh.triangles[b];
    const std::uint32_t va[3] = {ta.a, ta.b, ta.c}, vb[3] = {tb.a, tb.b, tb.c};
    int common = 0;
    for (auto x : va)
      for (auto y : vb) common += x == y;
    return common >= 2;
  };
  std::vector<ClassId> out = mesh.labels;
  for (std::size_t s = 0; s < n; ++s) {
    if (mesh.labels[s] != kUnlabeled) continue;
    std::vector<std::size_t> dist(n, SIZE_MAX);
    std::queue<std::size_t> q;
    dist[s] = 0;
    q.push(s);
    std::size_t found_at = SIZE_MAX;
    ClassId best = kUnlabeled;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      if (dist[u] > found_at || dist[u] > max_hops) break;
      if (mesh.labels[u] != kUnlabeled) {
        found_at = dist[u];
        best = std::min(best, mesh.labels[u]);
        continue;
      }
      for (std::size_t v = 0; v < n; ++v)
        if (dist[v] == SIZE_MAX && v != u && shares_edge(u, v)) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
    }
    out[s] = best;
  }
  return out;
}

struct RayHit {
  std::size_t triangle;
  double range;
};

/// Plane intersection then barycentric inside test; front faces only.
inline std::optional<RayHit> closest_hit(const LabeledMesh& mesh, const Vec3& o, const Vec3& d, double max_range) {
  std::optional<RayHit> best;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Vec3 a = mesh.vertices[mesh.triangles[t].a], b = mesh.vertices[mesh.triangles[t].b],
               c = mesh.vertices[mesh.triangles[t].c];
    const Vec3 n = (b - a).cross(c - a).normalized();
    const double facing = -n.dot(d);
    if (!(facing > 1e-3)) continue;
    const double r = n.dot(a - o) / n.dot(d);
    if (r < 1e-9 || r > max_range) continue;
    const Vec3 p = o + r * d;
    const double u = (b - a).cross(p - a).dot(n), v = (c - b).cross(p - b).dot(n), w = (a - c).cross(p - c).dot(n);
    if (u < 0 || v < 0 || w < 0) continue;
    if (!best || r < best->range) best = RayHit{t, r};
  }
  return best;
}

/// Direct 2D-window SSIM over the valid region.
inline double ssim(const Image8& a, const Image8& b) {
  const int W = 11;
  double g[W][W], total = 0;
  for (int i = 0; i < W; ++i)
    for (int j = 0; j < W; ++j) total += g[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
  for (auto& row : g)
    for (double& v : row) v /= total;
  const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
  double sum = 0;
  for (int ch = 0; ch < a.channels; ++ch) {
    double acc = 0;
    int count = 0;
    for (int y = 0; y + W <= a.height; ++y) {
      for (int x = 0; x + W <= a.width; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = 0; i < W; ++i)
          for (int j = 0; j < W; ++j) {
            const double va = a.at(x + j, y + i, ch), vb = b.at(x + j, y + i, ch);
            ma += g[i][j] * va;
            mb += g[i][j] * vb;
            saa += g[i][j] * va * va;
            sbb += g[i][j] * vb * vb;
            sab += g[i][j] * va * vb;
          }
        const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
        acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    }
    sum += acc / count;
  }
  return sum / a.channels;
}

inline double psnr(const Image8& a, const Image8& b) {
  double se = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = double(a.data[i]) - double(b.data[i]);
    se += d * d;
  }
  const double mse = se / a.data.size();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

/// Two passes: mean, then median by sorting a copy.
inline std::pair<double, double> mae_median(std::vector<double> e) {
  double s = 0;
  for (double v : e) s += v;
  std::sort(e.begin(), e.end());
  return {s / e.size(), e[(e.size() - 1) / 2]};
}

/// Returns (index, squared distance).
inline std::optional<std::pair<std::size_t, double>> nearest_within(const std::vector<Vec3>& ref, const Vec3& q,
                                                                   double radius) {
  std::optional<std::pair<std::size_t, double>> best;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d2 = (ref[i] - q).squaredNorm();
    if (d2 <= radius * radius && (!best || d2 < best->second)) best = std::make_pair(i, d2);
  }
  return best;
}

}  // namespace oracle
