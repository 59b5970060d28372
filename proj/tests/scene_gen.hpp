#pragma once

#include <random>

#include "matsplat/types.hpp"

namespace scene_gen {

using namespace matsplat;

inline CameraModel identity_camera(int w, int h, double f) {
  CameraModel c;
  c.id = "cam";
  c.width = w;
  c.height = h;
  c.fx = c.fy = f;
  c.cx = w / 2.0;
  c.cy = h / 2.0;
  return c;
}

inline Quat random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Quat q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q;
}

/// Up to `max_splats` splats inside the view frustum of identity_camera(32, 32, 30).
inline GaussianCloud random_splats(std::mt19937_64& rng, int max_splats) {
  std::uniform_int_distribution<int> count(1, max_splats);
  std::uniform_real_distribution<double> depth(1.0, 6.0), lateral(-0.6, 0.6), scale(0.02, 0.4), opacity(0.05, 1.0);
  GaussianCloud c;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const double z = depth(rng);
    c.positions.emplace_back(lateral(rng) * z, lateral(rng) * z, z);
    c.scales.emplace_back(scale(rng), scale(rng), scale(rng));
    c.rotations.push_back(random_rotation(rng));
    c.opacities.push_back(opacity(rng));
  }
  return c;
}

/// Random labels with roughly 10% unlabeled pixels, in blocks so votes are not pure noise.
inline MaterialMap random_mask(std::mt19937_64& rng, int w, int h) {
  MaterialMap m;
  m.width = w;
  m.height = h;
  m.palette = default_palette();
  m.pixels.resize(static_cast<std::size_t>(w) * h);
  std::uniform_int_distribution<int> cls(0, 10);
  std::vector<ClassId> blocks(64);
  for (auto& b : blocks) {
    const int v = cls(rng);
    b = v == 10 ? kUnlabeled : static_cast<ClassId>(v);
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.pixels[y * w + x] = blocks[(y * 8 / h) * 8 + x * 8 / w];
  return m;
}

}  // namespace scene_gen
