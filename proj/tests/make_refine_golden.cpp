// Writes the refine fixture used by test_cli: a noisy material mask, an indexed
// instance image, and the expected refined mask computed by the test oracle.
#include <cstdio>
#include <random>

#include "matsplat/io/io.hpp"
#include "oracles.hpp"

using namespace matsplat;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_refine_golden <dir>\n");
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  const int w = 64, h = 48;
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> cls(0, 9), noise(0, 99);

  MaterialMap materials;
  materials.width = w;
  materials.height = h;
  materials.palette = default_palette();
  materials.pixels.resize(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int n = noise(rng);
      ClassId c = x < w / 2 ? classes::kConcrete : classes::kGlass;
      if (y > 2 * h / 3) c = classes::kAsphalt;
      if (n < 15) c = static_cast<ClassId>(cls(rng));
      if (n >= 95) c = kUnlabeled;
      materials.pixels[static_cast<std::size_t>(y) * w + x] = c;
    }

  MaterialMap index;
  index.width = w;
  index.height = h;
  index.palette = default_palette();
  index.pixels.assign(materials.pixels.size(), 0);
  const int rects[][4] = {{2, 2, 20, 20}, {34, 4, 60, 28}, {0, 34, 64, 48}, {22, 10, 32, 30}, {40, 30, 44, 33}};
  for (int k = 0; k < 5; ++k)
    for (int y = rects[k][1]; y < rects[k][3]; ++y)
      for (int x = rects[k][0]; x < rects[k][2]; ++x) index.pixels[static_cast<std::size_t>(y) * w + x] = ClassId(k + 1);

  io::write_mask(materials, dir / "refine_materials.png");
  io::write_mask(index, dir / "refine_instances.png");
  const InstanceSet inst = io::load_instances(dir / "refine_instances.png");
  MaterialMap golden = materials;
  golden.pixels = oracle::refine(materials, inst);
  io::write_mask(golden, dir / "refine_golden.png");
  return 0;
}
