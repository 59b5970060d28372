#include "matsplat/error.hpp"
#include "matsplat/io/io.hpp"

namespace matsplat::io {

MaterialMap load_mask(const fs::path& path, const Palette& palette) {
  const Image8 img = read_image(path);
  if (img.channels != 1)
    fail(ErrorKind::Format, path.string() + ": mask must be single-channel, found " +
                                std::to_string(img.channels) + " channels");
  MaterialMap map;
  map.width = img.width;
  map.height = img.height;
  map.pixels = img.data;
  map.palette = palette;
  try {
    map.validate();
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
  return map;
}

void write_mask(const MaterialMap& map, const fs::path& path) {
  map.validate();
  Image8 img(map.width, map.height, 1);
  img.data = map.pixels;
  write_image(img, path);
}

InstanceSet load_instances(const fs::path& path) {
  const auto ext = path.extension().string();
  std::vector<Image8> pages;
  if (ext == ".pgm" || ext == ".PGM") pages = read_pnm_pages(path);
  else pages.push_back(read_image(path));
  if (pages.empty()) fail(ErrorKind::Format, path.string() + ": no images");
  for (const auto& p : pages) {
    if (p.channels != 1) fail(ErrorKind::Format, path.string() + ": instance images must be single-channel");
    if (p.width != pages[0].width || p.height != pages[0].height)
      fail(ErrorKind::Shape, path.string() + ": instance pages differ in size");
  }

  InstanceSet set;
  set.width = pages[0].width;
  set.height = pages[0].height;
  const std::size_t n = pages[0].data.size();
  if (pages.size() > 1) {
    // One binary page per instance.
    for (const auto& p : pages) {
      std::vector<std::uint8_t> m(n);
      for (std::size_t i = 0; i < n; ++i) m[i] = p.data[i] != 0;
      set.masks.push_back(std::move(m));
    }
  } else {
    // Indexed label image: 0 is background, value k is instance k.
    int max_id = 0;
    for (auto v : pages[0].data) max_id = std::max<int>(max_id, v);
    set.masks.assign(static_cast<std::size_t>(max_id), std::vector<std::uint8_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      if (pages[0].data[i] != 0) set.masks[pages[0].data[i] - 1][i] = 1;
  }
  return set;
}

void write_instances_pgm(const InstanceSet& instances, const fs::path& path) {
  instances.validate();
  std::vector<Image8> pages;
  for (const auto& m : instances.masks) {
    Image8 p(instances.width, instances.height, 1);
    for (std::size_t i = 0; i < m.size(); ++i) p.data[i] = m[i] ? 255 : 0;
    pages.push_back(std::move(p));
  }
  write_pnm_pages(pages, path);
}

}  // namespace matsplat::io
