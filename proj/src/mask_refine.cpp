#include "matsplat/mask_refine.hpp"

#include <limits>

#include "matsplat/error.hpp"
#include "matsplat/parallel.hpp"
#include "matsplat/vote_histogram.hpp"

namespace matsplat::mask_refine {

InstanceSet remove_overlaps(const InstanceSet& instances) {
  instances.validate();
  const std::size_t npix = static_cast<std::size_t>(instances.width) * instances.height;
  std::vector<std::size_t> sizes(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) sizes[i] = instances.pixel_count(i);

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> owner(npix, kNone);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& m = instances.masks[i];
    for (std::size_t p = 0; p < npix; ++p) {
      if (!m[p]) continue;
      // Instances are scanned in index order, so a strict comparison keeps the lowest index on ties.
      if (owner[p] == kNone || sizes[i] < sizes[owner[p]]) owner[p] = i;
    }
  }

  std::vector<std::vector<std::uint8_t>> masks(instances.size(), std::vector<std::uint8_t>(npix, 0));
  std::vector<bool> nonempty(instances.size(), false);
  for (std::size_t p = 0; p < npix; ++p) {
    if (owner[p] == kNone) continue;
    masks[owner[p]][p] = 1;
    nonempty[owner[p]] = true;
  }

  InstanceSet out;
  out.width = instances.width;
  out.height = instances.height;
  for (std::size_t i = 0; i < masks.size(); ++i)
    if (nonempty[i]) out.masks.push_back(std::move(masks[i]));
  return out;
}

MaterialMap refine_labels(const MaterialMap& materials, const InstanceSet& instances, int threads) {
  instances.validate();
  if (materials.width != instances.width || materials.height != instances.height ||
      materials.pixels.size() != static_cast<std::size_t>(materials.width) * materials.height)
    fail(ErrorKind::Shape, "material map is " + std::to_string(materials.width) + "x" +
                               std::to_string(materials.height) + " but instances are " +
                               std::to_string(instances.width) + "x" + std::to_string(instances.height));

  const std::size_t npix = materials.pixels.size();
  std::vector<std::uint8_t> claimed(npix, 0);
  for (const auto& m : instances.masks) {
    for (std::size_t p = 0; p < npix; ++p) {
      if (!m[p]) continue;
      if (claimed[p]) fail(ErrorKind::Data, "instances overlap; run remove_overlaps first");
      claimed[p] = 1;
    }
  }

  std::vector<ClassId> majority(instances.size(), kUnlabeled);
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    VoteHistogram hist;
    const auto& m = instances.masks[i];
    for (std::size_t p = 0; p < npix; ++p)
      if (m[p] && materials.pixels[p] != kUnlabeled) hist.add(materials.pixels[p]);
    majority[i] = hist.argmax();
  });

  MaterialMap out = materials;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (majority[i] == kUnlabeled) continue;
    const auto& m = instances.masks[i];
    for (std::size_t p = 0; p < npix; ++p)
      if (m[p]) out.pixels[p] = majority[i];
  }
  return out;
}

}  // namespace matsplat::mask_refine
