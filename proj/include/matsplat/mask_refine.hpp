#pragma once

#include "matsplat/types.hpp"

namespace matsplat::mask_refine {

/// Makes instances pairwise disjoint. A pixel claimed by several instances stays
/// with the one having the fewest pixels (ties: lowest index); instances left
/// empty are dropped. Throws Error(Shape) on mismatched mask sizes.
InstanceSet remove_overlaps(const InstanceSet& instances);

/// Majority-votes the material label inside each instance. Unlabeled pixels
/// abstain; ties pick the lowest class id; an instance with no labeled pixel is
/// left untouched. Pixels outside every instance keep their label.
/// Instances must be disjoint (Error(Shape) on size mismatch, Error(Data) on overlap).
MaterialMap refine_labels(const MaterialMap& materials, const InstanceSet& instances, int threads = 1);

}  // namespace matsplat::mask_refine
