#pragma once

#include "sonovis/core/tensor.hpp"
#include "sonovis/data/manifest.hpp"
#include "sonovis/metrics/segmentation.hpp"

namespace sonovis::data {

// Network-ready visual tensor for one manifest entry, resized to
// image_size. Depth: (1,S,S) in [0,1]. Segmentation: one-hot
// (num_classes,S,S), resized with nearest neighbour so labels never blend.
Tensor load_visual(const PairManifest& manifest, const ManifestEntry& entry, int image_size);

// One-hot encode a class-id map (channel count = num_classes).
Tensor one_hot(const metrics::ClassMap& ids, int num_classes);

// Channel-argmax back to class ids.
metrics::ClassMap argmax_ids(const Tensor& chw);

}  // namespace sonovis::data
