#pragma once

#include <cstdint>
#include <vector>

#include "hardi/spatial_filter.hpp"
#include "hardi/volume.hpp"

namespace hardi::fixture {

// 16x16x1 grid of CSF (all-zero EIG features) with white-matter-like voxels
// on every second row and column. Lattice voxels cycle through the classes
// {GM, WMSF, WMCF} (starting point set by `seed`) and carry the matching
// one-hot feature vector, so the label is a function of the voxel's own
// features and the identity kernel is optimal, while smoothing mixes lattice
// neighbours into each other.
inline Dataset delta_toy(std::uint64_t seed = 0) {
  const Dims dims{16, 16, 1};
  std::vector<std::uint8_t> labels(dims.voxels(), 0);
  std::vector<double> values(dims.voxels() * 3, 0.0);
  std::uint64_t k = seed;
  for (std::size_t y = 1; y < dims.y; y += 2) {
    for (std::size_t x = 1; x < dims.x; x += 2) {
      const auto v = dims.index(x, y, 0);
      const auto c = static_cast<std::uint8_t>(1 + k++ % 3);
      labels[v] = c;
      values[v * 3 + c - 1] = 1.0;
    }
  }
  return flatten(FeatureVolume(dims, FeatureKind::kEig, std::move(values)),
                 LabelVolume(dims, std::move(labels)));
}

}  // namespace hardi::fixture
