#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "hardi/volume.hpp"

namespace hardi {

// Deterministic near-uniform directions on the upper hemisphere (z >= 0),
// laid out along a golden-angle spiral. Antipodal symmetry of the diffusion
// signal makes the lower hemisphere redundant.
std::vector<Eigen::Vector3d> spiral_directions(std::size_t count);

// Plain-text gradient table: one "x y z" triple per line. Blank lines and
// lines starting with '#' are skipped. Vectors are normalized; a zero vector
// is a ValidationError.
GradientTable load_gradient_text(const std::filesystem::path& path, double b_value);

}  // namespace hardi
