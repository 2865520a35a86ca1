#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hardi/volume.hpp"

namespace hardi {

// A fiber bundle in slice coordinates (voxel units, x then y). Every slice of
// the phantom shares the same in-plane geometry.
struct FiberStrand {
  std::vector<Eigen::Vector2d> centerline;
  double half_width = 2.0;
};

// Diffusivities in mm^2/s. These are configuration constants of the
// generator, not measured values.
struct TissueParameters {
  Eigen::Vector3d fiber_eigenvalues{1.7e-3, 0.3e-3, 0.3e-3};
  double csf_diffusivity = 3.0e-3;
  double gm_diffusivity = 0.8e-3;
  double s0 = 100.0;
  // Fiber volume fraction on a strand's centerline and at its edge; the
  // remainder of a white-matter voxel is free water (csf_diffusivity).
  double fiber_fraction_center = 1.0;
  double fiber_fraction_edge = 0.1;
};

struct PhantomSpec {
  Dims dims{64, 64, 3};
  std::size_t n_directions = 64;
  double b_value = 1500.0;
  double voxel_size_mm = 3.0;
  // Rician SNR relative to S0; 0 disables noise.
  double snr = 0.0;
  std::uint64_t seed = 42;
  std::vector<FiberStrand> geometry;
  // Two overlapping strands label a voxel WMCF only above this tangent angle.
  double crossing_angle_deg = 30.0;
  // Radius of the circular phantom mask in voxels; <= 0 picks min(X, Y)/2 - 2.
  double mask_radius = 0.0;
  TissueParameters tissue;
};

struct Compartment {
  Eigen::Matrix3d tensor;
  double fraction;
};

// Ground truth for one in-plane position: its label and the tensors that
// make up its noiseless signal.
struct VoxelComposition {
  TissueClass label;
  std::vector<Compartment> compartments;
};

struct Phantom {
  DwiVolume dwi;
  LabelVolume labels;
};

// Fixed strand layout for a 64x64 slice: a straight bundle crossed at 90 deg
// by a shorter one, a U-shaped bundle, and two diagonal bundles crossing at
// about 67 deg. Identical on every call.
std::vector<FiberStrand> default_fibercup_geometry();

// Multiplies every coordinate and half-width by `factor`, for grids other
// than 64x64.
std::vector<FiberStrand> scale_geometry(const std::vector<FiberStrand>& strands, double factor);

// Throws ValidationError on an invalid spec or on geometry that leaves the
// mask interior.
void validate(const PhantomSpec& spec);

VoxelComposition describe_voxel(const PhantomSpec& spec, std::size_t x, std::size_t y);

// Multi-tensor signal with optional Rician noise. The noise stream of a voxel
// is derived from (seed, x, y, z) only. S0 is stored noise-free. Throws
// ValidationError when fewer than four classes are produced.
Phantom generate_phantom(const PhantomSpec& spec);

// Minimum tangent angle (degrees, in [0, 90]) between two line directions.
double line_angle_deg(const Eigen::Vector2d& a, const Eigen::Vector2d& b);

}  // namespace hardi
