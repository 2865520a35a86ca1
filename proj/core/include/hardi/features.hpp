#pragma once

#include <span>

#include <Eigen/Core>

#include "hardi/sh_basis.hpp"
#include "hardi/volume.hpp"

namespace hardi {

struct TensorFit {
  Eigen::Matrix3d tensor;
  // Sorted descending.
  Eigen::Vector3d eigenvalues;
};

// Log-linear least-squares diffusion tensor fit for a fixed gradient table.
class TensorFitter {
 public:
  // Throws ValidationError if the directions cannot determine all six
  // tensor entries.
  explicit TensorFitter(const GradientTable& gradients);

  // `attenuation` is S(g)/S0; values below kSignalFloor are clamped first.
  TensorFit fit(std::span<const double> attenuation) const;

  static constexpr double kSignalFloor = 1e-6;

 private:
  Eigen::MatrixXd projector_;
};

// SH coefficients of S/S0, order 4 or 8 (kind SH4 / SH8).
FeatureVolume fit_sh(const DwiVolume& volume, int order, double lambda = kDefaultShLambda);

// Sorted tensor eigenvalues per voxel (kind EIG).
FeatureVolume fit_tensor_eigenvalues(const DwiVolume& volume);

// Per-degree power p_l = sum_m c_{l,m}^2 (kind SH4RI / SH8RI).
FeatureVolume rotation_invariant_features(const FeatureVolume& sh);
std::vector<double> sh_power_spectrum(std::span<const double> coeffs);

// Funk-Radon transform in the SH domain, c'_{l,m} = 2 pi P_l(0) c_{l,m}
// (kind ODF4 / ODF8).
FeatureVolume sh_to_odf(const FeatureVolume& sh);
double legendre_at_zero(int l);

// Builds any supported feature kind straight from a DWI volume.
FeatureVolume compute_features(const DwiVolume& volume, FeatureKind kind,
                               double lambda = kDefaultShLambda);

}  // namespace hardi
