#include "hardi/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "hardi/errors.hpp"
#include "hardi/parallel.hpp"

namespace hardi {

namespace {

int sh_order_of(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kSh4: return 4;
    case FeatureKind::kSh8: return 8;
    default:
      throw ValidationError("expected an SH4 or SH8 feature volume, got " +
                            std::string(to_string(kind)));
  }
}

}  // namespace

TensorFitter::TensorFitter(const GradientTable& gradients) {
  const auto rows = static_cast<Eigen::Index>(gradients.size());
  const double b = gradients.b_value();
  Eigen::MatrixXd design(rows, 6);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& g = gradients[static_cast<std::size_t>(r)];
    design.row(r) << -b * g.x() * g.x(), -b * g.y() * g.y(), -b * g.z() * g.z(),
        -2.0 * b * g.x() * g.y(), -2.0 * b * g.x() * g.z(), -2.0 * b * g.y() * g.z();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 6) {
    throw ValidationError("gradient directions are rank deficient for tensor fitting (rank " +
                          std::to_string(qr.rank()) + " < 6)");
  }
  projector_ = qr.solve(Eigen::MatrixXd::Identity(rows, rows));
}

TensorFit TensorFitter::fit(std::span<const double> attenuation) const {
  require(attenuation.size() == static_cast<std::size_t>(projector_.cols()),
          "attenuation sample count does not match the gradient table");
  Eigen::VectorXd log_signal(projector_.cols());
  for (Eigen::Index i = 0; i < log_signal.size(); ++i) {
    log_signal[i] = std::log(std::max(attenuation[static_cast<std::size_t>(i)], kSignalFloor));
  }
  const Eigen::Matrix<double, 6, 1> d = projector_ * log_signal;
  TensorFit out;
  out.tensor << d[0], d[3], d[4],
                d[3], d[1], d[5],
                d[4], d[5], d[2];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(out.tensor, Eigen::EigenvaluesOnly);
  // Eigen returns ascending order.
  out.eigenvalues = eig.eigenvalues().reverse();
  return out;
}

FeatureVolume fit_sh(const DwiVolume& volume, int order, double lambda) {
  require(order == 4 || order == 8, "SH feature order must be 4 or 8");
  const ShBasis basis(volume.gradients().directions(), order, lambda);
  const std::size_t n = basis.n_coeffs();
  const std::size_t nvox = volume.dims().voxels();
  const std::size_t ndir = volume.n_directions();
  std::vector<double> values(nvox * n);
  parallel_for(nvox, [&](std::size_t v) {
    std::vector<double> normalized(ndir);
    const auto s = volume.signal(v);
    const double s0 = volume.s0(v);
    for (std::size_t g = 0; g < ndir; ++g) normalized[g] = s[g] / s0;
    basis.fit(normalized, {values.data() + v * n, n});
  });
  return FeatureVolume(volume.dims(), order == 4 ? FeatureKind::kSh4 : FeatureKind::kSh8,
                       std::move(values), volume.voxel_size_mm());
}

FeatureVolume fit_tensor_eigenvalues(const DwiVolume& volume) {
  const TensorFitter fitter(volume.gradients());
  const std::size_t nvox = volume.dims().voxels();
  const std::size_t ndir = volume.n_directions();
  std::vector<double> values(nvox * 3);
  parallel_for(nvox, [&](std::size_t v) {
    std::vector<double> normalized(ndir);
    const auto s = volume.signal(v);
    const double s0 = volume.s0(v);
    for (std::size_t g = 0; g < ndir; ++g) normalized[g] = s[g] / s0;
    const auto fit = fitter.fit(normalized);
    for (int k = 0; k < 3; ++k) values[v * 3 + static_cast<std::size_t>(k)] = fit.eigenvalues[k];
  });
  return FeatureVolume(volume.dims(), FeatureKind::kEig, std::move(values),
                       volume.voxel_size_mm());
}

std::vector<double> sh_power_spectrum(std::span<const double> coeffs) {
  int order = 0;
  while (sh_n_coeffs(order) < coeffs.size()) order += 2;
  require(sh_n_coeffs(order) == coeffs.size(), "coefficient count is not a full even SH order");
  std::vector<double> power(static_cast<std::size_t>(order / 2 + 1), 0.0);
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    power[static_cast<std::size_t>(sh_degree(j) / 2)] += coeffs[j] * coeffs[j];
  }
  return power;
}

FeatureVolume rotation_invariant_features(const FeatureVolume& sh) {
  const int order = sh_order_of(sh.kind());
  const std::size_t nvox = sh.dims().voxels();
  const std::size_t out_n = static_cast<std::size_t>(order / 2 + 1);
  std::vector<double> values(nvox * out_n);
  for (std::size_t v = 0; v < nvox; ++v) {
    const auto power = sh_power_spectrum(sh.at(v));
    std::copy(power.begin(), power.end(), values.begin() + static_cast<std::ptrdiff_t>(v * out_n));
  }
  return FeatureVolume(sh.dims(), order == 4 ? FeatureKind::kSh4Ri : FeatureKind::kSh8Ri,
                       std::move(values), sh.voxel_size_mm());
}

double legendre_at_zero(int l) {
  require(l >= 0, "Legendre degree must be >= 0");
  // (n+1) P_{n+1}(0) = -n P_{n-1}(0)
  double prev = 1.0;  // P_0(0)
  double cur = 0.0;   // P_1(0)
  if (l == 0) return prev;
  for (int k = 1; k < l; ++k) {
    const double next = -static_cast<double>(k) * prev / static_cast<double>(k + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

FeatureVolume sh_to_odf(const FeatureVolume& sh) {
  const int order = sh_order_of(sh.kind());
  const std::size_t n = sh.n();
  std::vector<double> scale(n);
  for (std::size_t j = 0; j < n; ++j) {
    scale[j] = 2.0 * std::numbers::pi * legendre_at_zero(sh_degree(j));
  }
  const auto in = sh.data();
  std::vector<double> values(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) values[i] = scale[i % n] * in[i];
  return FeatureVolume(sh.dims(), order == 4 ? FeatureKind::kOdf4 : FeatureKind::kOdf8,
                       std::move(values), sh.voxel_size_mm());
}

FeatureVolume compute_features(const DwiVolume& volume, FeatureKind kind, double lambda) {
  switch (kind) {
    case FeatureKind::kSh4: return fit_sh(volume, 4, lambda);
    case FeatureKind::kSh8: return fit_sh(volume, 8, lambda);
    case FeatureKind::kEig: return fit_tensor_eigenvalues(volume);
    case FeatureKind::kSh4Ri: return rotation_invariant_features(fit_sh(volume, 4, lambda));
    case FeatureKind::kSh8Ri: return rotation_invariant_features(fit_sh(volume, 8, lambda));
    case FeatureKind::kOdf4: return sh_to_odf(fit_sh(volume, 4, lambda));
    case FeatureKind::kOdf8: return sh_to_odf(fit_sh(volume, 8, lambda));
  }
  throw ValidationError("unsupported feature kind");
}

}  // namespace hardi
