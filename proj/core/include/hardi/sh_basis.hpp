#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace hardi {

// Real symmetric spherical harmonics (even degrees only). Coefficient j of an
// order-L expansion has degree l and order m with j = l(l+1)/2 + m, l even,
// -l <= m <= l:
//   m < 0 : sqrt(2) * Re(Y_l^|m|)
//   m = 0 : Y_l^0
//   m > 0 : sqrt(2) * Im(Y_l^m)
// The basis is orthonormal on the sphere.

inline constexpr double kDefaultShLambda = 0.006;

std::size_t sh_n_coeffs(int order);
std::size_t sh_index(int l, int m);
int sh_degree(std::size_t index);
// Basis value for coefficient (l, m) at polar angle theta, azimuth phi.
double sh_value(int l, int m, double theta, double phi);
Eigen::VectorXd sh_row(const Eigen::Vector3d& direction, int order);

// Least-squares fitter of S/S0 samples onto the order-L basis with
// Laplace-Beltrami regularization (weight lambda, penalty l^2 (l+1)^2).
class ShBasis {
 public:
  // Throws ValidationError for an odd or unsupported order and NumericalError
  // if the regularized normal matrix is singular for these directions.
  ShBasis(std::span<const Eigen::Vector3d> directions, int order, double lambda);

  int order() const { return order_; }
  double lambda() const { return lambda_; }
  std::size_t n_coeffs() const { return static_cast<std::size_t>(design_.cols()); }
  const Eigen::MatrixXd& design_matrix() const { return design_; }

  void fit(std::span<const double> samples, std::span<double> coeffs) const;
  Eigen::VectorXd fit(std::span<const double> samples) const;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& coeffs) const { return design_ * coeffs; }

 private:
  int order_;
  double lambda_;
  Eigen::MatrixXd design_;
  Eigen::MatrixXd projector_;
};

}  // namespace hardi
