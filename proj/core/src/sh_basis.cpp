#include "hardi/sh_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "hardi/errors.hpp"

namespace hardi {

namespace {

void check_order(int order) {
  require(order >= 0 && order % 2 == 0 && order <= 16,
          "SH order must be an even integer in [0, 16], got " + std::to_string(order));
}

}  // namespace

std::size_t sh_n_coeffs(int order) {
  check_order(order);
  return static_cast<std::size_t>((order + 1) * (order + 2) / 2);
}

std::size_t sh_index(int l, int m) { return static_cast<std::size_t>(l * (l + 1) / 2 + m); }

int sh_degree(std::size_t index) {
  int l = 0;
  while (sh_index(l + 2, -(l + 2)) <= index) l += 2;
  return l;
}

double sh_value(int l, int m, double theta, double phi) {
  const unsigned ul = static_cast<unsigned>(l);
  const unsigned am = static_cast<unsigned>(std::abs(m));
  if (m == 0) return std::sph_legendre(ul, 0, theta);
  const double legendre = std::numbers::sqrt2 * std::sph_legendre(ul, am, theta);
  return m < 0 ? legendre * std::cos(am * phi) : legendre * std::sin(am * phi);
}

Eigen::VectorXd sh_row(const Eigen::Vector3d& direction, int order) {
  const std::size_t n = sh_n_coeffs(order);
  const Eigen::Vector3d d = direction.normalized();
  const double theta = std::acos(std::clamp(d.z(), -1.0, 1.0));
  const double phi = std::atan2(d.y(), d.x());
  Eigen::VectorXd row(static_cast<Eigen::Index>(n));
  for (int l = 0; l <= order; l += 2) {
    for (int m = -l; m <= l; ++m) {
      row[static_cast<Eigen::Index>(sh_index(l, m))] = sh_value(l, m, theta, phi);
    }
  }
  return row;
}

ShBasis::ShBasis(std::span<const Eigen::Vector3d> directions, int order, double lambda)
    : order_(order), lambda_(lambda) {
  check_order(order);
  require(lambda >= 0.0 && std::isfinite(lambda), "SH regularization lambda must be >= 0");
  const auto n = static_cast<Eigen::Index>(sh_n_coeffs(order));
  const auto rows = static_cast<Eigen::Index>(directions.size());
  design_.resize(rows, n);
  for (Eigen::Index r = 0; r < rows; ++r) design_.row(r) = sh_row(directions[r], order).transpose();

  Eigen::VectorXd penalty(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double l = sh_degree(static_cast<std::size_t>(j));
    penalty[j] = l * l * (l + 1) * (l + 1);
  }
  Eigen::MatrixXd normal = design_.transpose() * design_;
  normal.diagonal() += lambda * penalty;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(normal);
  if (qr.rank() < n) {
    throw NumericalError("SH normal matrix of order " + std::to_string(order) + " is singular for " +
                         std::to_string(rows) + " directions (rank " + std::to_string(qr.rank()) +
                         " < " + std::to_string(n) + "); the direction set cannot support this basis");
  }
  projector_ = qr.solve(design_.transpose());
}

void ShBasis::fit(std::span<const double> samples, std::span<double> coeffs) const {
  require(samples.size() == static_cast<std::size_t>(design_.rows()),
          "sample count does not match the SH design matrix");
  require(coeffs.size() == n_coeffs(), "coefficient buffer has the wrong size");
  Eigen::Map<const Eigen::VectorXd> s(samples.data(), static_cast<Eigen::Index>(samples.size()));
  Eigen::Map<Eigen::VectorXd> c(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  c.noalias() = projector_ * s;
}

Eigen::VectorXd ShBasis::fit(std::span<const double> samples) const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(n_coeffs()));
  fit(samples, {c.data(), n_coeffs()});
  return c;
}

}  // namespace hardi
