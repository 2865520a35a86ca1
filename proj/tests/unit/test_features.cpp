#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "../oracles.hpp"
#include "hardi/errors.hpp"
#include "hardi/features.hpp"
#include "hardi/gradients.hpp"
#include "hardi/phantom.hpp"
#include "hardi/sh_basis.hpp"

using namespace hardi;

namespace {

DwiVolume single_voxel(const std::vector<double>& attenuation, double b = 1500.0) {
  const auto dirs = spiral_directions(attenuation.size());
  std::vector<double> sig(attenuation.size());
  for (std::size_t i = 0; i < sig.size(); ++i) sig[i] = 100.0 * attenuation[i];
  return DwiVolume(Dims{1, 1, 1}, 1.0, {100.0}, std::move(sig), GradientTable(dirs, b));
}

Eigen::VectorXd random_coeffs(std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd c(static_cast<Eigen::Index>(k));
  for (auto& v : c) v = n(rng);
  return c;
}

double eval_sh(const Eigen::VectorXd& c, const Eigen::Vector3d& g, int order) {
  return sh_row(g, order).dot(c);
}

}  // namespace

TEST_CASE("SH coefficient indexing") {
  CHECK(sh_n_coeffs(0) == 1);
  CHECK(sh_n_coeffs(4) == 15);
  CHECK(sh_n_coeffs(8) == 45);
  CHECK(sh_index(0, 0) == 0);
  CHECK(sh_index(2, -2) == 1);
  CHECK(sh_index(2, 2) == 5);
  CHECK(sh_index(8, 8) == 44);
  for (std::size_t j = 0; j < 45; ++j) {
    const int l = sh_degree(j);
    CHECK(l % 2 == 0);
    CHECK(j >= sh_index(l, -l));
    CHECK(j <= sh_index(l, l));
  }
  CHECK_THROWS_AS(sh_n_coeffs(3), ValidationError);
}

TEST_CASE("SH basis is orthonormal on the sphere") {
  // Gauss-Legendre in cos(theta) x uniform phi integrates band-limited products exactly.
  constexpr int kNt = 20;
  constexpr int kNp = 40;
  Eigen::VectorXd nodes(kNt);
  Eigen::VectorXd weights(kNt);
  {
    // Golub-Welsch.
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(kNt, kNt);
    for (int i = 1; i < kNt; ++i) {
      const double b = i / std::sqrt(4.0 * i * i - 1.0);
      j(i, i - 1) = b;
      j(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    nodes = es.eigenvalues();
    weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(45, 45);
  for (int t = 0; t < kNt; ++t) {
    const double ct = nodes[t];
    const double st = std::sqrt(1.0 - ct * ct);
    for (int p = 0; p < kNp; ++p) {
      const double phi = 2.0 * std::numbers::pi * p / kNp;
      const Eigen::Vector3d g(st * std::cos(phi), st * std::sin(phi), ct);
      const Eigen::VectorXd row = sh_row(g, 8);
      gram += weights[t] * (2.0 * std::numbers::pi / kNp) * row * row.transpose();
    }
  }
  CHECK((gram - Eigen::MatrixXd::Identity(45, 45)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("SH row agrees with sh_value") {
  const Eigen::Vector3d g = Eigen::Vector3d(0.3, -0.5, 0.8).normalized();
  const double theta = std::acos(g.z());
  const double phi = std::atan2(g.y(), g.x());
  const Eigen::VectorXd row = sh_row(g, 8);
  for (int l = 0; l <= 8; l += 2) {
    for (int m = -l; m <= l; ++m) {
      CHECK(row[static_cast<Eigen::Index>(sh_index(l, m))] ==
            doctest::Approx(sh_value(l, m, theta, phi)).epsilon(1e-14));
    }
  }
  CHECK(sh_value(0, 0, 0.4, 1.0) == doctest::Approx(1.0 / (2.0 * std::sqrt(std::numbers::pi))));
}

TEST_CASE("constant signal projects onto Y00 only") {
  const double c = 0.37;
  const auto dwi = single_voxel(std::vector<double>(64, c));
  for (int order : {4, 8}) {
    const auto f = fit_sh(dwi, order, 0.0);
    CHECK(f.at(0, 0) == doctest::Approx(c * 2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-12));
    for (std::size_t j = 1; j < f.n(); ++j) CHECK(std::abs(f.at(0, j)) < 1e-10);
  }
}

TEST_CASE("band-limited signal is recovered exactly without regularization") {
  const auto dirs = spiral_directions(64);
  for (int order : {4, 8}) {
    const ShBasis basis(dirs, order, 0.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Eigen::VectorXd c = random_coeffs(basis.n_coeffs(), seed);
      const Eigen::VectorXd s = basis.evaluate(c);
      const Eigen::VectorXd back = basis.fit(std::span<const double>(s.data(), s.size()));
      CHECK((back - c).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("regularized fit matches the extended-precision normal equations") {
  PhantomSpec spec;
  spec.geometry = default_fibercup_geometry();
  spec.snr = 20.0;
  const auto phantom = generate_phantom(spec);
  const auto& dwi = phantom.dwi;
  const auto dirs = dwi.gradients().directions();
  // A WMSF voxel on the horizontal bundle, away from the crossing.
  const std::size_t v = dwi.dims().index(40, 14, 1);
  REQUIRE(phantom.labels.at(v) == 2);
  std::vector<double> att(64);
  for (std::size_t g = 0; g < 64; ++g) att[g] = dwi.signal(v)[g] / dwi.s0(v);
  for (int order : {4, 8}) {
    const auto features = fit_sh(dwi, order, kDefaultShLambda);
    const auto oracle = oracle::sh_normal_equations(dirs, att, order, kDefaultShLambda);
    for (std::size_t j = 0; j < oracle.size(); ++j) {
      CHECK(std::abs(features.at(v, j) - static_cast<double>(oracle[j])) < 1e-8);
    }
  }
}

TEST_CASE("SH basis rejects bad orders and degenerate direction sets") {
  const auto dirs = spiral_directions(64);
  CHECK_THROWS_AS(ShBasis(dirs, 3, 0.0), ValidationError);
  CHECK_THROWS_AS(ShBasis(dirs, 18, 0.0), ValidationError);
  const auto few = spiral_directions(10);
  CHECK_THROWS_AS(ShBasis(few, 8, 0.0), NumericalError);
  CHECK_NOTHROW(ShBasis(few, 8, kDefaultShLambda));
  CHECK_THROWS_AS(fit_sh(single_voxel(std::vector<double>(64, 0.5)), 6, 0.0), ValidationError);
}

TEST_CASE("isotropic signal gives equal tensor eigenvalues") {
  const double d = 0.8e-3;
  const auto f = fit_tensor_eigenvalues(single_voxel(std::vector<double>(64, std::exp(-1500.0 * d))));
  for (int k = 0; k < 3; ++k) CHECK(f.at(0, static_cast<std::size_t>(k)) == doctest::Approx(d).epsilon(1e-12));
}

TEST_CASE("random SPD tensors are recovered") {
  const auto dirs = spiral_directions(64);
  const GradientTable table(dirs, 1500.0);
  const TensorFitter fitter(table);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1e-3, 2.0e-3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Matrix3d rot = Eigen::Quaterniond::UnitRandom().toRotationMatrix();
    const Eigen::Vector3d ev(u(rng), u(rng), u(rng));
    const Eigen::Matrix3d d = rot * ev.asDiagonal() * rot.transpose();
    std::vector<double> att(64);
    for (std::size_t g = 0; g < 64; ++g) att[g] = std::exp(-1500.0 * dirs[g].dot(d * dirs[g]));
    const auto fit = fitter.fit(att);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> oracle(d);
    const Eigen::Vector3d expected = oracle.eigenvalues().reverse();
    CHECK((fit.eigenvalues - expected).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(fit.eigenvalues[0] >= fit.eigenvalues[1]);
    CHECK(fit.eigenvalues[1] >= fit.eigenvalues[2]);
  }
}

TEST_CASE("tensor fitter needs six independent directions") {
  std::vector<Eigen::Vector3d> planar;
  for (int i = 0; i < 8; ++i) {
    const double a = i * std::numbers::pi / 8;
    planar.emplace_back(std::cos(a), std::sin(a), 0.0);
  }
  CHECK_THROWS_AS(TensorFitter(GradientTable(planar, 1000.0)), ValidationError);
}

TEST_CASE("noiseless single-fiber voxels recover the generator eigenvalues") {
  PhantomSpec spec;
  spec.geometry = default_fibercup_geometry();
  const auto phantom = generate_phantom(spec);
  const auto eig = fit_tensor_eigenvalues(phantom.dwi);
  std::size_t checked = 0;
  for (std::size_t y = 0; y < spec.dims.y; ++y) {
    for (std::size_t x = 0; x < spec.dims.x; ++x) {
      const auto comp = describe_voxel(spec, x, y);
      if (comp.compartments.size() != 1) continue;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(comp.compartments[0].tensor);
      const Eigen::Vector3d expected = es.eigenvalues().reverse();
      const auto v = phantom.dwi.dims().index(x, y, 0);
      for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(eig.at(v, static_cast<std::size_t>(k)) - expected[k]) < 1e-9);
      }
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("power spectrum") {
  std::vector<double> c(15, 0.0);
  c[0] = 2.0;
  CHECK(sh_power_spectrum(c) == std::vector<double>{4.0, 0.0, 0.0});
  CHECK(sh_power_spectrum(std::vector<double>(45, 0.0)) == std::vector<double>(5, 0.0));
  std::vector<double> d(15, 1.0);
  CHECK(sh_power_spectrum(d) == std::vector<double>{1.0, 5.0, 9.0});
  CHECK_THROWS_AS(sh_power_spectrum(std::vector<double>(14, 0.0)), ValidationError);
}

TEST_CASE("power spectrum is invariant to rotating the sampling directions") {
  const auto dirs = spiral_directions(64);
  const ShBasis basis(dirs, 8, 0.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::VectorXd c = random_coeffs(45, 100 + seed);
    std::srand(static_cast<unsigned>(seed));
    const Eigen::Matrix3d rot = Eigen::Quaterniond::UnitRandom().toRotationMatrix();
    std::vector<double> plain(64);
    std::vector<double> rotated(64);
    for (std::size_t g = 0; g < 64; ++g) {
      plain[g] = eval_sh(c, dirs[g], 8);
      rotated[g] = eval_sh(c, rot * dirs[g], 8);
    }
    const Eigen::VectorXd c0 = basis.fit(plain);
    const auto p0 = sh_power_spectrum(std::vector<double>(c0.begin(), c0.end()));
    const Eigen::VectorXd cr = basis.fit(rotated);
    const auto p1 = sh_power_spectrum(std::vector<double>(cr.begin(), cr.end()));
    for (std::size_t l = 0; l < p0.size(); ++l) CHECK(std::abs(p0[l] - p1[l]) < 1e-6);
  }
}

TEST_CASE("Funk-Radon scaling") {
  CHECK(legendre_at_zero(0) == 1.0);
  CHECK(legendre_at_zero(1) == 0.0);
  CHECK(legendre_at_zero(2) == doctest::Approx(-0.5));
  for (int l = 0; l <= 16; ++l) {
    CHECK(legendre_at_zero(l) == doctest::Approx(std::legendre(static_cast<unsigned>(l), 0.0)).epsilon(1e-14));
  }
  CHECK(legendre_at_zero(8) == doctest::Approx(35.0 / 128.0).epsilon(1e-15));

  std::vector<double> v(45, 0.0);
  v[0] = 1.0;
  v[sh_index(2, 1)] = 3.0;
  v[sh_index(8, -5)] = 2.0;
  const auto odf = sh_to_odf(FeatureVolume(Dims{1, 1, 1}, FeatureKind::kSh8, v));
  CHECK(odf.kind() == FeatureKind::kOdf8);
  CHECK(odf.at(0, 0) == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(odf.at(0, sh_index(2, 1)) == doctest::Approx(-std::numbers::pi * 3.0));
  CHECK(odf.at(0, sh_index(8, -5)) == doctest::Approx(2.0 * std::numbers::pi * 35.0 / 128.0 * 2.0));
  CHECK(odf.at(0, 3) == 0.0);
}

TEST_CASE("compute_features dispatches every kind") {
  PhantomSpec spec;
  spec.dims = {64, 64, 1};
  spec.geometry = default_fibercup_geometry();
  const auto phantom = generate_phantom(spec);
  for (auto kind : {FeatureKind::kSh4, FeatureKind::kSh8, FeatureKind::kEig, FeatureKind::kSh4Ri,
                    FeatureKind::kSh8Ri, FeatureKind::kOdf4, FeatureKind::kOdf8}) {
    const auto f = compute_features(phantom.dwi, kind);
    CHECK(f.kind() == kind);
    CHECK(f.n() == feature_dimension(kind));
    CHECK(f.dims() == phantom.dwi.dims());
  }
  const auto eig = fit_tensor_eigenvalues(phantom.dwi);
  CHECK_THROWS_AS(rotation_invariant_features(eig), ValidationError);
  CHECK_THROWS_AS(sh_to_odf(eig), ValidationError);
}
