#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "hardi/errors.hpp"
#include "hardi/spatial_filter.hpp"
#include "test_util.hpp"

using namespace hardi;

namespace {

KernelBank random_bank(std::size_t n, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> genes(n * w * w);
  for (auto& g : genes) g = u(rng);
  return KernelBank::from_flat(genes, n, w);
}

double max_abs_diff(const FeatureVolume& a, const FeatureVolume& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("kernel bank invariants") {
  CHECK_THROWS_AS(KernelBank(4, {std::vector<double>(16, 0.0)}), ValidationError);
  CHECK_THROWS_AS(KernelBank(3, {std::vector<double>(8, 0.0)}), ValidationError);
  CHECK_THROWS_AS(KernelBank(3, {std::vector<double>(9, 2.5)}), ValidationError);
  CHECK_THROWS_AS(KernelBank(3, {}), ValidationError);
  CHECK_NOTHROW(KernelBank(3, {std::vector<double>(9, -2.0)}));
}

TEST_CASE("gaussian bank") {
  for (std::size_t w : {5, 7, 9}) {
    const auto bank = gaussian_bank(3, w);
    for (std::size_t i = 0; i < bank.n(); ++i) {
      const auto k = bank.kernel(i);
      double sum = 0.0;
      for (double v : k) sum += v;
      CHECK(std::abs(sum - 1.0) < 1e-12);
      const double center = bank.weight(i, w / 2, w / 2);
      CHECK(center == *std::max_element(k.begin(), k.end()));
      for (double v : k) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
  const auto bank = gaussian_bank(1, 5);
  const double sigma = 1.25;
  CHECK(bank.weight(0, 0, 0) / bank.weight(0, 2, 2) ==
        doctest::Approx(std::exp(-8.0 / (2.0 * sigma * sigma))).epsilon(1e-12));
}

TEST_CASE("delta bank is the identity") {
  const auto features = test::random_features(Dims{9, 7, 2}, FeatureKind::kSh4, 11);
  for (std::size_t w : {3, 5, 7, 9}) {
    for (auto padding : {Padding::kZero, Padding::kReplicate}) {
      const auto out = convolve_features(features, delta_bank(15, w), padding);
      CHECK(std::equal(out.data().begin(), out.data().end(), features.data().begin()));
    }
  }
}

TEST_CASE("all-ones kernel sums the 5x5 neighborhood") {
  const double c = 0.75;
  const FeatureVolume constant(Dims{9, 9, 1}, FeatureKind::kEig, std::vector<double>(81 * 3, c));
  const KernelBank ones(5, std::vector<std::vector<double>>(3, std::vector<double>(25, 1.0)));
  const auto zero = convolve_features(constant, ones, Padding::kZero);
  const auto rep = convolve_features(constant, ones, Padding::kReplicate);
  for (std::size_t y = 2; y < 7; ++y) {
    for (std::size_t x = 2; x < 7; ++x) {
      CHECK(zero.at(constant.dims().index(x, y, 0), 1) == doctest::Approx(25.0 * c));
    }
  }
  // Corner: 3x3 of the window lies inside.
  CHECK(zero.at(0, 0) == doctest::Approx(9.0 * c));
  CHECK(rep.at(0, 0) == doctest::Approx(25.0 * c));
}

TEST_CASE("orientation is cross-correlation") {
  // A single impulse at (2, 2); output at (x, y) reads k[r + 2 - y][r + 2 - x].
  std::vector<double> v(25 * 3, 0.0);
  v[Dims{5, 5, 1}.index(2, 2, 0) * 3] = 1.0;
  const FeatureVolume impulse(Dims{5, 5, 1}, FeatureKind::kEig, v);
  std::vector<double> k(9);
  for (std::size_t i = 0; i < 9; ++i) k[i] = 0.1 * static_cast<double>(i);
  const KernelBank bank(3, {k, k, k});
  const auto out = convolve_features(impulse, bank, Padding::kZero);
  // Output at (1, 1) sees the impulse at offset (+1, +1): row 2, col 2.
  CHECK(out.at(Dims{5, 5, 1}.index(1, 1, 0), 0) == doctest::Approx(0.8));
  // Output at (3, 2) sees it at offset (-1, 0): row 1, col 0.
  CHECK(out.at(Dims{5, 5, 1}.index(3, 2, 0), 0) == doctest::Approx(0.3));
}

TEST_CASE("convolution matches the brute-force oracle") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t w = std::array<std::size_t, 3>{5, 7, 9}[static_cast<std::size_t>(trial) % 3];
    const Dims dims{3 + rng() % 14, 3 + rng() % 14, 1 + rng() % 3};
    const auto features = test::random_features(dims, FeatureKind::kSh4, rng());
    const auto bank = random_bank(15, w, rng());
    for (auto padding : {Padding::kZero, Padding::kReplicate}) {
      const auto fast = convolve_features(features, bank, padding);
      const auto slow = oracle::naive_convolve(features, bank, padding);
      CHECK(max_abs_diff(fast, slow) < 1e-12);
    }
  }
}

TEST_CASE("slices are filtered independently") {
  const auto features = test::random_features(Dims{6, 6, 3}, FeatureKind::kEig, 4);
  const auto bank = random_bank(3, 5, 9);
  const auto out = convolve_features(features, bank);
  // Zeroing slice 1 must leave slices 0 and 2 unchanged.
  std::vector<double> v(features.data().begin(), features.data().end());
  std::fill(v.begin() + 36 * 3, v.begin() + 72 * 3, 0.0);
  const auto out2 = convolve_features(FeatureVolume(features.dims(), features.kind(), v), bank);
  for (std::size_t i = 0; i < 36 * 3; ++i) CHECK(out.data()[i] == out2.data()[i]);
  for (std::size_t i = 72 * 3; i < 108 * 3; ++i) CHECK(out.data()[i] == out2.data()[i]);
}

TEST_CASE("convolution rejects a bank of the wrong size") {
  const auto features = test::random_features(Dims{4, 4, 1}, FeatureKind::kEig, 1);
  CHECK_THROWS_AS(convolve_features(features, delta_bank(4, 3)), ValidationError);
}

TEST_CASE("bank JSON round trip") {
  test::TempDir dir;
  const auto bank = random_bank(15, 7, 21);
  save_bank(dir / "b.json", bank);
  CHECK(load_bank(dir / "b.json") == bank);
  const auto j = to_json(bank);
  CHECK(j.at("n") == 15);
  CHECK(j.at("w") == 7);
  CHECK(j.at("kernels").size() == 15);
  CHECK(j.at("kernels")[0].size() == 49);
  auto bad = j;
  bad["kernels"][0][0] = 3.0;
  CHECK_THROWS_AS(bank_from_json(bad), ValidationError);
  CHECK_THROWS(load_bank(dir / "missing.json"));
}

TEST_CASE("flatten orders samples x fastest within each slice") {
  const FeatureVolume f(Dims{2, 2, 1}, FeatureKind::kEig,
                        {0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3});
  const LabelVolume l(Dims{2, 2, 1}, {0, 1, 2, 3});
  const Dataset ds = flatten(f, l);
  REQUIRE(ds.size() == 4);
  CHECK(ds.provenance[0] == Provenance{0, 0, 0});
  CHECK(ds.provenance[1] == Provenance{0, 1, 0});
  CHECK(ds.provenance[2] == Provenance{0, 0, 1});
  CHECK(ds.provenance[3] == Provenance{0, 1, 1});
  CHECK(ds.labels == std::vector<int>{0, 1, 2, 3});
  CHECK(ds.sample(2)[1] == 2.0);
}

TEST_CASE("flatten preserves histogram and provenance") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const Dims dims{1 + rng() % 9, 1 + rng() % 9, 1 + rng() % 3};
    const auto f = test::random_features(dims, FeatureKind::kSh4Ri, rng());
    std::vector<std::uint8_t> codes(dims.voxels());
    for (auto& c : codes) c = static_cast<std::uint8_t>(rng() % 4);
    const LabelVolume l(dims, codes);
    const Dataset ds = flatten(f, l);
    CHECK(ds.histogram() == l.histogram());
    for (std::size_t k = 0; k < ds.size(); ++k) {
      const auto& p = ds.provenance[k];
      const auto v = dims.index(p.x, p.y, p.slice);
      CHECK(std::equal(ds.sample(k).begin(), ds.sample(k).end(), f.at(v).begin()));
      CHECK(ds.labels[k] == l.at(v));
    }
  }
  CHECK_THROWS_AS(flatten(test::random_features(Dims{2, 2, 1}, FeatureKind::kEig, 1),
                          LabelVolume(Dims{2, 1, 1}, {0, 1})),
                  ValidationError);
}

TEST_CASE("dataset subset") {
  const FeatureVolume f(Dims{3, 1, 1}, FeatureKind::kEig, {0, 0, 0, 1, 1, 1, 2, 2, 2});
  const Dataset ds = flatten(f, LabelVolume(Dims{3, 1, 1}, {0, 1, 2}));
  const std::vector<std::size_t> idx{2, 0};
  const Dataset sub = ds.subset(idx);
  CHECK(sub.labels == std::vector<int>{2, 0});
  CHECK(sub.sample(0)[0] == 2.0);
  CHECK(sub.provenance[1] == Provenance{0, 0, 0});
}
