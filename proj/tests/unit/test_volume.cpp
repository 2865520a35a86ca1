#include <doctest.h>

#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "hardi/errors.hpp"
#include "hardi/gradients.hpp"
#include "hardi/volume.hpp"
#include "hardi/volume_io.hpp"
#include "test_util.hpp"

using namespace hardi;
using hardi::test::TempDir;

namespace {

// Values that survive the f32 round trip exactly.
double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

DwiVolume random_dwi(Dims dims, std::size_t ndir, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<double> s0(dims.voxels());
  std::vector<double> sig(dims.voxels() * ndir);
  for (auto& v : s0) v = f32(u(rng) + 1.0);
  for (auto& v : sig) v = f32(u(rng));
  return DwiVolume(dims, 2.5, std::move(s0), std::move(sig),
                   GradientTable(spiral_directions(ndir), 1000.0));
}

}  // namespace

TEST_CASE("dims index is x fastest") {
  Dims d{3, 4, 5};
  CHECK(d.voxels() == 60);
  CHECK(d.index(1, 0, 0) == 1);
  CHECK(d.index(0, 1, 0) == 3);
  CHECK(d.index(0, 0, 1) == 12);
}

TEST_CASE("feature kinds") {
  CHECK(feature_dimension(FeatureKind::kSh4) == 15);
  CHECK(feature_dimension(FeatureKind::kSh8) == 45);
  CHECK(feature_dimension(FeatureKind::kEig) == 3);
  CHECK(feature_dimension(FeatureKind::kSh4Ri) == 3);
  CHECK(feature_dimension(FeatureKind::kSh8Ri) == 5);
  CHECK(feature_dimension(FeatureKind::kOdf4) == 15);
  CHECK(feature_dimension(FeatureKind::kOdf8) == 45);
  CHECK(parse_feature_kind("sh8ri") == FeatureKind::kSh8Ri);
  CHECK(parse_feature_kind("ODF4") == FeatureKind::kOdf4);
  CHECK_THROWS_AS(parse_feature_kind("sh6"), ValidationError);
}

TEST_CASE("gradient table invariants") {
  CHECK_THROWS_AS(GradientTable(spiral_directions(5), 1000.0), ValidationError);
  CHECK_THROWS_AS(GradientTable(spiral_directions(6), 0.0), ValidationError);
  auto dirs = spiral_directions(6);
  dirs[2] *= 1.01;
  CHECK_THROWS_AS(GradientTable(dirs, 1000.0), ValidationError);
  CHECK_NOTHROW(GradientTable(spiral_directions(6), 1000.0));
}

TEST_CASE("spiral directions are unit, upper hemisphere and distinct") {
  const auto dirs = spiral_directions(64);
  REQUIRE(dirs.size() == 64);
  double min_sep = 10.0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    CHECK(dirs[i].norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dirs[i].z() >= 0.0);
    for (std::size_t j = 0; j < i; ++j) {
      min_sep = std::min(min_sep, std::acos(std::min(1.0, std::abs(dirs[i].dot(dirs[j])))));
    }
  }
  CHECK(min_sep > 0.1);
  CHECK(spiral_directions(64) == dirs);
}

TEST_CASE("volume constructors reject inconsistent payloads") {
  CHECK_THROWS_AS(LabelVolume(Dims{2, 2, 1}, {0, 1, 2}), ValidationError);
  CHECK_THROWS_AS(LabelVolume(Dims{1, 1, 1}, {4}), ValidationError);
  CHECK_THROWS_AS(FeatureVolume(Dims{1, 1, 1}, FeatureKind::kEig, {1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(FeatureVolume(Dims{1, 1, 1}, FeatureKind::kEig, {1.0, 2.0, std::nan("")}),
                  ValidationError);
  CHECK_THROWS_AS(DwiVolume(Dims{1, 1, 1}, 1.0, {0.0}, std::vector<double>(6, 1.0),
                            GradientTable(spiral_directions(6), 1000.0)),
                  ValidationError);
}

TEST_CASE("label blob of a single voxel is one byte") {
  TempDir dir;
  write_volume(dir / "l", LabelVolume(Dims{1, 1, 1}, {2}));
  CHECK(test::file_size(dir / "l.raw") == 1);
  std::ifstream in(dir / "l.raw", std::ios::binary);
  CHECK(in.get() == 2);
}

TEST_CASE("feature blob size is voxels x n x 4 bytes") {
  TempDir dir;
  write_volume(dir / "f", test::random_features(Dims{2, 2, 1}, FeatureKind::kEig, 1));
  CHECK(test::file_size(dir / "f.raw") == 48);
}

TEST_CASE("write then read is bit exact") {
  TempDir dir;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dims dims{2 + seed, 3, 1 + seed % 2};
    auto raw = test::random_features(dims, FeatureKind::kSh4, seed);
    std::vector<double> values(raw.data().begin(), raw.data().end());
    for (auto& v : values) v = f32(v);
    const FeatureVolume features(dims, FeatureKind::kSh4, values, 3.0);
    write_volume(dir / "f", features);
    const auto back = read_features(dir / "f");
    CHECK(back.dims() == dims);
    CHECK(back.kind() == FeatureKind::kSh4);
    CHECK(back.voxel_size_mm() == 3.0);
    CHECK(std::equal(back.data().begin(), back.data().end(), features.data().begin()));

    const auto dwi = random_dwi(dims, 7, seed);
    write_volume(dir / "d", dwi);
    const auto dback = read_dwi(dir / "d.json");
    CHECK(std::equal(dback.s0_data().begin(), dback.s0_data().end(), dwi.s0_data().begin()));
    CHECK(std::equal(dback.signal_data().begin(), dback.signal_data().end(),
                     dwi.signal_data().begin()));
    CHECK(dback.gradients().directions() == dwi.gradients().directions());
    CHECK(dback.gradients().b_value() == 1000.0);

    std::vector<std::uint8_t> labels(dims.voxels());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::uint8_t>(i % 4);
    write_volume(dir / "l", LabelVolume(dims, labels));
    const auto lback = read_labels(dir / "l.raw");
    CHECK(std::equal(lback.data().begin(), lback.data().end(), labels.begin()));
  }
}

TEST_CASE("dwi blob holds S0 first, then one grid per direction") {
  TempDir dir;
  const Dims dims{2, 1, 1};
  std::vector<double> sig = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  write_volume(dir / "d", DwiVolume(dims, 1.0, {50, 60}, sig,
                                    GradientTable(spiral_directions(6), 1000.0)));
  std::ifstream in(dir / "d.raw", std::ios::binary);
  std::vector<float> blob(14);
  in.read(reinterpret_cast<char*>(blob.data()), 56);
  CHECK(blob[0] == 50.0f);
  CHECK(blob[1] == 60.0f);
  // Direction 0 of voxels 0 and 1, then direction 1.
  CHECK(blob[2] == 1.0f);
  CHECK(blob[3] == 7.0f);
  CHECK(blob[4] == 2.0f);
  CHECK(blob[5] == 8.0f);
}

TEST_CASE("signal must be finite and non-negative") {
  std::vector<double> sig(6, 1.0);
  sig[3] = std::nan("");
  CHECK_THROWS_AS(DwiVolume(Dims{1, 1, 1}, 1.0, {1.0}, sig, GradientTable(spiral_directions(6), 1000.0)),
                  ValidationError);
  sig[3] = -1.0;
  CHECK_THROWS_AS(DwiVolume(Dims{1, 1, 1}, 1.0, {1.0}, sig, GradientTable(spiral_directions(6), 1000.0)),
                  ValidationError);
}

TEST_CASE("read error classes") {
  TempDir dir;
  CHECK_THROWS_AS(read_volume(dir / "missing"), IoError);

  write_volume(dir / "f", test::random_features(Dims{2, 2, 1}, FeatureKind::kEig, 3));
  std::filesystem::resize_file(dir / "f.raw", 47);
  CHECK_THROWS_AS(read_volume(dir / "f"), FormatError);

  write_volume(dir / "g", test::random_features(Dims{2, 2, 1}, FeatureKind::kEig, 3));
  {
    std::ifstream in(dir / "g.json");
    auto header = nlohmann::json::parse(in);
    header["feature_kind"] = "SH6";
    std::ofstream(dir / "g.json") << header.dump();
  }
  CHECK_THROWS_AS(read_volume(dir / "g"), FormatError);

  write_volume(dir / "d", random_dwi(Dims{1, 1, 1}, 6, 4));
  {
    std::ifstream in(dir / "d.json");
    auto header = nlohmann::json::parse(in);
    header["gradients"][0] = {1.0, 1.0, 0.0};
    std::ofstream(dir / "d.json") << header.dump();
  }
  CHECK_THROWS_AS(read_volume(dir / "d"), ValidationError);

  write_volume(dir / "l", LabelVolume(Dims{1, 1, 1}, {1}));
  CHECK_THROWS_AS(read_features(dir / "l"), FormatError);
}

TEST_CASE("gradient text loader") {
  TempDir dir;
  std::ofstream(dir / "g.txt") << "# header\n1 0 0\n0 2 0\n\n0 0 1\n1 1 0\n1 0 1\n0 1 1\n";
  const auto table = load_gradient_text(dir / "g.txt", 1500.0);
  CHECK(table.size() == 6);
  CHECK(table[1].y() == doctest::Approx(1.0));
  CHECK(table[3].norm() == doctest::Approx(1.0));
  std::ofstream(dir / "z.txt") << "0 0 0\n1 0 0\n0 1 0\n0 0 1\n1 1 0\n1 0 1\n0 1 1\n";
  CHECK_THROWS_AS(load_gradient_text(dir / "z.txt", 1500.0), ValidationError);
}
