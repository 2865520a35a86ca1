#include "hardi/volume.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "hardi/errors.hpp"

namespace hardi {

namespace {

constexpr double kUnitNormTolerance = 1e-6;

void check_dims(const Dims& dims) {
  require(dims.x >= 1 && dims.y >= 1 && dims.z >= 1,
          "volume dimensions must all be >= 1, got " + to_string(dims));
}

void check_voxel_size(double voxel_size_mm) {
  require(std::isfinite(voxel_size_mm) && voxel_size_mm > 0.0,
          "voxel size must be a positive finite number");
}

}  // namespace

std::string to_string(const Dims& dims) {
  return std::to_string(dims.x) + "x" + std::to_string(dims.y) + "x" + std::to_string(dims.z);
}

std::string_view class_name(TissueClass c) {
  switch (c) {
    case TissueClass::kCsf: return "CSF";
    case TissueClass::kGm: return "GM";
    case TissueClass::kWmsf: return "WMSF";
    case TissueClass::kWmcf: return "WMCF";
  }
  return "?";
}

std::size_t feature_dimension(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kSh4: return 15;
    case FeatureKind::kSh8: return 45;
    case FeatureKind::kEig: return 3;
    case FeatureKind::kSh4Ri: return 3;
    case FeatureKind::kSh8Ri: return 5;
    case FeatureKind::kOdf4: return 15;
    case FeatureKind::kOdf8: return 45;
  }
  return 0;
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kSh4: return "SH4";
    case FeatureKind::kSh8: return "SH8";
    case FeatureKind::kEig: return "EIG";
    case FeatureKind::kSh4Ri: return "SH4RI";
    case FeatureKind::kSh8Ri: return "SH8RI";
    case FeatureKind::kOdf4: return "ODF4";
    case FeatureKind::kOdf8: return "ODF8";
  }
  return "?";
}

FeatureKind parse_feature_kind(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  for (auto kind : {FeatureKind::kSh4, FeatureKind::kSh8, FeatureKind::kEig, FeatureKind::kSh4Ri,
                    FeatureKind::kSh8Ri, FeatureKind::kOdf4, FeatureKind::kOdf8}) {
    if (upper == to_string(kind)) return kind;
  }
  throw ValidationError("unknown feature kind '" + std::string(text) + "'");
}

GradientTable::GradientTable(std::vector<Eigen::Vector3d> directions, double b_value)
    : directions_(std::move(directions)), b_value_(b_value) {
  require(std::isfinite(b_value_) && b_value_ > 0.0, "b-value must be > 0");
  require(directions_.size() >= 6, "gradient table needs at least 6 directions, got " +
                                       std::to_string(directions_.size()));
  for (std::size_t i = 0; i < directions_.size(); ++i) {
    const double norm = directions_[i].norm();
    if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
      throw ValidationError("gradient direction " + std::to_string(i) +
                            " is not unit length (norm " + std::to_string(norm) + ")");
    }
  }
}

DwiVolume::DwiVolume(Dims dims, double voxel_size_mm, std::vector<double> s0,
                     std::vector<double> signal, GradientTable gradients)
    : dims_(dims),
      voxel_size_mm_(voxel_size_mm),
      s0_(std::move(s0)),
      signal_(std::move(signal)),
      gradients_(std::move(gradients)) {
  check_dims(dims_);
  check_voxel_size(voxel_size_mm_);
  require(s0_.size() == dims_.voxels(), "S0 grid size does not match dimensions");
  require(signal_.size() == dims_.voxels() * gradients_.size(),
          "signal grid 4th extent must equal the number of gradient directions");
  for (double v : s0_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("all S0 values must be > 0");
  }
  for (double v : signal_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("all signal values must be >= 0");
  }
}

FeatureVolume::FeatureVolume(Dims dims, FeatureKind kind, std::vector<double> values,
                             double voxel_size_mm)
    : dims_(dims),
      kind_(kind),
      n_(feature_dimension(kind)),
      values_(std::move(values)),
      voxel_size_mm_(voxel_size_mm) {
  check_dims(dims_);
  check_voxel_size(voxel_size_mm_);
  require(values_.size() == dims_.voxels() * n_,
          "feature grid size does not match dims x n for kind " + std::string(to_string(kind)));
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("feature values must be finite");
  }
}

LabelVolume::LabelVolume(Dims dims, std::vector<std::uint8_t> labels, double voxel_size_mm)
    : dims_(dims), labels_(std::move(labels)), voxel_size_mm_(voxel_size_mm) {
  check_dims(dims_);
  check_voxel_size(voxel_size_mm_);
  require(labels_.size() == dims_.voxels(), "label grid size does not match dimensions");
  for (auto code : labels_) {
    if (code >= kNumClasses) {
      throw ValidationError("label code " + std::to_string(code) + " is not in {0,1,2,3}");
    }
  }
}

std::array<std::size_t, kNumClasses> LabelVolume::histogram() const {
  std::array<std::size_t, kNumClasses> counts{};
  for (auto code : labels_) ++counts[code];
  return counts;
}

}  // namespace hardi
