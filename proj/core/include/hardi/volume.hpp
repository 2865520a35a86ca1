#pragma once

#include <cstddef>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace hardi {

// Voxel extents of a 3D grid. Linear voxel index is x-fastest, then y, then z.
struct Dims {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;

  std::size_t voxels() const { return x * y * z; }
  std::size_t slice_voxels() const { return x * y; }
  std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return ix + x * (iy + y * iz);
  }
  bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& dims);

enum class TissueClass : std::uint8_t { kCsf = 0, kGm = 1, kWmsf = 2, kWmcf = 3 };
inline constexpr int kNumClasses = 4;

std::string_view class_name(TissueClass c);
inline bool is_white_matter(int code) { return code == 2 || code == 3; }

enum class FeatureKind { kSh4, kSh8, kEig, kSh4Ri, kSh8Ri, kOdf4, kOdf8 };

// Number of components a feature volume of the given kind carries.
std::size_t feature_dimension(FeatureKind kind);
std::string_view to_string(FeatureKind kind);
// Accepts "SH4", "sh4", "odf8", ... Throws ValidationError otherwise.
FeatureKind parse_feature_kind(std::string_view text);

// Unit gradient directions and their shared b-value (s/mm^2).
class GradientTable {
 public:
  GradientTable(std::vector<Eigen::Vector3d> directions, double b_value);

  const std::vector<Eigen::Vector3d>& directions() const { return directions_; }
  const Eigen::Vector3d& operator[](std::size_t i) const { return directions_[i]; }
  std::size_t size() const { return directions_.size(); }
  double b_value() const { return b_value_; }

 private:
  std::vector<Eigen::Vector3d> directions_;
  double b_value_;
};

// Diffusion-weighted acquisition: baseline S0 per voxel and one attenuated
// sample per gradient direction. In memory the directional signal is stored
// voxel-major (direction index fastest) so per-voxel fits read contiguously.
class DwiVolume {
 public:
  DwiVolume(Dims dims, double voxel_size_mm, std::vector<double> s0,
            std::vector<double> signal, GradientTable gradients);

  const Dims& dims() const { return dims_; }
  double voxel_size_mm() const { return voxel_size_mm_; }
  const GradientTable& gradients() const { return gradients_; }
  std::size_t n_directions() const { return gradients_.size(); }

  double s0(std::size_t voxel) const { return s0_[voxel]; }
  std::span<const double> signal(std::size_t voxel) const {
    return {signal_.data() + voxel * n_directions(), n_directions()};
  }
  std::span<const double> s0_data() const { return s0_; }
  std::span<const double> signal_data() const { return signal_; }

 private:
  Dims dims_;
  double voxel_size_mm_;
  std::vector<double> s0_;
  std::vector<double> signal_;
  GradientTable gradients_;
};

// Per-voxel feature vectors, component index fastest in memory.
class FeatureVolume {
 public:
  FeatureVolume(Dims dims, FeatureKind kind, std::vector<double> values,
                double voxel_size_mm = 1.0);

  const Dims& dims() const { return dims_; }
  FeatureKind kind() const { return kind_; }
  std::size_t n() const { return n_; }
  double voxel_size_mm() const { return voxel_size_mm_; }

  std::span<const double> at(std::size_t voxel) const {
    return {values_.data() + voxel * n_, n_};
  }
  double at(std::size_t voxel, std::size_t component) const {
    return values_[voxel * n_ + component];
  }
  std::span<const double> data() const { return values_; }

 private:
  Dims dims_;
  FeatureKind kind_;
  std::size_t n_;
  std::vector<double> values_;
  double voxel_size_mm_;
};

class LabelVolume {
 public:
  LabelVolume(Dims dims, std::vector<std::uint8_t> labels, double voxel_size_mm = 1.0);

  const Dims& dims() const { return dims_; }
  double voxel_size_mm() const { return voxel_size_mm_; }
  int at(std::size_t voxel) const { return labels_[voxel]; }
  std::span<const std::uint8_t> data() const { return labels_; }
  std::array<std::size_t, kNumClasses> histogram() const;

 private:
  Dims dims_;
  std::vector<std::uint8_t> labels_;
  double voxel_size_mm_;
};

}  // namespace hardi
