#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "hardi/volume.hpp"

namespace hardi {

inline constexpr double kKernelWeightLimit = 2.0;

// One w x w kernel per feature dimension, row-major, weights in [-2, 2].
class KernelBank {
 public:
  KernelBank(std::size_t w, std::vector<std::vector<double>> kernels);

  std::size_t n() const { return kernels_.size(); }
  std::size_t w() const { return w_; }
  std::span<const double> kernel(std::size_t i) const { return kernels_[i]; }
  double weight(std::size_t i, std::size_t row, std::size_t col) const {
    return kernels_[i][row * w_ + col];
  }

  // Kernel i occupies [i*w*w, (i+1)*w*w) in row-major order.
  std::vector<double> flatten() const;
  static KernelBank from_flat(std::span<const double> genes, std::size_t n, std::size_t w);

  bool operator==(const KernelBank&) const = default;

 private:
  std::size_t w_;
  std::vector<std::vector<double>> kernels_;
};

// n identical Gaussians, sigma = w/4, normalized to sum 1.
KernelBank gaussian_bank(std::size_t n, std::size_t w);
// n kernels with a single 1 at the center (identity filter).
KernelBank delta_bank(std::size_t n, std::size_t w);

nlohmann::json to_json(const KernelBank& bank);
KernelBank bank_from_json(const nlohmann::json& j);
void save_bank(const std::filesystem::path& path, const KernelBank& bank);
KernelBank load_bank(const std::filesystem::path& path);

enum class Padding { kZero, kReplicate };

// Applies kernel i to feature i of every z-slice independently (2D only).
// Cross-correlation orientation: out(x, y) = sum k[r + dy][r + dx] * in(x + dx, y + dy)
// with r = w / 2. Samples outside the slice follow `padding`.
FeatureVolume convolve_features(const FeatureVolume& features, const KernelBank& bank,
                                Padding padding = Padding::kZero);

struct Provenance {
  std::size_t slice;
  std::size_t x;
  std::size_t y;
  bool operator==(const Provenance&) const = default;
};

// Flat labelled sample set; sample k's features are
// values[k*n, (k+1)*n).
struct Dataset {
  std::size_t n = 0;
  std::vector<double> values;
  std::vector<int> labels;
  std::vector<Provenance> provenance;

  std::size_t size() const { return labels.size(); }
  std::span<const double> sample(std::size_t k) const { return {values.data() + k * n, n}; }
  std::array<std::size_t, kNumClasses> histogram() const;

  // Sub-dataset with the given sample indices, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;
  void validate() const;
};

// One sample per voxel in (z, y, x) order: x varies fastest.
Dataset flatten(const FeatureVolume& features, const LabelVolume& labels);

}  // namespace hardi
