#include "hardi/spatial_filter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "hardi/errors.hpp"

namespace hardi {

KernelBank::KernelBank(std::size_t w, std::vector<std::vector<double>> kernels)
    : w_(w), kernels_(std::move(kernels)) {
  require(w_ % 2 == 1, "kernel width must be odd, got " + std::to_string(w_));
  require(!kernels_.empty(), "kernel bank needs at least one kernel");
  for (std::size_t i = 0; i < kernels_.size(); ++i) {
    require(kernels_[i].size() == w_ * w_,
            "kernel " + std::to_string(i) + " does not hold w*w weights");
    for (double v : kernels_[i]) {
      if (!(v >= -kKernelWeightLimit && v <= kKernelWeightLimit)) {
        throw ValidationError("kernel " + std::to_string(i) + " has a weight outside [-2, 2]");
      }
    }
  }
}

std::vector<double> KernelBank::flatten() const {
  std::vector<double> genes;
  genes.reserve(n() * w_ * w_);
  for (const auto& k : kernels_) genes.insert(genes.end(), k.begin(), k.end());
  return genes;
}

KernelBank KernelBank::from_flat(std::span<const double> genes, std::size_t n, std::size_t w) {
  require(genes.size() == n * w * w, "genome length " + std::to_string(genes.size()) +
                                         " does not equal w*w*n = " + std::to_string(n * w * w));
  std::vector<std::vector<double>> kernels(n);
  for (std::size_t i = 0; i < n; ++i) {
    kernels[i].assign(genes.begin() + static_cast<std::ptrdiff_t>(i * w * w),
                      genes.begin() + static_cast<std::ptrdiff_t>((i + 1) * w * w));
  }
  return KernelBank(w, std::move(kernels));
}

KernelBank gaussian_bank(std::size_t n, std::size_t w) {
  require(w % 2 == 1, "kernel width must be odd");
  const double sigma = static_cast<double>(w) / 4.0;
  const auto r = static_cast<long>(w / 2);
  std::vector<double> k(w * w);
  double sum = 0.0;
  for (long dy = -r; dy <= r; ++dy) {
    for (long dx = -r; dx <= r; ++dx) {
      const double v = std::exp(-static_cast<double>(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      k[static_cast<std::size_t>((dy + r) * static_cast<long>(w) + dx + r)] = v;
      sum += v;
    }
  }
  for (double& v : k) v /= sum;
  return KernelBank(w, std::vector<std::vector<double>>(n, k));
}

KernelBank delta_bank(std::size_t n, std::size_t w) {
  require(w % 2 == 1, "kernel width must be odd");
  std::vector<double> k(w * w, 0.0);
  k[(w / 2) * w + w / 2] = 1.0;
  return KernelBank(w, std::vector<std::vector<double>>(n, k));
}

nlohmann::json to_json(const KernelBank& bank) {
  nlohmann::json kernels = nlohmann::json::array();
  for (std::size_t i = 0; i < bank.n(); ++i) {
    const auto k = bank.kernel(i);
    kernels.push_back(std::vector<double>(k.begin(), k.end()));
  }
  return {{"n", bank.n()}, {"w", bank.w()}, {"kernels", kernels}};
}

KernelBank bank_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    const auto w = j.at("w").get<std::size_t>();
    auto kernels = j.at("kernels").get<std::vector<std::vector<double>>>();
    if (kernels.size() != n) throw FormatError("kernel bank declares n=" + std::to_string(n) +
                                               " but lists " + std::to_string(kernels.size()));
    return KernelBank(w, std::move(kernels));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed kernel bank JSON: ") + e.what());
  }
}

void save_bank(const std::filesystem::path& path, const KernelBank& bank) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json(bank).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

KernelBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel bank " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed kernel bank " + path.string() + ": " + e.what());
  }
  return bank_from_json(j);
}

FeatureVolume convolve_features(const FeatureVolume& features, const KernelBank& bank,
                                Padding padding) {
  const std::size_t n = features.n();
  require(bank.n() == n, "kernel bank has " + std::to_string(bank.n()) +
                             " kernels but the feature space has " + std::to_string(n));
  const Dims dims = features.dims();
  const auto X = static_cast<long>(dims.x);
  const auto Y = static_cast<long>(dims.y);
  const auto w = static_cast<long>(bank.w());
  const long r = w / 2;
  const auto in = features.data();
  std::vector<double> out(in.size(), 0.0);

  // Out-of-slice sample index under the padding rule, or -1 for a zero.
  auto source = [&](long x, long y) -> long {
    if (x >= 0 && x < X && y >= 0 && y < Y) return x + X * y;
    if (padding == Padding::kZero) return -1;
    return std::clamp(x, 0L, X - 1) + X * std::clamp(y, 0L, Y - 1);
  };

  for (std::size_t z = 0; z < dims.z; ++z) {
    const std::size_t slice_base = z * dims.slice_voxels();
    for (long y = 0; y < Y; ++y) {
      for (long x = 0; x < X; ++x) {
        double* dst = out.data() + (slice_base + static_cast<std::size_t>(x + X * y)) * n;
        for (long ky = 0; ky < w; ++ky) {
          for (long kx = 0; kx < w; ++kx) {
            const long src = source(x + kx - r, y + ky - r);
            if (src < 0) continue;
            const double* s = in.data() + (slice_base + static_cast<std::size_t>(src)) * n;
            const std::size_t tap = static_cast<std::size_t>(ky * w + kx);
            for (std::size_t i = 0; i < n; ++i) dst[i] += bank.kernel(i)[tap] * s[i];
          }
        }
      }
    }
  }
  return FeatureVolume(dims, features.kind(), std::move(out), features.voxel_size_mm());
}

std::array<std::size_t, kNumClasses> Dataset::histogram() const {
  std::array<std::size_t, kNumClasses> counts{};
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.n = n;
  out.values.reserve(indices.size() * n);
  out.labels.reserve(indices.size());
  out.provenance.reserve(indices.size());
  for (auto k : indices) {
    const auto s = sample(k);
    out.values.insert(out.values.end(), s.begin(), s.end());
    out.labels.push_back(labels[k]);
    if (!provenance.empty()) out.provenance.push_back(provenance[k]);
  }
  return out;
}

void Dataset::validate() const {
  require(n > 0, "dataset feature dimension must be > 0");
  require(values.size() == labels.size() * n, "dataset values do not match sample count x n");
  require(provenance.empty() || provenance.size() == labels.size(),
          "dataset provenance does not match sample count");
  for (int l : labels) require(l >= 0 && l < kNumClasses, "dataset label outside {0..3}");
}

Dataset flatten(const FeatureVolume& features, const LabelVolume& labels) {
  require(features.dims() == labels.dims(), "feature volume " + to_string(features.dims()) +
                                                " and label volume " + to_string(labels.dims()) +
                                                " differ in size");
  const Dims dims = features.dims();
  Dataset out;
  out.n = features.n();
  out.values.assign(features.data().begin(), features.data().end());
  out.labels.reserve(dims.voxels());
  out.provenance.reserve(dims.voxels());
  for (std::size_t z = 0; z < dims.z; ++z) {
    for (std::size_t y = 0; y < dims.y; ++y) {
      for (std::size_t x = 0; x < dims.x; ++x) {
        out.labels.push_back(labels.at(dims.index(x, y, z)));
        out.provenance.push_back({z, x, y});
      }
    }
  }
  return out;
}

}  // namespace hardi
