#include "hardi/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "hardi/errors.hpp"
#include "hardi/gradients.hpp"
#include "hardi/random.hpp"

namespace hardi {

namespace {

struct Closest {
  double distance;
  Eigen::Vector2d tangent;
};

Closest closest_on_strand(const FiberStrand& strand, const Eigen::Vector2d& p) {
  Closest best{std::numeric_limits<double>::infinity(), Eigen::Vector2d::UnitX()};
  for (std::size_t s = 0; s + 1 < strand.centerline.size(); ++s) {
    const Eigen::Vector2d a = strand.centerline[s];
    const Eigen::Vector2d b = strand.centerline[s + 1];
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) continue;
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    const double d = (a + t * ab - p).norm();
    if (d < best.distance) best = {d, ab.normalized()};
  }
  return best;
}

Eigen::Vector2d mask_center(const PhantomSpec& spec) {
  return {(static_cast<double>(spec.dims.x) - 1.0) / 2.0,
          (static_cast<double>(spec.dims.y) - 1.0) / 2.0};
}

double mask_radius(const PhantomSpec& spec) {
  if (spec.mask_radius > 0.0) return spec.mask_radius;
  return static_cast<double>(std::min(spec.dims.x, spec.dims.y)) / 2.0 - 2.0;
}

Eigen::Matrix3d fiber_tensor(const Eigen::Vector2d& tangent, const Eigen::Vector3d& eigenvalues) {
  const Eigen::Vector3d e1(tangent.x(), tangent.y(), 0.0);
  const Eigen::Vector3d e2(-tangent.y(), tangent.x(), 0.0);
  const Eigen::Vector3d e3 = Eigen::Vector3d::UnitZ();
  return eigenvalues[0] * e1 * e1.transpose() + eigenvalues[1] * e2 * e2.transpose() +
         eigenvalues[2] * e3 * e3.transpose();
}

}  // namespace

double line_angle_deg(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const double c = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

std::vector<FiberStrand> default_fibercup_geometry() {
  std::vector<FiberStrand> strands;
  // Straight horizontal bundle, crossed at 90 deg by a short vertical one.
  strands.push_back({{{14.0, 14.0}, {50.0, 14.0}}, 2.0});
  strands.push_back({{{22.0, 8.0}, {22.0, 24.0}}, 2.0});

  // U-shaped bundle: two short arms joined by a half circle.
  FiberStrand u;
  u.half_width = 1.5;
  const Eigen::Vector2d arc_center(40.0, 22.0);
  const double arc_radius = 6.0;
  u.centerline.emplace_back(arc_center.x() - arc_radius, 18.0);
  constexpr int kArcSegments = 12;
  for (int i = 0; i <= kArcSegments; ++i) {
    const double theta = std::numbers::pi * (1.0 - static_cast<double>(i) / kArcSegments);
    u.centerline.emplace_back(arc_center.x() + arc_radius * std::cos(theta),
                              arc_center.y() + arc_radius * std::sin(theta));
  }
  u.centerline.emplace_back(arc_center.x() + arc_radius, 18.0);
  strands.push_back(std::move(u));

  // Two diagonal bundles crossing near (31, 44).
  strands.push_back({{{16.0, 34.0}, {46.0, 54.0}}, 2.0});
  strands.push_back({{{17.0, 53.0}, {46.0, 34.0}}, 2.0});
  return strands;
}

std::vector<FiberStrand> scale_geometry(const std::vector<FiberStrand>& strands, double factor) {
  require(factor > 0.0, "geometry scale factor must be > 0");
  auto scaled = strands;
  for (auto& s : scaled) {
    for (auto& p : s.centerline) p *= factor;
    s.half_width *= factor;
  }
  return scaled;
}

void validate(const PhantomSpec& spec) {
  require(spec.dims.x >= 1 && spec.dims.y >= 1 && spec.dims.z >= 1, "phantom dims must be >= 1");
  require(spec.n_directions >= 6, "phantom needs at least 6 gradient directions");
  require(spec.snr >= 0.0 && std::isfinite(spec.snr), "snr must be >= 0");
  require(spec.b_value > 0.0, "b-value must be > 0");
  require(spec.tissue.s0 > 0.0, "S0 must be > 0");
  for (double f : {spec.tissue.fiber_fraction_center, spec.tissue.fiber_fraction_edge}) {
    require(f > 0.0 && f <= 1.0, "fiber fractions must lie in (0, 1]");
  }
  const Eigen::Vector2d center = mask_center(spec);
  const double radius = mask_radius(spec);
  require(radius > 1.0, "phantom mask radius must exceed the 1-voxel border ring");
  for (std::size_t i = 0; i < spec.geometry.size(); ++i) {
    const auto& strand = spec.geometry[i];
    const std::string tag = "strand " + std::to_string(i);
    require(strand.centerline.size() >= 2, tag + ": centerline needs at least 2 points");
    require(strand.half_width > 0.0, tag + ": half_width must be > 0");
    for (const auto& p : strand.centerline) {
      const bool in_grid = p.x() >= 0.0 && p.y() >= 0.0 &&
                           p.x() <= static_cast<double>(spec.dims.x) - 1.0 &&
                           p.y() <= static_cast<double>(spec.dims.y) - 1.0;
      require(in_grid, tag + ": centerline leaves the grid");
      require((p - center).norm() + strand.half_width <= radius - 1.0,
              tag + ": strand reaches the phantom border ring");
    }
  }
}

VoxelComposition describe_voxel(const PhantomSpec& spec, std::size_t x, std::size_t y) {
  const Eigen::Vector2d p(static_cast<double>(x), static_cast<double>(y));
  const auto& tissue = spec.tissue;

  std::vector<Eigen::Vector2d> tangents;
  std::vector<double> density;
  for (const auto& strand : spec.geometry) {
    const auto c = closest_on_strand(strand, p);
    if (c.distance <= strand.half_width) {
      tangents.push_back(c.tangent);
      const double t = c.distance / strand.half_width;
      density.push_back(tissue.fiber_fraction_center +
                        t * (tissue.fiber_fraction_edge - tissue.fiber_fraction_center));
    }
  }

  VoxelComposition out{TissueClass::kCsf, {}};
  if (tangents.empty()) {
    const double r = (p - mask_center(spec)).norm();
    const double radius = mask_radius(spec);
    const bool ring = r <= radius && r > radius - 1.0;
    out.label = ring ? TissueClass::kGm : TissueClass::kCsf;
    const double d = ring ? tissue.gm_diffusivity : tissue.csf_diffusivity;
    out.compartments.push_back({d * Eigen::Matrix3d::Identity(), 1.0});
    return out;
  }

  double max_angle = 0.0;
  for (std::size_t i = 0; i < tangents.size(); ++i) {
    for (std::size_t j = i + 1; j < tangents.size(); ++j) {
      max_angle = std::max(max_angle, line_angle_deg(tangents[i], tangents[j]));
    }
  }
  out.label = (tangents.size() >= 2 && max_angle >= spec.crossing_angle_deg) ? TissueClass::kWmcf
                                                                             : TissueClass::kWmsf;
  // Overlapping strands share the voxel; free water fills what they leave.
  const double fiber = *std::max_element(density.begin(), density.end());
  double total = 0.0;
  for (double d : density) total += d;
  for (std::size_t i = 0; i < tangents.size(); ++i) {
    out.compartments.push_back(
        {fiber_tensor(tangents[i], tissue.fiber_eigenvalues), fiber * density[i] / total});
  }
  if (fiber < 1.0) {
    out.compartments.push_back({tissue.csf_diffusivity * Eigen::Matrix3d::Identity(), 1.0 - fiber});
  }
  return out;
}

Phantom generate_phantom(const PhantomSpec& spec) {
  validate(spec);
  const Dims dims = spec.dims;
  GradientTable gradients(spiral_directions(spec.n_directions), spec.b_value);
  const std::size_t ndir = gradients.size();
  const double s0 = spec.tissue.s0;
  const double sigma = spec.snr > 0.0 ? s0 / spec.snr : 0.0;

  std::vector<double> s0_grid(dims.voxels(), s0);
  std::vector<double> signal(dims.voxels() * ndir);
  std::vector<std::uint8_t> labels(dims.voxels());

  std::vector<double> clean(ndir);
  for (std::size_t y = 0; y < dims.y; ++y) {
    for (std::size_t x = 0; x < dims.x; ++x) {
      const auto composition = describe_voxel(spec, x, y);
      for (std::size_t g = 0; g < ndir; ++g) {
        const Eigen::Vector3d& dir = gradients[g];
        double attenuation = 0.0;
        for (const auto& c : composition.compartments) {
          attenuation += c.fraction * std::exp(-spec.b_value * dir.dot(c.tensor * dir));
        }
        clean[g] = s0 * attenuation;
      }
      for (std::size_t z = 0; z < dims.z; ++z) {
        const std::size_t v = dims.index(x, y, z);
        labels[v] = static_cast<std::uint8_t>(composition.label);
        double* out = signal.data() + v * ndir;
        if (sigma == 0.0) {
          std::copy(clean.begin(), clean.end(), out);
          continue;
        }
        Rng rng(derive_seed(spec.seed, v));
        std::normal_distribution<double> noise(0.0, sigma);
        for (std::size_t g = 0; g < ndir; ++g) {
          const double re = clean[g] + noise(rng);
          const double im = noise(rng);
          out[g] = std::sqrt(re * re + im * im);
        }
      }
    }
  }

  LabelVolume label_volume(dims, std::move(labels), spec.voxel_size_mm);
  const auto hist = label_volume.histogram();
  for (int c = 0; c < kNumClasses; ++c) {
    if (hist[c] == 0) {
      throw ValidationError("phantom geometry produces no " +
                            std::string(class_name(static_cast<TissueClass>(c))) + " voxels");
    }
  }
  return {DwiVolume(dims, spec.voxel_size_mm, std::move(s0_grid), std::move(signal),
                    std::move(gradients)),
          std::move(label_volume)};
}

}  // namespace hardi
