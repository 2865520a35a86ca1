#include "hardi/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "hardi/errors.hpp"

namespace hardi {

std::vector<Eigen::Vector3d> spiral_directions(std::size_t count) {
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double z = 1.0 - (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * static_cast<double>(i);
    Eigen::Vector3d d(r * std::cos(phi), r * std::sin(phi), z);
    dirs.push_back(d.normalized());
  }
  return dirs;
}

GradientTable load_gradient_text(const std::filesystem::path& path, double b_value) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gradient table " + path.string());
  std::vector<Eigen::Vector3d> dirs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double x = 0.0, y = 0.0, z = 0.0;
    if (!(fields >> x >> y >> z)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 'x y z'");
    }
    Eigen::Vector3d d(x, y, z);
    const double norm = d.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": zero-length gradient direction");
    }
    dirs.push_back(d / norm);
  }
  return GradientTable(std::move(dirs), b_value);
}

}  // namespace hardi
