#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hardi/volume.hpp"

namespace hardi {

using Rgb = std::array<std::uint8_t, 3>;

// CSF blue, GM gray, WMSF green, WMCF red.
Rgb class_color(int code);
inline constexpr Rgb kErrorColor{255, 255, 255};
inline constexpr Rgb kCorrectColor{0, 0, 0};

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel
};

// Predicted labels | ground truth | error mask, side by side with a 1-pixel
// white separator, each pixel repeated `scale` times in both directions.
Image label_panels(const LabelVolume& predicted, const LabelVolume& truth, std::size_t slice,
                   std::size_t scale = 1);

// Binary PPM (P6).
void write_ppm(const std::filesystem::path& path, const Image& image);

}  // namespace hardi
