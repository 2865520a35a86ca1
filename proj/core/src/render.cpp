#include "hardi/render.hpp"

#include <fstream>
#include <string>

#include "hardi/errors.hpp"

namespace hardi {

Rgb class_color(int code) {
  switch (code) {
    case 0: return {0, 0, 255};
    case 1: return {128, 128, 128};
    case 2: return {0, 255, 0};
    case 3: return {255, 0, 0};
    default: throw ValidationError("no color for label code " + std::to_string(code));
  }
}

Image label_panels(const LabelVolume& predicted, const LabelVolume& truth, std::size_t slice,
                   std::size_t scale) {
  require(predicted.dims() == truth.dims(), "predicted and truth volumes differ in size");
  require(slice < truth.dims().z, "slice index out of range");
  require(scale >= 1, "render scale must be >= 1");
  const Dims dims = truth.dims();
  const std::size_t panel_w = dims.x * scale;
  Image img;
  img.width = 3 * panel_w + 2;
  img.height = dims.y * scale;
  img.rgb.assign(img.width * img.height * 3, 255);

  auto put = [&](std::size_t px, std::size_t py, const Rgb& c) {
    auto* dst = img.rgb.data() + (py * img.width + px) * 3;
    dst[0] = c[0];
    dst[1] = c[1];
    dst[2] = c[2];
  };
  for (std::size_t y = 0; y < dims.y; ++y) {
    for (std::size_t x = 0; x < dims.x; ++x) {
      const std::size_t v = dims.index(x, y, slice);
      const int p = predicted.at(v);
      const int t = truth.at(v);
      const Rgb colors[3] = {class_color(p), class_color(t), p == t ? kCorrectColor : kErrorColor};
      for (std::size_t panel = 0; panel < 3; ++panel) {
        const std::size_t x0 = panel * (panel_w + 1) + x * scale;
        for (std::size_t dy = 0; dy < scale; ++dy) {
          for (std::size_t dx = 0; dx < scale; ++dx) put(x0 + dx, y * scale + dy, colors[panel]);
        }
      }
    }
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()),
            static_cast<std::streamsize>(image.rgb.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace hardi
