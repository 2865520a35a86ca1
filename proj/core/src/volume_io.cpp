#include "hardi/volume_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "hardi/errors.hpp"

namespace hardi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path strip_extension(const fs::path& prefix) {
  const auto ext = prefix.extension();
  if (ext == ".json" || ext == ".raw") {
    fs::path stripped = prefix;
    stripped.replace_extension();
    return stripped;
  }
  return prefix;
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFF000000u) >> 24) | ((v & 0x00FF0000u) >> 8) | ((v & 0x0000FF00u) << 8) |
        ((v & 0x000000FFu) << 24);
  }
  return v;
}

void append_f32(std::vector<char>& blob, double value) {
  if (std::isnan(value)) throw ValidationError("refusing to write NaN into a volume blob");
  const auto bits = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(value)));
  char bytes[4];
  std::memcpy(bytes, &bits, 4);
  blob.insert(blob.end(), bytes, bytes + 4);
}

double read_f32(const std::vector<char>& blob, std::size_t element) {
  std::uint32_t bits;
  std::memcpy(&bits, blob.data() + element * 4, 4);
  return static_cast<double>(std::bit_cast<float>(to_little_endian(bits)));
}

json dims_json(const Dims& dims) { return json::array({dims.x, dims.y, dims.z}); }

void write_pair(const fs::path& prefix, const json& header, const std::vector<char>& blob) {
  const auto base = strip_extension(prefix);
  {
    std::ofstream out(sidecar_path(base));
    if (!out) throw IoError("cannot open " + sidecar_path(base).string() + " for writing");
    out << header.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + sidecar_path(base).string());
  }
  std::ofstream out(blob_path(base), std::ios::binary);
  if (!out) throw IoError("cannot open " + blob_path(base).string() + " for writing");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError("failed writing " + blob_path(base).string());
}

json read_header(const fs::path& base) {
  std::ifstream in(sidecar_path(base));
  if (!in) throw IoError("cannot open " + sidecar_path(base).string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("malformed sidecar " + sidecar_path(base).string() + ": " + e.what());
  }
}

std::vector<char> read_blob(const fs::path& base) {
  std::ifstream in(blob_path(base), std::ios::binary);
  if (!in) throw IoError("cannot open " + blob_path(base).string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename T>
T field(const json& header, const char* key) {
  if (!header.contains(key)) throw FormatError(std::string("sidecar is missing key '") + key + "'");
  try {
    return header.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("sidecar key '") + key + "' has the wrong type: " + e.what());
  }
}

Dims parse_dims(const json& header) {
  const auto extents = field<std::vector<std::size_t>>(header, "dims");
  if (extents.size() != 3) throw FormatError("\"dims\" must have 3 entries");
  return {extents[0], extents[1], extents[2]};
}

void expect_dtype(const json& header, const char* dtype) {
  const auto actual = field<std::string>(header, "dtype");
  if (actual != dtype) {
    throw FormatError("expected dtype " + std::string(dtype) + ", sidecar declares " + actual);
  }
}

void expect_blob_size(const std::vector<char>& blob, std::size_t expected, const fs::path& base) {
  if (blob.size() != expected) {
    throw FormatError("blob " + blob_path(base).string() + " has " + std::to_string(blob.size()) +
                      " bytes, header implies " + std::to_string(expected));
  }
}

DwiVolume decode_dwi(const json& header, const std::vector<char>& blob, const fs::path& base) {
  expect_dtype(header, "f32le");
  const Dims dims = parse_dims(header);
  const auto b_value = field<double>(header, "b_value");
  const auto raw_dirs = field<std::vector<std::vector<double>>>(header, "gradients");
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(raw_dirs.size());
  for (const auto& d : raw_dirs) {
    if (d.size() != 3) throw FormatError("each gradient must have 3 components");
    dirs.emplace_back(d[0], d[1], d[2]);
  }
  GradientTable gradients(std::move(dirs), b_value);
  const std::size_t nvox = dims.voxels();
  const std::size_t ndir = gradients.size();
  expect_blob_size(blob, 4 * nvox * (ndir + 1), base);

  std::vector<double> s0(nvox);
  std::vector<double> signal(nvox * ndir);
  for (std::size_t v = 0; v < nvox; ++v) s0[v] = read_f32(blob, v);
  for (std::size_t g = 0; g < ndir; ++g) {
    for (std::size_t v = 0; v < nvox; ++v) signal[v * ndir + g] = read_f32(blob, (g + 1) * nvox + v);
  }
  return DwiVolume(dims, field<double>(header, "voxel_size_mm"), std::move(s0), std::move(signal),
                   std::move(gradients));
}

FeatureVolume decode_features(const json& header, const std::vector<char>& blob,
                              const fs::path& base) {
  expect_dtype(header, "f32le");
  const Dims dims = parse_dims(header);
  FeatureKind kind;
  try {
    kind = parse_feature_kind(field<std::string>(header, "feature_kind"));
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
  const std::size_t n = feature_dimension(kind);
  const std::size_t nvox = dims.voxels();
  expect_blob_size(blob, 4 * nvox * n, base);
  std::vector<double> values(nvox * n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t v = 0; v < nvox; ++v) values[v * n + c] = read_f32(blob, c * nvox + v);
  }
  return FeatureVolume(dims, kind, std::move(values), field<double>(header, "voxel_size_mm"));
}

LabelVolume decode_labels(const json& header, const std::vector<char>& blob, const fs::path& base) {
  expect_dtype(header, "u8");
  const Dims dims = parse_dims(header);
  expect_blob_size(blob, dims.voxels(), base);
  std::vector<std::uint8_t> labels(blob.size());
  std::memcpy(labels.data(), blob.data(), blob.size());
  return LabelVolume(dims, std::move(labels), field<double>(header, "voxel_size_mm"));
}

}  // namespace

fs::path sidecar_path(const fs::path& prefix) {
  auto p = strip_extension(prefix);
  p += ".json";
  return p;
}

fs::path blob_path(const fs::path& prefix) {
  auto p = strip_extension(prefix);
  p += ".raw";
  return p;
}

void write_volume(const fs::path& prefix, const DwiVolume& volume) {
  const auto& dims = volume.dims();
  const std::size_t nvox = dims.voxels();
  const std::size_t ndir = volume.n_directions();

  json gradients = json::array();
  for (const auto& g : volume.gradients().directions()) gradients.push_back({g.x(), g.y(), g.z()});
  const json header = {{"kind", "dwi"},
                       {"dims", dims_json(dims)},
                       {"voxel_size_mm", volume.voxel_size_mm()},
                       {"b_value", volume.gradients().b_value()},
                       {"gradients", gradients},
                       {"dtype", "f32le"}};

  std::vector<char> blob;
  blob.reserve(4 * nvox * (ndir + 1));
  for (std::size_t v = 0; v < nvox; ++v) append_f32(blob, volume.s0(v));
  const auto signal = volume.signal_data();
  for (std::size_t g = 0; g < ndir; ++g) {
    for (std::size_t v = 0; v < nvox; ++v) append_f32(blob, signal[v * ndir + g]);
  }
  write_pair(prefix, header, blob);
}

void write_volume(const fs::path& prefix, const FeatureVolume& volume) {
  const auto& dims = volume.dims();
  const std::size_t nvox = dims.voxels();
  const json header = {{"kind", "features"},
                       {"dims", dims_json(dims)},
                       {"voxel_size_mm", volume.voxel_size_mm()},
                       {"feature_kind", std::string(to_string(volume.kind()))},
                       {"dtype", "f32le"}};
  std::vector<char> blob;
  blob.reserve(4 * nvox * volume.n());
  for (std::size_t c = 0; c < volume.n(); ++c) {
    for (std::size_t v = 0; v < nvox; ++v) append_f32(blob, volume.at(v, c));
  }
  write_pair(prefix, header, blob);
}

void write_volume(const fs::path& prefix, const LabelVolume& volume) {
  const json header = {{"kind", "labels"},
                       {"dims", dims_json(volume.dims())},
                       {"voxel_size_mm", volume.voxel_size_mm()},
                       {"dtype", "u8"}};
  const auto labels = volume.data();
  write_pair(prefix, header, std::vector<char>(labels.begin(), labels.end()));
}

void write_volume(const fs::path& prefix, const AnyVolume& volume) {
  std::visit([&](const auto& v) { write_volume(prefix, v); }, volume);
}

AnyVolume read_volume(const fs::path& prefix) {
  const auto base = strip_extension(prefix);
  const json header = read_header(base);
  const auto kind = field<std::string>(header, "kind");
  if (kind != "dwi" && kind != "features" && kind != "labels") {
    throw FormatError("unknown volume kind '" + kind + "'");
  }
  const auto blob = read_blob(base);
  if (kind == "dwi") return decode_dwi(header, blob, base);
  if (kind == "features") return decode_features(header, blob, base);
  return decode_labels(header, blob, base);
}

namespace {

template <typename T>
T read_as(const fs::path& prefix, const char* expected) {
  auto any = read_volume(prefix);
  if (auto* v = std::get_if<T>(&any)) return std::move(*v);
  throw FormatError(sidecar_path(prefix).string() + " does not hold a " + expected + " volume");
}

}  // namespace

DwiVolume read_dwi(const fs::path& prefix) { return read_as<DwiVolume>(prefix, "dwi"); }
FeatureVolume read_features(const fs::path& prefix) {
  return read_as<FeatureVolume>(prefix, "features");
}
LabelVolume read_labels(const fs::path& prefix) { return read_as<LabelVolume>(prefix, "labels"); }

}  // namespace hardi
