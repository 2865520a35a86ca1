#pragma once

#include <filesystem>
#include <variant>

#include "hardi/volume.hpp"

namespace hardi {

using AnyVolume = std::variant<DwiVolume, FeatureVolume, LabelVolume>;

// On-disk format: `<prefix>.json` sidecar plus `<prefix>.raw` little-endian blob.
//
// Blob element order is x fastest, then y, then z, then component. Features and
// signals are f32le, labels u8. A DWI blob holds the S0 grid first, followed by
// one grid per gradient direction. A trailing ".json" or ".raw" on `prefix` is
// ignored so either file of the pair can be named.
void write_volume(const std::filesystem::path& prefix, const DwiVolume& volume);
void write_volume(const std::filesystem::path& prefix, const FeatureVolume& volume);
void write_volume(const std::filesystem::path& prefix, const LabelVolume& volume);
void write_volume(const std::filesystem::path& prefix, const AnyVolume& volume);

// Throws IoError (missing/unreadable), FormatError (header/blob mismatch,
// unknown tags) or ValidationError (payload violates a type invariant).
AnyVolume read_volume(const std::filesystem::path& prefix);

DwiVolume read_dwi(const std::filesystem::path& prefix);
FeatureVolume read_features(const std::filesystem::path& prefix);
LabelVolume read_labels(const std::filesystem::path& prefix);

std::filesystem::path sidecar_path(const std::filesystem::path& prefix);
std::filesystem::path blob_path(const std::filesystem::path& prefix);

}  // namespace hardi
