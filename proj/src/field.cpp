// Copyright 2026 The voxaug Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxaug/field.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "voxaug/errors.hpp"

namespace voxaug {

namespace {
constexpr char kMagic[4] = {'N', 'F', 'A', 'F'};
constexpr uint32_t kVersion = 1;
}  // namespace

VoxelField VoxelField::create(int nx, int ny, int nz, const Vec3& bbox_min, const Vec3& bbox_max,
                              float init_raw_density, float init_raw_rgb) {
  VoxelField f;
  f.nx = nx;
  f.ny = ny;
  f.nz = nz;
  f.bbox_min = bbox_min;
  f.bbox_max = bbox_max;
  if (nx < 2 || ny < 2 || nz < 2)
    throw ValidationError("VoxelField: resolution components must be >= 2");
  if (!(bbox_min.x < bbox_max.x && bbox_min.y < bbox_max.y && bbox_min.z < bbox_max.z))
    throw ValidationError("VoxelField: bbox_min must be < bbox_max componentwise");
  f.raw_density.assign(f.node_count(), init_raw_density);
  f.raw_rgb.assign(f.node_count() * 3, init_raw_rgb);
  return f;
}

void VoxelField::validate() const {
  if (nx < 2 || ny < 2 || nz < 2)
    throw ValidationError("VoxelField: resolution components must be >= 2");
  if (!(bbox_min.x < bbox_max.x && bbox_min.y < bbox_max.y && bbox_min.z < bbox_max.z))
    throw ValidationError("VoxelField: bbox_min must be < bbox_max componentwise");
  if (raw_density.size() != node_count() || raw_rgb.size() != node_count() * 3)
    throw ValidationError("VoxelField: grid sizes disagree with resolution");
  for (const float v : raw_density)
    if (!std::isfinite(v)) throw FormatError("VoxelField: non-finite raw_density value");
  for (const float v : raw_rgb)
    if (!std::isfinite(v)) throw FormatError("VoxelField: non-finite raw_rgb value");
}

void save_field(const VoxelField& field, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_field: cannot open '" + path + "' for writing");
  auto put = [&out, &path](const void* p, size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) throw IoError("save_field: short write to '" + path + "'");
  };
  put(kMagic, 4);
  const uint32_t version = kVersion;
  const uint32_t res[3] = {static_cast<uint32_t>(field.nx), static_cast<uint32_t>(field.ny),
                           static_cast<uint32_t>(field.nz)};
  const double bbox[6] = {field.bbox_min.x, field.bbox_min.y, field.bbox_min.z,
                          field.bbox_max.x, field.bbox_max.y, field.bbox_max.z};
  put(&version, 4);
  put(res, 12);
  put(bbox, 48);
  put(field.raw_density.data(), field.raw_density.size() * sizeof(float));
  put(field.raw_rgb.data(), field.raw_rgb.size() * sizeof(float));
}

VoxelField load_field(const std::string& path) {
  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("load_field: cannot stat '" + path + "': " + ec.message());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_field: cannot open '" + path + "'");

  constexpr size_t kHeaderBytes = 4 + 4 + 12 + 48;
  if (file_size < kHeaderBytes)
    throw TruncationError("load_field: '" + path + "' holds " + std::to_string(file_size) +
                          " bytes, shorter than the " + std::to_string(kHeaderBytes) +
                          "-byte header");

  auto get = [&in, &path](void* p, size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw IoError("load_field: read failure in '" + path + "'");
  };

  char magic[4];
  get(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("load_field: '" + path + "' has bad magic bytes (expected NFAF)");
  uint32_t version = 0;
  get(&version, 4);
  if (version != kVersion)
    throw FormatError("load_field: unsupported field version " + std::to_string(version) +
                      " (expected " + std::to_string(kVersion) + ")");
  uint32_t res[3];
  get(res, 12);
  double bbox[6];
  get(bbox, 48);

  if (res[0] < 2 || res[1] < 2 || res[2] < 2 || res[0] > (1u << 12) || res[1] > (1u << 12) ||
      res[2] > (1u << 12))
    throw FormatError("load_field: implausible resolution " + std::to_string(res[0]) + "x" +
                      std::to_string(res[1]) + "x" + std::to_string(res[2]));

  const size_t nodes = static_cast<size_t>(res[0]) * res[1] * res[2];
  const size_t expected = kHeaderBytes + nodes * sizeof(float) + nodes * 3 * sizeof(float);
  if (file_size != expected)
    throw TruncationError("load_field: '" + path + "' holds " + std::to_string(file_size) +
                          " bytes, expected " + std::to_string(expected));

  VoxelField field;
  field.nx = static_cast<int>(res[0]);
  field.ny = static_cast<int>(res[1]);
  field.nz = static_cast<int>(res[2]);
  field.bbox_min = {bbox[0], bbox[1], bbox[2]};
  field.bbox_max = {bbox[3], bbox[4], bbox[5]};
  field.raw_density.resize(nodes);
  field.raw_rgb.resize(nodes * 3);
  get(field.raw_density.data(), nodes * sizeof(float));
  get(field.raw_rgb.data(), nodes * 3 * sizeof(float));
  field.validate();
  return field;
}

}  // namespace voxaug
