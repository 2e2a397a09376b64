// Copyright 2026 The lidarwx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// \file
/// \brief File formats.
///
/// Cloud files (`.bin`) are packed little-endian f32 quadruples (x, y, z, i).
/// Label files (`.txt`) hold one object per line:
///
///     class cx cy cz length width height yaw [score]
///
/// A bank is a directory with `index.txt` and one `obj_<id>.bin` per object.
/// Index lines after the `bank_id` header are
///
///     id class cx cy cz length width height yaw count frame local=true|false fnv=<hex>
///
/// where `fnv` is the FNV-1a hash of the object file.

#ifndef LIDARWX__IO_HPP_
#define LIDARWX__IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidarwx/geometry.hpp"
#include "lidarwx/object_bank.hpp"

namespace lidarwx
{

inline constexpr std::size_t kBytesPerPoint = 16;

struct CloudReadResult
{
  PointCloudFrame frame;
  std::size_t clamped_intensities{0};
};

/// Decodes a byte buffer. Intensities outside [0, 1] are clamped and counted;
/// non-finite values raise FormatError naming the byte offset.
CloudReadResult decode_cloud(std::span<const std::byte> bytes, std::string frame_id = {});
std::vector<std::byte> encode_cloud(std::span<const Point> points);

/// frame_id is the file stem.
CloudReadResult read_cloud(const std::filesystem::path & path);
void write_cloud(const PointCloudFrame & frame, const std::filesystem::path & path);

struct LabelReadResult
{
  std::vector<LabeledBox> labels;
  std::size_t normalized_yaws{0};  // yaw values wrapped into (-pi, pi]
};

LabelReadResult parse_labels(std::string_view text);
std::string format_labels(std::span<const LabeledBox> labels);
LabelReadResult read_labels(const std::filesystem::path & path);
void write_labels(std::span<const LabeledBox> labels, const std::filesystem::path & path);

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

/// Writes `<dir>/index.txt` and `<dir>/obj_<id>.bin`. Stale object files from a
/// previous save are not removed; the index is authoritative.
void save_bank(const ObjectBank & bank, const std::filesystem::path & dir);

/// Validates every object file against the index; mismatches raise
/// IntegrityError naming the object id.
ObjectBank load_bank(const std::filesystem::path & dir);

struct FrameFiles
{
  std::string frame_id;
  std::filesystem::path cloud;
  std::optional<std::filesystem::path> labels;
};

/// Pairs `<cloud_dir>/<id>.bin` with `<label_dir>/<id>.txt`, sorted by frame id.
/// Unlabeled target-domain data is expressed by omitting label_dir. A label
/// file with no matching cloud, or (when require_labels) a cloud with no label,
/// raises ConfigError naming the frame.
struct DatasetLayout
{
  std::filesystem::path root;
  std::string split;
  std::vector<FrameFiles> frames;

  static DatasetLayout scan(
    const std::filesystem::path & cloud_dir,
    const std::optional<std::filesystem::path> & label_dir,
    bool require_labels);

  /// `<root>/<split>/clouds` and, when present, `<root>/<split>/labels`.
  static DatasetLayout open(const std::filesystem::path & root, const std::string & split);
};

std::vector<std::byte> read_file_bytes(const std::filesystem::path & path);

/// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path & path, std::span<const std::byte> bytes);
void write_file_atomic(const std::filesystem::path & path, std::string_view text);

/// 64-bit FNV-1a, used for config and content fingerprints in manifests.
std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

}  // namespace lidarwx

#endif  // LIDARWX__IO_HPP_
