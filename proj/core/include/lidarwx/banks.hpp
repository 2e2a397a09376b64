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
/// \brief Foreground-object databases, ground-truth sampling and the global
///        flip/rotation augmentation for the three training sets.
///
/// Each training set (source frames, simulated-weather frames, denoised target
/// frames) is augmented from its own bank only.

#ifndef LIDARWX__BANKS_HPP_
#define LIDARWX__BANKS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidarwx/geometry.hpp"
#include "lidarwx/io.hpp"
#include "lidarwx/object_bank.hpp"

namespace lidarwx
{

enum class SetId { Source, Sim, Wild };

inline constexpr std::array<SetId, 3> kAllSets{SetId::Source, SetId::Sim, SetId::Wild};

std::string_view set_name(SetId id);
std::optional<SetId> parse_set_id(std::string_view token);

/// The only bank a set may sample from.
BankId bank_for_set(SetId id);

struct BankBuildReport
{
  std::size_t entries{0};
  std::size_t skipped_empty{0};
};

struct BankBuild
{
  ObjectBank bank;
  BankBuildReport report;
};

/// One entry per labeled box with at least one member point; object ids are
/// assigned sequentially in (frame, label) order. Throws ConfigError naming
/// the frame when a frame has no label entry.
BankBuild build_bank(
  std::span<const PointCloudFrame> frames,
  const std::map<std::string, std::vector<LabeledBox>> & labels_by_frame, BankId bank_id);

struct SamplerConfig
{
  std::array<std::size_t, kNumClasses> per_class{15, 10, 10};
  std::size_t max_attempts{10};
  std::uint64_t seed{0};

  void validate() const;
};

struct InsertedObject
{
  std::size_t label_index{0};
  BankId bank{BankId::SourceGT};
  std::uint64_t object_id{0};
};

struct SampleReport
{
  std::array<std::size_t, kNumClasses> inserted{};
  std::array<std::size_t, kNumClasses> unplaced{};  // gave up after max_attempts
  std::size_t removed_points{0};
};

struct SampledFrame
{
  PointCloudFrame frame;
  std::vector<LabeledBox> labels;
  std::vector<InsertedObject> inserted;
  SampleReport report;
};

/// Pastes bank objects at their stored poses. A draw is accepted only when its
/// box has zero BEV IoU with every box already in the frame; base points
/// inside an accepted box are removed, then the object's points are appended.
/// Draws are keyed by (config.seed, frame id).
SampledFrame sample_into_frame(
  const PointCloudFrame & frame, std::span<const LabeledBox> labels, const ObjectBank & bank,
  const SamplerConfig & config);

struct AugmentConfig
{
  double flip_x_prob{0.5};
  double flip_y_prob{0.5};
  double max_rotation{kPi / 4.0};  // rotation drawn from [-max_rotation, max_rotation]
  std::uint64_t seed{0};

  void validate() const;
};

struct GlobalTransform
{
  bool flip_x{false};
  bool flip_y{false};
  double rotation{0.0};
};

GlobalTransform draw_global_transform(const AugmentConfig & config, std::string_view key);

/// flip x, then flip y, then rotation; the inserted-object bookkeeping is unaffected.
AnnotatedFrame apply_global_transform(
  const PointCloudFrame & frame, std::span<const LabeledBox> labels, const GlobalTransform & transform);

struct AugmentedFrame
{
  PointCloudFrame frame;
  std::vector<LabeledBox> labels;
  std::vector<InsertedObject> inserted;
  SampleReport report;
};

/// Sampling from the set's bank followed by the global transform, keyed by
/// the frame id. Throws ConfigError when the bank belongs to another set.
AugmentedFrame augment_frame(
  SetId set, const PointCloudFrame & frame, std::span<const LabeledBox> labels, const ObjectBank & bank,
  const SamplerConfig & sampler, const AugmentConfig & augment);

struct ManifestEntry
{
  SetId set{SetId::Source};
  std::string frame_id;
  std::string cloud_path;  // relative to the manifest directory
  std::string label_path;
};

std::string format_manifest(std::span<const ManifestEntry> entries);
std::vector<ManifestEntry> parse_manifest(const std::string & text);

struct SetInput
{
  SetId set{SetId::Source};
  std::vector<FrameFiles> frames;  // labels required
  ObjectBank bank;
  SamplerConfig sampler;
};

struct SetOutput
{
  std::vector<ManifestEntry> manifest;
  SampleReport totals;
};

/// Augments one set into `<out_dir>/<set>/{clouds,labels}` plus
/// `<out_dir>/<set>/provenance.txt`, producing `length` frames. Shorter
/// inputs are cycled; repeated frames get the id suffix `_r<k>`.
SetOutput augment_set(
  const SetInput & input, const AugmentConfig & augment, const std::filesystem::path & out_dir,
  std::size_t length, std::size_t jobs);

struct AssembleResult
{
  std::array<SetOutput, 3> sets;
};

/// Augments the three sets independently and writes `manifest_<set>.txt`
/// files of equal length (the longest input), in lockstep order.
AssembleResult assemble_wild_sam(
  std::span<const SetInput> inputs, const AugmentConfig & augment, const std::filesystem::path & out_dir,
  std::size_t jobs);

struct ProvenanceRecord
{
  std::string frame_id;
  std::size_t label_index{0};
  BankId bank{BankId::SourceGT};
  std::uint64_t object_id{0};
};

std::vector<ProvenanceRecord> parse_provenance(const std::string & text);

}  // namespace lidarwx

#endif  // LIDARWX__BANKS_HPP_
