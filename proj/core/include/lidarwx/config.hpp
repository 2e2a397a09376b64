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
/// \brief Pipeline configuration: UTF-8 `key = value` lines, `#` starts a comment.
///
/// Keys (defaults in parentheses):
///
///     seed (0)
///     weather.kind (rain)          weather.tau (5)
///     weather.n0                   weather.lambda_coeff        weather.lambda_exp
///     weather.beam_divergence      weather.max_range           weather.min_intensity
///     weather.backscatter_gain     weather.extinction_gain
///     denoise.n.car (50)           denoise.n.pedestrian (20)   denoise.n.bike (20)
///     denoise.ray_radius (0.1)     denoise.containment_margin (0.01)
///     library.min_points (50)
///     sampler.<source|sim|wild>.<car|pedestrian|bike>          sampler.max_attempts (10)
///     augment.flip_x_prob (0.5)    augment.flip_y_prob (0.5)   augment.max_rotation (pi/4)
///     eval.iou.car (0.7)           eval.iou.pedestrian (0.5)   eval.iou.bike (0.25)
///     eval.recall_positions (40)   eval.iou_kind (3d|bev)
///
/// weather.kind loads that kind's default constants, so it is applied before
/// the other weather keys regardless of position in the file.

#ifndef LIDARWX__CONFIG_HPP_
#define LIDARWX__CONFIG_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lidarwx/banks.hpp"
#include "lidarwx/denoise.hpp"
#include "lidarwx/eval.hpp"
#include "lidarwx/weather.hpp"

namespace lidarwx
{

struct PipelineConfig
{
  std::uint64_t seed{0};
  WeatherParams weather{WeatherParams::defaults(PrecipitationKind::Rain)};
  DenoiseOptions denoise;
  std::size_t library_min_points{50};
  std::array<SamplerConfig, 3> samplers{};  // indexed by SetId
  AugmentConfig augment;
  EvalConfig eval;

  /// Throws ConfigError for an unknown key or malformed value.
  void set(std::string_view key, std::string_view value);

  /// Throws ConfigError on a violated invariant.
  void validate() const;

  /// Every effective key, sorted, one `key = value` per line.
  std::string canonical() const;
  std::uint64_t hash() const;

  SamplerConfig & sampler(SetId id) {return samplers[static_cast<std::size_t>(id)];}
  const SamplerConfig & sampler(SetId id) const {return samplers[static_cast<std::size_t>(id)];}
};

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Key/value pairs in file order. Throws ConfigError on malformed lines or
/// duplicate keys.
ConfigEntries parse_config_entries(std::string_view text);

/// Applies `entries`, then `overrides` (which win on shared keys), with
/// weather.kind first.
PipelineConfig resolve_config(const ConfigEntries & entries, const ConfigEntries & overrides = {});

PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path & path, const ConfigEntries & overrides = {});

}  // namespace lidarwx

#endif  // LIDARWX__CONFIG_HPP_
