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
/// \brief Procedural scenes for tests, benchmarks and the `synth` subcommand:
///        a noisy ground disk plus box-shaped objects sampled on their faces.

#ifndef LIDARWX__SYNTHETIC_HPP_
#define LIDARWX__SYNTHETIC_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "lidarwx/geometry.hpp"

namespace lidarwx
{

struct SceneOptions
{
  std::size_t ground_points{1500};
  double ground_radius{40.0};
  double ground_z{-1.75};
  std::array<std::size_t, kNumClasses> objects{4, 3, 3};
  std::array<std::size_t, kNumClasses> points_per_object{200, 60, 50};
  double min_object_range{5.0};
  double max_object_range{30.0};
  std::uint64_t seed{0};
};

/// Typical (length, width, height) for each class.
Box3D nominal_box(ObjectClass c);

/// Objects never overlap in BEV. Fewer objects than requested are produced
/// only when 1000 placement draws do not suffice.
AnnotatedFrame make_scene(const SceneOptions & options, const std::string & frame_id);

}  // namespace lidarwx

#endif  // LIDARWX__SYNTHETIC_HPP_
