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

#ifndef LIDARWX__OBJECT_BANK_HPP_
#define LIDARWX__OBJECT_BANK_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lidarwx/geometry.hpp"

namespace lidarwx
{

/// Which database a bank holds. Reference is used when a denoising template
/// library is persisted in the bank format.
enum class BankId { SourceGT, SimGT, WildPseudo, Reference };

std::string_view bank_name(BankId id);
std::optional<BankId> parse_bank_id(std::string_view token);

/// A cropped object. With local == false the points and box are in the frame's
/// sensor coordinates; with local == true the points are box-local and the box
/// sits at the origin with yaw 0.
struct BankEntry
{
  std::uint64_t object_id{0};
  ObjectClass class_id{ObjectClass::Car};
  Box3D box;
  std::vector<Point> points;
  std::string source_frame_id;
  bool local{false};

  friend bool operator==(const BankEntry &, const BankEntry &) = default;
};

struct ObjectBank
{
  BankId bank_id{BankId::SourceGT};
  std::vector<BankEntry> entries;

  friend bool operator==(const ObjectBank &, const ObjectBank &) = default;
};

}  // namespace lidarwx

#endif  // LIDARWX__OBJECT_BANK_HPP_
