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

#ifndef LIDARWX__RANDOM_HPP_
#define LIDARWX__RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace lidarwx
{

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for a keyed sub-stream. Streams are keyed by what they describe
/// (point index, frame id, tau index), never by execution order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key)
{
  return mix64(seed ^ mix64(key + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view key)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : key) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return derive_seed(seed, h);
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t key)
{
  return Engine(derive_seed(seed, key));
}

}  // namespace lidarwx

#endif  // LIDARWX__RANDOM_HPP_
