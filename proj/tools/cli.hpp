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

#ifndef LIDARWX_TOOLS__CLI_HPP_
#define LIDARWX_TOOLS__CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace lidarwx::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name. Tables go to `out`,
/// counters and the single structured error line go to `err`.
int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

}  // namespace lidarwx::cli

#endif  // LIDARWX_TOOLS__CLI_HPP_
