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

#include "lidarwx/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "lidarwx/errors.hpp"
#include "lidarwx/io.hpp"

namespace lidarwx
{

namespace
{

std::string_view trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {s.remove_prefix(1);}
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {s.remove_suffix(1);}
  return s;
}

double to_double(std::string_view key, std::string_view value)
{
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(v)) {
    throw ConfigError("config key " + std::string(key) + ": invalid number '" + std::string(value) + "'");
  }
  return v;
}

template<typename Int>
Int to_integer(std::string_view key, std::string_view value)
{
  Int v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key " + std::string(key) + ": invalid integer '" + std::string(value) + "'");
  }
  return v;
}

std::optional<ObjectClass> class_key(std::string_view token)
{
  return parse_class(token);
}

std::string lower_class(ObjectClass c)
{
  std::string s(class_name(c));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) {return static_cast<char>(std::tolower(ch));});
  return s;
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value)
{
  value = trim(value);
  if (key == "seed") {
    seed = to_integer<std::uint64_t>(key, value);
    return;
  }
  if (key.rfind("weather.", 0) == 0) {
    const std::string_view field = key.substr(8);
    if (field == "kind") {
      const auto kind = parse_kind(value);
      if (!kind) {
        throw ConfigError("config key weather.kind: expected rain or snow");
      }
      const double tau = weather.tau;
      weather = WeatherParams::defaults(*kind);
      weather.tau = tau;
      return;
    }
    const double v = to_double(key, value);
    if (field == "tau") {weather.tau = v;} else if (field == "n0") {weather.n0 = v;} else if (field == "lambda_coeff") {
      weather.lambda_coeff = v;
    } else if (field == "lambda_exp") {weather.lambda_exp = v;} else if (field == "beam_divergence") {
      weather.beam_divergence = v;
    } else if (field == "max_range") {weather.max_range = v;} else if (field == "min_intensity") {
      weather.min_intensity = v;
    } else if (field == "backscatter_gain") {weather.backscatter_gain = v;} else if (field == "extinction_gain") {
      weather.extinction_gain = v;
    } else {
      throw ConfigError("unknown config key: " + std::string(key));
    }
    return;
  }
  if (key.rfind("denoise.n.", 0) == 0) {
    const auto c = class_key(key.substr(10));
    if (!c) {
      throw ConfigError("unknown config key: " + std::string(key));
    }
    denoise.thresholds.min_points[class_index(*c)] = to_integer<std::size_t>(key, value);
    return;
  }
  if (key == "denoise.ray_radius") {
    denoise.ray_radius = to_double(key, value);
    return;
  }
  if (key == "denoise.containment_margin") {
    denoise.containment_margin = to_double(key, value);
    return;
  }
  if (key == "library.min_points") {
    library_min_points = to_integer<std::size_t>(key, value);
    return;
  }
  if (key == "sampler.max_attempts") {
    const auto n = to_integer<std::size_t>(key, value);
    for (auto & s : samplers) {
      s.max_attempts = n;
    }
    return;
  }
  if (key.rfind("sampler.", 0) == 0) {
    const std::string_view rest = key.substr(8);
    const auto dot_pos = rest.find('.');
    if (dot_pos != std::string_view::npos) {
      const auto set = parse_set_id(rest.substr(0, dot_pos));
      const auto c = class_key(rest.substr(dot_pos + 1));
      if (set && c) {
        sampler(*set).per_class[class_index(*c)] = to_integer<std::size_t>(key, value);
        return;
      }
    }
    throw ConfigError("unknown config key: " + std::string(key));
  }
  if (key == "augment.flip_x_prob") {
    augment.flip_x_prob = to_double(key, value);
    return;
  }
  if (key == "augment.flip_y_prob") {
    augment.flip_y_prob = to_double(key, value);
    return;
  }
  if (key == "augment.max_rotation") {
    augment.max_rotation = to_double(key, value);
    return;
  }
  if (key.rfind("eval.iou.", 0) == 0) {
    const auto c = class_key(key.substr(9));
    if (!c) {
      throw ConfigError("unknown config key: " + std::string(key));
    }
    eval.iou_threshold[class_index(*c)] = to_double(key, value);
    return;
  }
  if (key == "eval.recall_positions") {
    eval.recall_positions = to_integer<std::size_t>(key, value);
    return;
  }
  if (key == "eval.iou_kind") {
    if (value == "3d") {
      eval.iou_kind = IouKind::ThreeD;
    } else if (value == "bev") {
      eval.iou_kind = IouKind::Bev;
    } else {
      throw ConfigError("config key eval.iou_kind: expected 3d or bev");
    }
    return;
  }
  throw ConfigError("unknown config key: " + std::string(key));
}

void PipelineConfig::validate() const
{
  try {
    weather.validate();
    denoise.thresholds.validate();
    eval.validate();
  } catch (const std::invalid_argument & e) {
    throw ConfigError(e.what());
  }
  if (!(denoise.ray_radius > 0.0)) {
    throw ConfigError("denoise.ray_radius must be > 0");
  }
  if (!(denoise.containment_margin >= 0.0)) {
    throw ConfigError("denoise.containment_margin must be >= 0");
  }
  if (library_min_points < 1) {
    throw ConfigError("library.min_points must be >= 1");
  }
  for (const auto & s : samplers) {
    s.validate();
  }
  augment.validate();
}

std::string PipelineConfig::canonical() const
{
  std::map<std::string, std::string> kv;
  kv["seed"] = std::to_string(seed);
  kv["weather.kind"] = std::string(kind_name(weather.kind));
  kv["weather.tau"] = format_double(weather.tau);
  kv["weather.n0"] = format_double(weather.n0);
  kv["weather.lambda_coeff"] = format_double(weather.lambda_coeff);
  kv["weather.lambda_exp"] = format_double(weather.lambda_exp);
  kv["weather.beam_divergence"] = format_double(weather.beam_divergence);
  kv["weather.max_range"] = format_double(weather.max_range);
  kv["weather.min_intensity"] = format_double(weather.min_intensity);
  kv["weather.backscatter_gain"] = format_double(weather.backscatter_gain);
  kv["weather.extinction_gain"] = format_double(weather.extinction_gain);
  for (ObjectClass c : kAllClasses) {
    kv["denoise.n." + lower_class(c)] = std::to_string(denoise.thresholds.of(c));
    kv["eval.iou." + lower_class(c)] = format_double(eval.threshold(c));
    for (SetId s : kAllSets) {
      kv["sampler." + std::string(set_name(s)) + "." + lower_class(c)] =
        std::to_string(sampler(s).per_class[class_index(c)]);
    }
  }
  kv["denoise.ray_radius"] = format_double(denoise.ray_radius);
  kv["denoise.containment_margin"] = format_double(denoise.containment_margin);
  kv["library.min_points"] = std::to_string(library_min_points);
  kv["sampler.max_attempts"] = std::to_string(samplers[0].max_attempts);
  kv["augment.flip_x_prob"] = format_double(augment.flip_x_prob);
  kv["augment.flip_y_prob"] = format_double(augment.flip_y_prob);
  kv["augment.max_rotation"] = format_double(augment.max_rotation);
  kv["eval.recall_positions"] = std::to_string(eval.recall_positions);
  kv["eval.iou_kind"] = eval.iou_kind == IouKind::Bev ? "bev" : "3d";
  std::string out;
  for (const auto & [k, v] : kv) {
    out += k + " = " + v + "\n";
  }
  return out;
}

std::uint64_t PipelineConfig::hash() const
{
  return fnv1a64(canonical());
}

ConfigEntries parse_config_entries(std::string_view text)
{
  ConfigEntries entries;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    if (!seen.emplace(key, line_no).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key " + key);
    }
    entries.emplace_back(key, value);
  }
  return entries;
}

PipelineConfig resolve_config(const ConfigEntries & entries, const ConfigEntries & overrides)
{
  ConfigEntries merged;
  for (const auto & kv : entries) {
    const bool overridden = std::any_of(overrides.begin(), overrides.end(),
      [&](const auto & o) {return o.first == kv.first;});
    if (!overridden) {
      merged.push_back(kv);
    }
  }
  merged.insert(merged.end(), overrides.begin(), overrides.end());
  std::stable_partition(merged.begin(), merged.end(),
    [](const auto & kv) {return kv.first == "weather.kind";});
  PipelineConfig config;
  for (const auto & [key, value] : merged) {
    config.set(key, value);
  }
  config.validate();
  return config;
}

PipelineConfig parse_config(std::string_view text)
{
  return resolve_config(parse_config_entries(text));
}

PipelineConfig load_config(const std::filesystem::path & path, const ConfigEntries & overrides)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return resolve_config(parse_config_entries(ss.str()), overrides);
}

}  // namespace lidarwx
