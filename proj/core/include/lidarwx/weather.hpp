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
/// \brief Precipitation particles and their effect on LiDAR returns.
///
/// Surrogate physics, all constants configurable:
///
///   drop-size distribution   N(D) = n0 * exp(-slope * D)      [m^-3 mm^-1], D in mm
///   slope                    slope = lambda_coeff * tau^lambda_exp  [mm^-1]
///   number density           n0 / slope                       [m^-3]
///
/// A beam is the cone from the sensor origin towards the return, half-angle
/// beam_divergence, truncated at min(range, max_range). A particle at axial
/// range s (meters) with diameter D (mm) is on the beam when its perpendicular
/// distance to the axis is at most beam_divergence * s. For the particles on
/// the beam:
///
///   blocked fraction   f_k      = min(1, (pi/4 * (D_k * 1e-3)^2) / (pi * (beam_divergence * s_k)^2))
///   target power       P_tgt    = intensity * exp(-extinction_gain * sum f_k)
///   particle power     P_part   = backscatter_gain * sum (D_k^2 / s_k^2)
///
/// P_part > P_tgt occludes the return; otherwise the intensity becomes P_tgt,
/// and the return is dropped when P_tgt < min_intensity.

#ifndef LIDARWX__WEATHER_HPP_
#define LIDARWX__WEATHER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidarwx/geometry.hpp"

namespace lidarwx
{

enum class PrecipitationKind { Rain, Snow };

std::string_view kind_name(PrecipitationKind kind);
std::optional<PrecipitationKind> parse_kind(std::string_view token);

struct WeatherParams
{
  PrecipitationKind kind{PrecipitationKind::Rain};
  double tau{5.0};               // mm/hr
  double n0{8000.0};             // m^-3 mm^-1
  double lambda_coeff{4.1};      // mm^-1
  double lambda_exp{-0.21};
  double beam_divergence{3e-3};  // rad, cone half-angle
  double max_range{120.0};       // m
  double min_intensity{0.01};
  double backscatter_gain{0.12};
  double extinction_gain{4.0};   // two-way path, extinction efficiency 2
  std::uint64_t seed{0};

  /// Marshall-Palmer constants for rain; Gunn-Marshall slope with a fixed
  /// intercept for snow (tau is the liquid-equivalent rate).
  static WeatherParams defaults(PrecipitationKind kind);

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

/// Distribution slope in mm^-1; undefined (returns +inf) at tau == 0.
double dsd_slope(const WeatherParams & params);

/// Closed-form integral of N(D) over D in [0, inf), m^-3. Zero at tau == 0.
double number_density(const WeatherParams & params);

struct Particle
{
  Vec3 position;
  double diameter{0.0};  // mm
};

struct Extent
{
  Vec3 min;
  Vec3 max;

  double volume() const;
};

/// Frame bounding box grown by 1 m, clamped to the max_range cube.
Extent scene_extent(const PointCloudFrame & frame, const WeatherParams & params);

/// Poisson(number_density * extent volume) particles placed uniformly in the
/// extent, then thinned to the max_range sphere. Throws std::invalid_argument
/// for an extent without positive volume.
std::vector<Particle> sample_particles(const WeatherParams & params, const Extent & extent);

/// A particle on a beam, described by its axial range (m) and diameter (mm).
struct BeamHit
{
  double range{0.0};
  double diameter{0.0};
};

struct ReturnPowers
{
  double particle{0.0};
  double target{0.0};
};

ReturnPowers return_powers(double intensity, std::span<const BeamHit> hits, const WeatherParams & params);

enum class ReturnFate { Unchanged, Attenuated, Occluded, Floored };

struct SimReport
{
  std::size_t input_points{0};
  std::size_t unchanged{0};
  std::size_t attenuated{0};
  std::size_t occluded{0};
  std::size_t floored{0};

  std::size_t surviving() const {return unchanged + attenuated;}
  double survival_fraction() const;
  SimReport & operator+=(const SimReport & other);
};

struct SimResult
{
  PointCloudFrame frame;
  SimReport report;
};

/// Applies precipitation to a frame. Particles on each beam are drawn from the
/// Poisson process restricted to that beam's cone, keyed by (seed, point index),
/// so the result is independent of evaluation order. tau == 0 returns the input
/// unchanged. Labels are not touched: annotations remain valid.
SimResult simulate_weather(const PointCloudFrame & frame, const WeatherParams & params);

/// Same contest against an explicit particle set (e.g. from sample_particles).
SimResult simulate_weather(
  const PointCloudFrame & frame, const WeatherParams & params, std::span<const Particle> particles);

/// Particles of the set lying on the beam towards `target`.
std::vector<BeamHit> beam_hits(const Vec3 & target, std::span<const Particle> particles, const WeatherParams & params);

struct SweepRow
{
  double tau{0.0};
  std::size_t replicas{0};
  SimReport totals;                  // summed over replicas
  double mean_survival_fraction{0.0};
};

/// One simulation per (tau, replica). Seeds derive from (base seed, replica,
/// tau index). Throws std::invalid_argument unless taus is ascending.
std::vector<SweepRow> sweep_tau(
  const PointCloudFrame & frame, const WeatherParams & base, std::span<const double> taus,
  std::size_t replicas = 1);

std::string format_sweep_table(std::span<const SweepRow> rows);

}  // namespace lidarwx

#endif  // LIDARWX__WEATHER_HPP_
