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

#include "lidarwx/weather.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

#include "lidarwx/random.hpp"

namespace lidarwx
{

namespace
{

constexpr std::uint64_t kParticleStream = 0x7061727469636c65ULL;  // "particle"

ReturnFate classify(
  const Point & in, std::span<const BeamHit> hits, const WeatherParams & params, Point & out)
{
  if (hits.empty()) {
    out = in;
    return ReturnFate::Unchanged;
  }
  const ReturnPowers powers = return_powers(in.intensity, hits, params);
  if (powers.particle > powers.target) {
    return ReturnFate::Occluded;
  }
  const double attenuated = std::clamp(powers.target, 0.0, 1.0);
  if (attenuated < params.min_intensity) {
    return ReturnFate::Floored;
  }
  out = in;
  out.intensity = attenuated;
  return ReturnFate::Attenuated;
}

void tally(SimReport & report, ReturnFate fate)
{
  switch (fate) {
    case ReturnFate::Unchanged:
      ++report.unchanged;
      break;
    case ReturnFate::Attenuated:
      ++report.attenuated;
      break;
    case ReturnFate::Occluded:
      ++report.occluded;
      break;
    case ReturnFate::Floored:
      ++report.floored;
      break;
  }
}

}  // namespace

std::string_view kind_name(PrecipitationKind kind)
{
  return kind == PrecipitationKind::Rain ? "rain" : "snow";
}

std::optional<PrecipitationKind> parse_kind(std::string_view token)
{
  if (token == "rain") {return PrecipitationKind::Rain;}
  if (token == "snow") {return PrecipitationKind::Snow;}
  return std::nullopt;
}

WeatherParams WeatherParams::defaults(PrecipitationKind kind)
{
  WeatherParams p;
  p.kind = kind;
  if (kind == PrecipitationKind::Snow) {
    p.n0 = 3800.0;
    p.lambda_coeff = 2.55;
    p.lambda_exp = -0.48;
    p.backscatter_gain = 0.01;
  }
  return p;
}

void WeatherParams::validate() const
{
  auto require = [](bool ok, const char * what) {
      if (!ok) {
        throw std::invalid_argument(what);
      }
    };
  require(std::isfinite(tau) && tau >= 0.0, "tau must be finite and >= 0");
  require(std::isfinite(n0) && n0 > 0.0, "n0 must be > 0");
  require(std::isfinite(lambda_coeff) && lambda_coeff > 0.0, "lambda_coeff must be > 0");
  require(std::isfinite(lambda_exp), "lambda_exp must be finite");
  require(std::isfinite(beam_divergence) && beam_divergence > 0.0, "beam_divergence must be > 0");
  require(std::isfinite(max_range) && max_range > 0.0, "max_range must be > 0");
  require(min_intensity >= 0.0 && min_intensity <= 1.0, "min_intensity must lie in [0, 1]");
  require(std::isfinite(backscatter_gain) && backscatter_gain >= 0.0, "backscatter_gain must be >= 0");
  require(std::isfinite(extinction_gain) && extinction_gain >= 0.0, "extinction_gain must be >= 0");
}

double dsd_slope(const WeatherParams & params)
{
  if (params.tau <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return params.lambda_coeff * std::pow(params.tau, params.lambda_exp);
}

double number_density(const WeatherParams & params)
{
  if (params.tau <= 0.0) {
    return 0.0;
  }
  return params.n0 / dsd_slope(params);
}

double Extent::volume() const
{
  return std::max(0.0, max.x - min.x) * std::max(0.0, max.y - min.y) * std::max(0.0, max.z - min.z);
}

Extent scene_extent(const PointCloudFrame & frame, const WeatherParams & params)
{
  const double r = params.max_range;
  if (frame.points.empty()) {
    return {{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};
  }
  Extent e{{frame.points[0].x, frame.points[0].y, frame.points[0].z},
    {frame.points[0].x, frame.points[0].y, frame.points[0].z}};
  for (const Point & p : frame.points) {
    e.min = {std::min(e.min.x, p.x), std::min(e.min.y, p.y), std::min(e.min.z, p.z)};
    e.max = {std::max(e.max.x, p.x), std::max(e.max.y, p.y), std::max(e.max.z, p.z)};
  }
  auto clamp_r = [r](double v) {return std::clamp(v, -r, r);};
  e.min = {clamp_r(e.min.x - 1.0), clamp_r(e.min.y - 1.0), clamp_r(e.min.z - 1.0)};
  e.max = {clamp_r(e.max.x + 1.0), clamp_r(e.max.y + 1.0), clamp_r(e.max.z + 1.0)};
  return e;
}

std::vector<Particle> sample_particles(const WeatherParams & params, const Extent & extent)
{
  params.validate();
  const double volume = extent.volume();
  if (!(volume > 0.0)) {
    throw std::invalid_argument("particle extent must have positive volume");
  }
  std::vector<Particle> particles;
  const double density = number_density(params);
  if (density == 0.0) {
    return particles;
  }
  Engine engine = make_engine(params.seed, kParticleStream);
  std::poisson_distribution<std::size_t> count_dist(density * volume);
  const std::size_t count = count_dist(engine);
  std::uniform_real_distribution<double> ux(extent.min.x, extent.max.x);
  std::uniform_real_distribution<double> uy(extent.min.y, extent.max.y);
  std::uniform_real_distribution<double> uz(extent.min.z, extent.max.z);
  std::exponential_distribution<double> diameter(dsd_slope(params));
  const double r2 = params.max_range * params.max_range;
  particles.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Particle part;
    part.position = {ux(engine), uy(engine), uz(engine)};
    part.diameter = diameter(engine);
    if (dot(part.position, part.position) <= r2 && part.diameter > 0.0) {
      particles.push_back(part);
    }
  }
  return particles;
}

ReturnPowers return_powers(double intensity, std::span<const BeamHit> hits, const WeatherParams & params)
{
  double blocked = 0.0;
  double backscatter = 0.0;
  const double theta2 = params.beam_divergence * params.beam_divergence;
  for (const BeamHit & hit : hits) {
    const double d_m = hit.diameter * 1e-3;
    const double s2 = hit.range * hit.range;
    blocked += std::min(1.0, (d_m * d_m) / (4.0 * theta2 * s2));
    backscatter += (hit.diameter * hit.diameter) / s2;
  }
  return {params.backscatter_gain * backscatter, intensity * std::exp(-params.extinction_gain * blocked)};
}

double SimReport::survival_fraction() const
{
  if (input_points == 0) {
    return 1.0;
  }
  return static_cast<double>(surviving()) / static_cast<double>(input_points);
}

SimReport & SimReport::operator+=(const SimReport & other)
{
  input_points += other.input_points;
  unchanged += other.unchanged;
  attenuated += other.attenuated;
  occluded += other.occluded;
  floored += other.floored;
  return *this;
}

SimResult simulate_weather(const PointCloudFrame & frame, const WeatherParams & params)
{
  params.validate();
  SimResult result;
  result.report.input_points = frame.points.size();
  if (params.tau == 0.0) {
    result.frame = frame;
    result.report.unchanged = frame.points.size();
    return result;
  }
  result.frame.frame_id = frame.frame_id;
  result.frame.points.reserve(frame.points.size());

  const double density = number_density(params);
  const double slope = dsd_slope(params);
  const double cone_factor = density * kPi * params.beam_divergence * params.beam_divergence / 3.0;
  std::vector<BeamHit> hits;
  for (std::size_t i = 0; i < frame.points.size(); ++i) {
    const Point & p = frame.points[i];
    const double range = norm(p.position());
    hits.clear();
    if (range > 0.0) {
      const double reach = std::min(range, params.max_range);
      Engine engine = make_engine(params.seed, i);
      std::poisson_distribution<std::size_t> count_dist(cone_factor * reach * reach * reach);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::exponential_distribution<double> diameter(slope);
      const std::size_t count = count_dist(engine);
      for (std::size_t k = 0; k < count; ++k) {
        // Axial range density grows as s^2 inside a cone.
        const double s = reach * std::cbrt(1.0 - unit(engine));
        const double d = diameter(engine);
        if (d > 0.0) {
          hits.push_back({s, d});
        }
      }
    }
    Point out;
    const ReturnFate fate = classify(p, hits, params, out);
    tally(result.report, fate);
    if (fate == ReturnFate::Unchanged || fate == ReturnFate::Attenuated) {
      result.frame.points.push_back(out);
    }
  }
  return result;
}

std::vector<BeamHit> beam_hits(const Vec3 & target, std::span<const Particle> particles, const WeatherParams & params)
{
  std::vector<BeamHit> hits;
  const double range = norm(target);
  if (range == 0.0) {
    return hits;
  }
  const double reach = std::min(range, params.max_range);
  const Vec3 axis{target.x / range, target.y / range, target.z / range};
  for (const Particle & part : particles) {
    const double s = dot(part.position, axis);
    if (s <= 0.0 || s >= reach) {
      continue;
    }
    const Vec3 perp{part.position.x - s * axis.x, part.position.y - s * axis.y, part.position.z - s * axis.z};
    if (norm(perp) <= params.beam_divergence * s) {
      hits.push_back({s, part.diameter});
    }
  }
  return hits;
}

SimResult simulate_weather(
  const PointCloudFrame & frame, const WeatherParams & params, std::span<const Particle> particles)
{
  params.validate();
  SimResult result;
  result.report.input_points = frame.points.size();
  result.frame.frame_id = frame.frame_id;
  result.frame.points.reserve(frame.points.size());
  for (const Point & p : frame.points) {
    const auto hits = beam_hits(p.position(), particles, params);
    Point out;
    const ReturnFate fate = classify(p, hits, params, out);
    tally(result.report, fate);
    if (fate == ReturnFate::Unchanged || fate == ReturnFate::Attenuated) {
      result.frame.points.push_back(out);
    }
  }
  return result;
}

std::vector<SweepRow> sweep_tau(
  const PointCloudFrame & frame, const WeatherParams & base, std::span<const double> taus,
  std::size_t replicas)
{
  if (!std::is_sorted(taus.begin(), taus.end())) {
    throw std::invalid_argument("tau values must be sorted ascending");
  }
  if (replicas == 0) {
    throw std::invalid_argument("replicas must be >= 1");
  }
  std::vector<SweepRow> rows;
  rows.reserve(taus.size());
  for (std::size_t t = 0; t < taus.size(); ++t) {
    SweepRow row;
    row.tau = taus[t];
    row.replicas = replicas;
    double survival_sum = 0.0;
    for (std::size_t r = 0; r < replicas; ++r) {
      WeatherParams params = base;
      params.tau = taus[t];
      params.seed = derive_seed(derive_seed(base.seed, r), t);
      const SimResult sim = simulate_weather(frame, params);
      row.totals += sim.report;
      survival_sum += sim.report.survival_fraction();
    }
    row.mean_survival_fraction = survival_sum / static_cast<double>(replicas);
    rows.push_back(row);
  }
  return rows;
}

std::string format_sweep_table(std::span<const SweepRow> rows)
{
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %8s %10s %12s %12s %10s %10s\n",
    "tau_mm_hr", "replicas", "survival", "unchanged", "attenuated", "occluded", "floored");
  out += line;
  for (const SweepRow & row : rows) {
    std::snprintf(line, sizeof(line), "%-10g %8zu %10.6f %12zu %12zu %10zu %10zu\n",
      row.tau, row.replicas, row.mean_survival_fraction, row.totals.unchanged, row.totals.attenuated,
      row.totals.occluded, row.totals.floored);
    out += line;
  }
  return out;
}

}  // namespace lidarwx
