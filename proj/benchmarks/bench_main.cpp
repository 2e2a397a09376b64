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

#include <benchmark/benchmark.h>

#include <random>

#include "lidarwx/denoise.hpp"
#include "lidarwx/eval.hpp"
#include "lidarwx/synthetic.hpp"
#include "lidarwx/weather.hpp"

namespace lidarwx
{
namespace
{

std::vector<Box3D> random_boxes(std::size_t n)
{
  std::mt19937_64 engine(1);
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_real_distribution<double> dim(0.5, 6.0);
  std::uniform_real_distribution<double> yaw(-3.0, 3.0);
  std::vector<Box3D> boxes;
  for (std::size_t i = 0; i < n; ++i) {
    boxes.push_back({pos(engine), pos(engine), pos(engine), dim(engine), dim(engine), dim(engine), yaw(engine)});
  }
  return boxes;
}

void BM_Iou3d(benchmark::State & state)
{
  const auto boxes = random_boxes(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou_3d(boxes[i & 1023], boxes[(i + 1) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Iou3d);

void BM_PointsInBox(benchmark::State & state)
{
  const auto scene = make_scene({}, "bench");
  for (auto _ : state) {
    for (const auto & label : scene.labels) {
      benchmark::DoNotOptimize(points_in_box(scene.frame, label.box));
    }
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * scene.labels.size()));
}
BENCHMARK(BM_PointsInBox);

void BM_SimulateWeather(benchmark::State & state)
{
  const auto scene = make_scene({}, "bench");
  WeatherParams params = WeatherParams::defaults(PrecipitationKind::Rain);
  params.tau = static_cast<double>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    params.seed = seed++;
    benchmark::DoNotOptimize(simulate_weather(scene.frame, params));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * scene.frame.points.size()));
}
BENCHMARK(BM_SimulateWeather)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_RayProjection(benchmark::State & state)
{
  std::mt19937_64 engine(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> tmpl;
  for (int k = 0; k < state.range(0); ++k) {
    tmpl.push_back({20.0 + u(engine), 5.0 + u(engine), u(engine)});
  }
  const Vec3 original{20.5, 5.2, 0.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(ray_project_point(original, tmpl, 0.1));
  }
}
BENCHMARK(BM_RayProjection)->Arg(200)->Arg(2000);

}  // namespace
}  // namespace lidarwx

BENCHMARK_MAIN();
