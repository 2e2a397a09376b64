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

#include "lidarwx/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lidarwx/eval.hpp"
#include "lidarwx/random.hpp"

namespace lidarwx
{

namespace
{

constexpr double kFaceInset = 1e-3;

Point sample_on_faces(const Box3D & box, Engine & engine, std::uniform_real_distribution<double> & unit)
{
  // Inset keeps face points inside the box after f32 storage.
  const double l = box.length - 2.0 * kFaceInset;
  const double w = box.width - 2.0 * kFaceInset;
  const double h = box.height - 2.0 * kFaceInset;
  // Side faces and top; bottom faces the ground and is never seen.
  const std::array<double, 5> areas{w * h, w * h, l * h, l * h, l * w};
  double total = 0.0;
  for (double a : areas) {total += a;}
  double pick = unit(engine) * total;
  std::size_t face = 0;
  while (face + 1 < areas.size() && pick > areas[face]) {
    pick -= areas[face];
    ++face;
  }
  const double a = unit(engine) - 0.5;
  const double b = unit(engine) - 0.5;
  Vec3 local;
  switch (face) {
    case 0: local = {0.5 * l, a * w, b * h}; break;
    case 1: local = {-0.5 * l, a * w, b * h}; break;
    case 2: local = {a * l, 0.5 * w, b * h}; break;
    case 3: local = {a * l, -0.5 * w, b * h}; break;
    default: local = {a * l, b * w, 0.5 * h}; break;
  }
  const Vec3 world = from_box_local(box, local);
  return {world.x, world.y, world.z, 0.05 + 0.95 * unit(engine)};
}

}  // namespace

Box3D nominal_box(ObjectClass c)
{
  switch (c) {
    case ObjectClass::Car:
      return {0.0, 0.0, 0.0, 4.2, 1.8, 1.6, 0.0};
    case ObjectClass::Pedestrian:
      return {0.0, 0.0, 0.0, 0.8, 0.7, 1.75, 0.0};
    case ObjectClass::Bike:
      return {0.0, 0.0, 0.0, 1.8, 0.7, 1.6, 0.0};
  }
  return {};
}

AnnotatedFrame make_scene(const SceneOptions & options, const std::string & frame_id)
{
  Engine engine(derive_seed(options.seed, frame_id));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AnnotatedFrame scene;
  scene.frame.frame_id = frame_id;

  for (std::size_t i = 0; i < options.ground_points; ++i) {
    const double r = std::sqrt(unit(engine)) * options.ground_radius + 2.0;
    const double phi = (2.0 * unit(engine) - 1.0) * kPi;
    const double z = options.ground_z + 0.02 * (unit(engine) - 0.5);
    scene.frame.points.push_back({r * std::cos(phi), r * std::sin(phi), z, 0.05 + 0.3 * unit(engine)});
  }

  for (ObjectClass c : kAllClasses) {
    const std::size_t want = options.objects[class_index(c)];
    std::size_t placed = 0;
    for (std::size_t attempt = 0; attempt < 1000 && placed < want; ++attempt) {
      Box3D box = nominal_box(c);
      box.length *= 0.9 + 0.2 * unit(engine);
      box.width *= 0.9 + 0.2 * unit(engine);
      box.height *= 0.9 + 0.2 * unit(engine);
      const double r = options.min_object_range +
        unit(engine) * (options.max_object_range - options.min_object_range);
      const double phi = (2.0 * unit(engine) - 1.0) * kPi;
      box.cx = r * std::cos(phi);
      box.cy = r * std::sin(phi);
      box.cz = options.ground_z + 0.05 + 0.5 * box.height;
      box.yaw = normalize_yaw((2.0 * unit(engine) - 1.0) * kPi);
      const bool overlaps = std::any_of(scene.labels.begin(), scene.labels.end(),
        [&](const LabeledBox & other) {return iou_bev(inflate(other.box, 0.2), inflate(box, 0.2)) > 0.0;});
      if (overlaps) {
        continue;
      }
      const std::size_t n = options.points_per_object[class_index(c)];
      for (std::size_t k = 0; k < n; ++k) {
        scene.frame.points.push_back(sample_on_faces(box, engine, unit));
      }
      scene.labels.push_back({box, c, std::nullopt});
      ++placed;
    }
  }
  return scene;
}

}  // namespace lidarwx
