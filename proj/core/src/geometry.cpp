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

#include "lidarwx/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace lidarwx
{

std::string_view class_name(ObjectClass c)
{
  switch (c) {
    case ObjectClass::Car:
      return "Car";
    case ObjectClass::Pedestrian:
      return "Pedestrian";
    case ObjectClass::Bike:
      return "Bike";
  }
  return "Unknown";
}

std::optional<ObjectClass> parse_class(std::string_view token)
{
  std::string lower(token);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) {
    return static_cast<char>(std::tolower(ch));
  });
  if (lower == "car") {return ObjectClass::Car;}
  if (lower == "pedestrian") {return ObjectClass::Pedestrian;}
  if (lower == "bike") {return ObjectClass::Bike;}
  return std::nullopt;
}

double normalize_yaw(double angle)
{
  double r = std::remainder(angle, 2.0 * kPi);
  if (r <= -kPi) {
    r += 2.0 * kPi;
  }
  return r;
}

bool is_valid(const Box3D & box)
{
  const bool finite = std::isfinite(box.cx) && std::isfinite(box.cy) && std::isfinite(box.cz) &&
    std::isfinite(box.length) && std::isfinite(box.width) && std::isfinite(box.height) &&
    std::isfinite(box.yaw);
  return finite && box.length > 0.0 && box.width > 0.0 && box.height > 0.0 &&
         box.yaw > -kPi && box.yaw <= kPi;
}

Vec3 to_box_local(const Box3D & box, const Vec3 & world)
{
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double dx = world.x - box.cx;
  const double dy = world.y - box.cy;
  return {c * dx + s * dy, -s * dx + c * dy, world.z - box.cz};
}

Vec3 from_box_local(const Box3D & box, const Vec3 & local)
{
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  return {box.cx + c * local.x - s * local.y, box.cy + s * local.x + c * local.y, box.cz + local.z};
}

bool contains(const Box3D & box, const Vec3 & point)
{
  const Vec3 local = to_box_local(box, point);
  return std::abs(local.x) <= 0.5 * box.length + kBoundaryTolerance &&
         std::abs(local.y) <= 0.5 * box.width + kBoundaryTolerance &&
         std::abs(local.z) <= 0.5 * box.height + kBoundaryTolerance;
}

std::vector<std::size_t> points_in_box(const PointCloudFrame & frame, const Box3D & box)
{
  std::vector<std::size_t> indices;
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double hl = 0.5 * box.length + kBoundaryTolerance;
  const double hw = 0.5 * box.width + kBoundaryTolerance;
  const double hh = 0.5 * box.height + kBoundaryTolerance;
  for (std::size_t i = 0; i < frame.points.size(); ++i) {
    const Point & p = frame.points[i];
    const double dz = p.z - box.cz;
    if (std::abs(dz) > hh) {
      continue;
    }
    const double dx = p.x - box.cx;
    const double dy = p.y - box.cy;
    if (std::abs(c * dx + s * dy) <= hl && std::abs(-s * dx + c * dy) <= hw) {
      indices.push_back(i);
    }
  }
  return indices;
}

std::array<Vec3, 8> box_corners(const Box3D & box)
{
  static constexpr std::array<std::array<double, 2>, 4> kSigns{{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
  std::array<Vec3, 8> corners{};
  for (std::size_t layer = 0; layer < 2; ++layer) {
    const double z = (layer == 0 ? -0.5 : 0.5) * box.height;
    for (std::size_t k = 0; k < 4; ++k) {
      const Vec3 local{kSigns[k][0] * 0.5 * box.length, kSigns[k][1] * 0.5 * box.width, z};
      corners[layer * 4 + k] = from_box_local(box, local);
    }
  }
  return corners;
}

std::array<std::array<double, 2>, 4> bev_corners(const Box3D & box)
{
  const auto corners = box_corners(box);
  std::array<std::array<double, 2>, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = {corners[k].x, corners[k].y};
  }
  return out;
}

Box3D inflate(const Box3D & box, double fraction)
{
  Box3D out = box;
  out.length *= 1.0 + fraction;
  out.width *= 1.0 + fraction;
  out.height *= 1.0 + fraction;
  return out;
}

Point rotate_point_z(const Point & p, double angle)
{
  if (angle == 0.0) {
    return p;
  }
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y, p.z, p.intensity};
}

Box3D rotate_box_z(const Box3D & box, double angle)
{
  if (angle == 0.0) {
    return box;
  }
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Box3D out = box;
  out.cx = c * box.cx - s * box.cy;
  out.cy = s * box.cx + c * box.cy;
  out.yaw = normalize_yaw(box.yaw + angle);
  return out;
}

Point flip_point(const Point & p, FlipAxis axis)
{
  Point out = p;
  if (axis == FlipAxis::X) {
    out.y = -p.y;
  } else {
    out.x = -p.x;
  }
  return out;
}

Box3D flip_box(const Box3D & box, FlipAxis axis)
{
  Box3D out = box;
  if (axis == FlipAxis::X) {
    out.cy = -box.cy;
    out.yaw = normalize_yaw(-box.yaw);
  } else {
    out.cx = -box.cx;
    out.yaw = normalize_yaw(kPi - box.yaw);
  }
  return out;
}

AnnotatedFrame rotate_frame_z(const PointCloudFrame & frame, std::span<const LabeledBox> labels, double angle)
{
  AnnotatedFrame out;
  out.frame.frame_id = frame.frame_id;
  out.frame.points.reserve(frame.points.size());
  for (const Point & p : frame.points) {
    out.frame.points.push_back(rotate_point_z(p, angle));
  }
  out.labels.reserve(labels.size());
  for (const LabeledBox & label : labels) {
    LabeledBox moved = label;
    moved.box = rotate_box_z(label.box, angle);
    out.labels.push_back(moved);
  }
  return out;
}

AnnotatedFrame flip_frame(const PointCloudFrame & frame, std::span<const LabeledBox> labels, FlipAxis axis)
{
  AnnotatedFrame out;
  out.frame.frame_id = frame.frame_id;
  out.frame.points.reserve(frame.points.size());
  for (const Point & p : frame.points) {
    out.frame.points.push_back(flip_point(p, axis));
  }
  out.labels.reserve(labels.size());
  for (const LabeledBox & label : labels) {
    LabeledBox moved = label;
    moved.box = flip_box(label.box, axis);
    out.labels.push_back(moved);
  }
  return out;
}

double norm(const Vec3 & v) {return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);}

double dot(const Vec3 & a, const Vec3 & b) {return a.x * b.x + a.y * b.y + a.z * b.z;}

Vec3 cross(const Vec3 & a, const Vec3 & b)
{
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

}  // namespace lidarwx
