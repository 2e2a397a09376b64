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
/// \brief Points, oriented boxes, membership tests and the rigid transforms used
///        by global augmentation.
///
/// Coordinates are sensor-centric: sensor at the origin, z up, yaw measured
/// counterclockwise about +z when viewed from above. Box centers are geometric
/// centers, not bottom centers.

#ifndef LIDARWX__GEOMETRY_HPP_
#define LIDARWX__GEOMETRY_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lidarwx
{

inline constexpr double kPi = 3.14159265358979323846;

/// Slack on box faces when testing membership, meters. Covers the rounding of
/// a round trip through the box-local frame so that a box's own corners test
/// as members.
inline constexpr double kBoundaryTolerance = 1e-9;

struct Vec3
{
  double x{0.0};
  double y{0.0};
  double z{0.0};

  friend bool operator==(const Vec3 &, const Vec3 &) = default;
};

/// One LiDAR return. Stored in double precision in memory; cloud files hold f32.
struct Point
{
  double x{0.0};
  double y{0.0};
  double z{0.0};
  double intensity{0.0};  // [0, 1]

  Vec3 position() const { return {x, y, z}; }
  friend bool operator==(const Point &, const Point &) = default;
};

struct PointCloudFrame
{
  std::string frame_id;
  std::vector<Point> points;
};

struct Box3D
{
  double cx{0.0};
  double cy{0.0};
  double cz{0.0};
  double length{1.0};  // along local x
  double width{1.0};   // along local y
  double height{1.0};  // along z
  double yaw{0.0};     // (-pi, pi]

  Vec3 center() const { return {cx, cy, cz}; }
  double volume() const { return length * width * height; }
  friend bool operator==(const Box3D &, const Box3D &) = default;
};

enum class ObjectClass { Car = 0, Pedestrian = 1, Bike = 2 };

inline constexpr std::array<ObjectClass, 3> kAllClasses{
  ObjectClass::Car, ObjectClass::Pedestrian, ObjectClass::Bike};

inline constexpr std::size_t kNumClasses = kAllClasses.size();

inline constexpr std::size_t class_index(ObjectClass c)
{
  return static_cast<std::size_t>(c);
}

std::string_view class_name(ObjectClass c);

/// Case-insensitive parse of "car", "pedestrian", "bike".
std::optional<ObjectClass> parse_class(std::string_view token);

/// Box plus class; score is present for pseudo-labels and detections only.
struct LabeledBox
{
  Box3D box;
  ObjectClass class_id{ObjectClass::Car};
  std::optional<double> score;

  friend bool operator==(const LabeledBox &, const LabeledBox &) = default;
};

enum class FlipAxis { X, Y };

/// Maps any finite angle into (-pi, pi].
double normalize_yaw(double angle);

/// True when length, width, height are positive, all fields are finite and
/// yaw lies in (-pi, pi].
bool is_valid(const Box3D & box);

/// Expresses a world point in the box frame: translate by -center, rotate by -yaw.
Vec3 to_box_local(const Box3D & box, const Vec3 & world);
Vec3 from_box_local(const Box3D & box, const Vec3 & local);

/// Closed membership test (faces included, see kBoundaryTolerance).
bool contains(const Box3D & box, const Vec3 & point);

/// Indices, ascending, of the points inside the closed box.
std::vector<std::size_t> points_in_box(const PointCloudFrame & frame, const Box3D & box);

/// Corner order: bottom face (z = cz - h/2) then top face, each walked
/// counterclockwise from above starting at local (+l/2, +w/2):
/// (+,+), (-,+), (-,-), (+,-).
std::array<Vec3, 8> box_corners(const Box3D & box);

/// The bottom-face corners projected to the ground plane, counterclockwise.
std::array<std::array<double, 2>, 4> bev_corners(const Box3D & box);

/// Scales length, width and height by (1 + fraction) about the center.
Box3D inflate(const Box3D & box, double fraction);

Box3D rotate_box_z(const Box3D & box, double angle);
Box3D flip_box(const Box3D & box, FlipAxis axis);
Point rotate_point_z(const Point & p, double angle);
Point flip_point(const Point & p, FlipAxis axis);

struct AnnotatedFrame
{
  PointCloudFrame frame;
  std::vector<LabeledBox> labels;
};

/// Rotates every point and every box about +z. angle == 0 returns the input unchanged.
AnnotatedFrame rotate_frame_z(const PointCloudFrame & frame, std::span<const LabeledBox> labels, double angle);

/// Mirror across the given axis. FlipAxis::X negates y (yaw -> -yaw),
/// FlipAxis::Y negates x (yaw -> pi - yaw). Applying the same flip twice
/// restores coordinates bit for bit.
AnnotatedFrame flip_frame(const PointCloudFrame & frame, std::span<const LabeledBox> labels, FlipAxis axis);

double norm(const Vec3 & v);
double dot(const Vec3 & a, const Vec3 & b);
Vec3 cross(const Vec3 & a, const Vec3 & b);

}  // namespace lidarwx

#endif  // LIDARWX__GEOMETRY_HPP_
