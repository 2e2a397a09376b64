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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "lidarwx/geometry.hpp"
#include "support/oracles.hpp"

namespace lidarwx
{
namespace
{

const Box3D kUnit{0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0};

TEST(Contains, UnitCube)
{
  EXPECT_TRUE(contains(kUnit, {0.0, 0.0, 0.0}));
  EXPECT_FALSE(contains(kUnit, {0.51, 0.0, 0.0}));
  EXPECT_TRUE(contains(kUnit, {0.5, -0.5, 0.5}));
}

TEST(Contains, RotatedBox)
{
  const Box3D box{2.0, 0.0, 0.0, 2.0, 1.0, 1.0, kPi / 2.0};
  EXPECT_TRUE(contains(box, {2.0, 0.9, 0.0}));
  EXPECT_FALSE(contains(box, {2.9, 0.0, 0.0}));
}

TEST(Contains, CornersAreMembers)
{
  std::mt19937_64 engine(7);
  std::uniform_real_distribution<double> u(0.3, 5.0);
  for (int i = 0; i < 200; ++i) {
    const Box3D box{u(engine), -u(engine), u(engine), u(engine), u(engine), u(engine), oracle::random_yaw(engine)};
    for (const Vec3 & c : box_corners(box)) {
      EXPECT_TRUE(contains(box, c));
    }
  }
}

TEST(BoxCorners, UnitCube)
{
  for (const Vec3 & c : box_corners(kUnit)) {
    EXPECT_EQ(std::abs(c.x), 0.5);
    EXPECT_EQ(std::abs(c.y), 0.5);
    EXPECT_EQ(std::abs(c.z), 0.5);
  }
  std::set<std::array<int, 3>> signs;
  for (const Vec3 & c : box_corners(kUnit)) {
    signs.insert({c.x > 0 ? 1 : -1, c.y > 0 ? 1 : -1, c.z > 0 ? 1 : -1});
  }
  EXPECT_EQ(signs.size(), 8u);
}

TEST(BoxCorners, YawPiGivesSameSet)
{
  Box3D turned = kUnit;
  turned.yaw = kPi;
  auto key = [](const Vec3 & v) {
      return std::array<long, 3>{std::lround(v.x * 1e6), std::lround(v.y * 1e6), std::lround(v.z * 1e6)};
    };
  std::set<std::array<long, 3>> a;
  std::set<std::array<long, 3>> b;
  for (const Vec3 & c : box_corners(kUnit)) {a.insert(key(c));}
  for (const Vec3 & c : box_corners(turned)) {b.insert(key(c));}
  EXPECT_EQ(a, b);
}

TEST(BoxCorners, OffsetBox)
{
  const Box3D box{1.0, 1.0, 1.0, 4.0, 2.0, 1.0, 0.0};
  for (const Vec3 & c : box_corners(box)) {
    EXPECT_TRUE(c.x == -1.0 || c.x == 3.0);
    EXPECT_TRUE(c.y == 0.0 || c.y == 2.0);
    EXPECT_TRUE(c.z == 0.5 || c.z == 1.5);
  }
}

TEST(Rotate, ZeroAngleIsBitwiseIdentity)
{
  const Point p{1.234567, -9.87654321, 0.333, 0.25};
  EXPECT_EQ(rotate_point_z(p, 0.0), p);
  const Box3D b{1.5, -2.5, 0.1, 4.0, 2.0, 1.5, 0.7};
  EXPECT_EQ(rotate_box_z(b, 0.0), b);
}

TEST(Rotate, QuarterTurn)
{
  const Point q = rotate_point_z({1.0, 0.0, 0.0, 0.5}, kPi / 2.0);
  EXPECT_NEAR(q.x, 0.0, 1e-9);
  EXPECT_NEAR(q.y, 1.0, 1e-9);
  EXPECT_EQ(q.z, 0.0);
  EXPECT_EQ(q.intensity, 0.5);
}

TEST(Flip, Involution)
{
  const Point p{1.1, 2.2, 3.3, 0.4};
  EXPECT_EQ(flip_point(flip_point(p, FlipAxis::X), FlipAxis::X), p);
  EXPECT_EQ(flip_point(flip_point(p, FlipAxis::Y), FlipAxis::Y), p);
}

TEST(Flip, AcrossXAxis)
{
  const Point q = flip_point({1.0, 2.0, 3.0, 0.0}, FlipAxis::X);
  EXPECT_EQ(q.x, 1.0);
  EXPECT_EQ(q.y, -2.0);
  EXPECT_EQ(q.z, 3.0);
}

TEST(Yaw, Normalization)
{
  EXPECT_EQ(normalize_yaw(0.0), 0.0);
  EXPECT_NEAR(normalize_yaw(-kPi), kPi, 1e-12);
  EXPECT_NEAR(normalize_yaw(3.0 * kPi / 2.0), -kPi / 2.0, 1e-12);
  for (double a = -20.0; a < 20.0; a += 0.37) {
    const double n = normalize_yaw(a);
    EXPECT_GT(n, -kPi);
    EXPECT_LE(n, kPi);
  }
}

/// Random frame with points clustered near a random box so membership is non-trivial.
AnnotatedFrame random_scene(std::mt19937_64 & engine)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> dim(0.5, 5.0);
  AnnotatedFrame scene;
  const Box3D box{10.0 * u(engine), 10.0 * u(engine), u(engine), dim(engine), dim(engine), dim(engine),
    oracle::random_yaw(engine)};
  scene.labels.push_back({box, ObjectClass::Car, std::nullopt});
  for (int i = 0; i < 400; ++i) {
    scene.frame.points.push_back({box.cx + 3.0 * u(engine), box.cy + 3.0 * u(engine), box.cz + 3.0 * u(engine),
      0.5 * (u(engine) + 1.0)});
  }
  return scene;
}

/// Points within a hair of a face are skipped: rounding may legitimately move them across.
std::vector<std::size_t> robust_members(const PointCloudFrame & frame, const Box3D & box, std::vector<bool> & ambiguous)
{
  std::vector<std::size_t> out;
  Box3D shrunk = box;
  Box3D grown = box;
  shrunk.length -= 2e-7; shrunk.width -= 2e-7; shrunk.height -= 2e-7;
  grown.length += 2e-7; grown.width += 2e-7; grown.height += 2e-7;
  ambiguous.assign(frame.points.size(), false);
  for (std::size_t i = 0; i < frame.points.size(); ++i) {
    const auto & p = frame.points[i];
    const bool in_small = oracle::inside(shrunk, p.x, p.y, p.z);
    const bool in_big = oracle::inside(grown, p.x, p.y, p.z);
    if (in_small != in_big) {
      ambiguous[i] = true;
    } else if (in_small) {
      out.push_back(i);
    }
  }
  return out;
}

void expect_same_membership(const AnnotatedFrame & before, const AnnotatedFrame & after)
{
  std::vector<bool> ambiguous;
  robust_members(before.frame, before.labels[0].box, ambiguous);
  auto a = points_in_box(before.frame, before.labels[0].box);
  auto b = points_in_box(after.frame, after.labels[0].box);
  auto drop = [&](std::vector<std::size_t> & v) {
      v.erase(std::remove_if(v.begin(), v.end(), [&](std::size_t i) {return ambiguous[i];}), v.end());
    };
  drop(a);
  drop(b);
  EXPECT_EQ(a, b);
}

TEST(Property, RotationPreservesMembership)
{
  std::mt19937_64 engine(11);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int trial = 0; trial < 100; ++trial) {
    const auto scene = random_scene(engine);
    const auto turned = rotate_frame_z(scene.frame, scene.labels, angle(engine));
    expect_same_membership(scene, turned);
  }
}

TEST(Property, FlipPreservesMembership)
{
  std::mt19937_64 engine(13);
  for (int trial = 0; trial < 100; ++trial) {
    const auto scene = random_scene(engine);
    expect_same_membership(scene, flip_frame(scene.frame, scene.labels, FlipAxis::X));
    expect_same_membership(scene, flip_frame(scene.frame, scene.labels, FlipAxis::Y));
  }
}

TEST(Property, MembershipAgreesWithOracle)
{
  std::mt19937_64 engine(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto scene = random_scene(engine);
    std::vector<bool> ambiguous;
    const auto expected = robust_members(scene.frame, scene.labels[0].box, ambiguous);
    auto got = points_in_box(scene.frame, scene.labels[0].box);
    got.erase(std::remove_if(got.begin(), got.end(), [&](std::size_t i) {return ambiguous[i];}), got.end());
    EXPECT_EQ(got, expected);
  }
}

TEST(Classes, ParseIsCaseInsensitive)
{
  EXPECT_EQ(parse_class("car"), ObjectClass::Car);
  EXPECT_EQ(parse_class("PEDESTRIAN"), ObjectClass::Pedestrian);
  EXPECT_EQ(parse_class("Bike"), ObjectClass::Bike);
  EXPECT_FALSE(parse_class("Truck").has_value());
}

TEST(Validity, RejectsBadBoxes)
{
  EXPECT_TRUE(is_valid(kUnit));
  Box3D b = kUnit;
  b.length = 0.0;
  EXPECT_FALSE(is_valid(b));
  b = kUnit;
  b.yaw = -kPi;
  EXPECT_FALSE(is_valid(b));
  b.yaw = std::nan("");
  EXPECT_FALSE(is_valid(b));
}

}  // namespace
}  // namespace lidarwx
