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

#include <cmath>
#include <random>

#include "lidarwx/denoise.hpp"
#include "lidarwx/errors.hpp"
#include "lidarwx/synthetic.hpp"

namespace lidarwx
{
namespace
{

const Box3D kCarBox{15.0, 3.0, -0.95, 4.2, 1.8, 1.6, 0.4};
const Box3D kPedBox{8.0, -4.0, -0.9, 0.8, 0.7, 1.75, -1.1};

/// `n` points strictly inside `box`, drawn from local coordinates.
std::vector<Point> fill(const Box3D & box, std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> u(-0.49, 0.49);
  std::uniform_real_distribution<double> i(0.0, 1.0);
  std::vector<Point> pts;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 w = from_box_local(box, {u(engine) * box.length, u(engine) * box.width, u(engine) * box.height});
    pts.push_back({w.x, w.y, w.z, i(engine)});
  }
  return pts;
}

ReferenceLibrary dense_library()
{
  PointCloudFrame frame{"ref", fill(kCarBox, 300, 1)};
  const auto ped = fill(kPedBox, 80, 2);
  frame.points.insert(frame.points.end(), ped.begin(), ped.end());
  std::map<std::string, std::vector<LabeledBox>> labels{
    {"ref", {{kCarBox, ObjectClass::Car, std::nullopt}, {kPedBox, ObjectClass::Pedestrian, std::nullopt}}}};
  return build_reference_library(std::span(&frame, 1), labels, 50).library;
}

TEST(Library, SingleDenseCar)
{
  PointCloudFrame frame{"f", fill(kCarBox, 200, 3)};
  std::map<std::string, std::vector<LabeledBox>> labels{{"f", {{kCarBox, ObjectClass::Car, std::nullopt}}}};
  const auto build = build_reference_library(std::span(&frame, 1), labels, 100);
  ASSERT_EQ(build.library.of(ObjectClass::Car).size(), 1u);
  EXPECT_EQ(build.library.of(ObjectClass::Car)[0].point_count(), 200u);
  EXPECT_EQ(build.report.empty_classes.size(), 2u);
}

TEST(Library, SparseBoxExcluded)
{
  PointCloudFrame frame{"f", fill(kCarBox, 10, 4)};
  std::map<std::string, std::vector<LabeledBox>> labels{{"f", {{kCarBox, ObjectClass::Car, std::nullopt}}}};
  const auto build = build_reference_library(std::span(&frame, 1), labels, 100);
  EXPECT_TRUE(build.library.of(ObjectClass::Car).empty());
  EXPECT_EQ(build.report.rejected_sparse[0], 1u);
}

TEST(Library, TemplatesAreLocalAndSorted)
{
  SceneOptions options;
  options.seed = 8;
  std::vector<PointCloudFrame> frames;
  std::map<std::string, std::vector<LabeledBox>> labels;
  for (int k = 0; k < 3; ++k) {
    auto scene = make_scene(options, "s" + std::to_string(k));
    labels[scene.frame.frame_id] = scene.labels;
    frames.push_back(std::move(scene.frame));
  }
  const auto build = build_reference_library(frames, labels, 20);
  for (ObjectClass c : kAllClasses) {
    const auto & list = build.library.of(c);
    EXPECT_FALSE(list.empty());
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i > 0) {
        EXPECT_GE(list[i - 1].point_count(), list[i].point_count());
      }
      for (const Point & p : list[i].points) {
        EXPECT_LE(std::abs(p.x), 0.5 * list[i].length);
        EXPECT_LE(std::abs(p.y), 0.5 * list[i].width);
        EXPECT_LE(std::abs(p.z), 0.5 * list[i].height);
      }
    }
  }
  const auto round = library_from_bank(library_to_bank(build.library));
  for (ObjectClass c : kAllClasses) {
    ASSERT_EQ(round.of(c).size(), build.library.of(c).size());
    for (std::size_t i = 0; i < round.of(c).size(); ++i) {
      EXPECT_EQ(round.of(c)[i].points, build.library.of(c)[i].points);
    }
  }
}

TEST(Library, BankWithWorldEntriesIsRejected)
{
  ObjectBank bank;
  bank.bank_id = BankId::Reference;
  bank.entries.push_back({0, ObjectClass::Car, kCarBox, {}, "f", false});
  EXPECT_THROW(library_from_bank(bank), IntegrityError);
}

TEST(Denoise, BoxAtThresholdIsUntouched)
{
  const auto library = dense_library();
  PointCloudFrame frame{"t", fill(kCarBox, 50, 5)};
  const std::vector<LabeledBox> labels{{kCarBox, ObjectClass::Car, 0.8}};
  const auto r = denoise_labels(frame, labels, library, {});
  EXPECT_EQ(r.frame.points, frame.points);
  EXPECT_EQ(r.report.per_class[0].untouched_boxes, 1u);
  EXPECT_EQ(r.labels, labels);
}

TEST(Denoise, EmptyBoxIsCountedAndUntouched)
{
  const auto library = dense_library();
  PointCloudFrame frame{"t", fill(kPedBox, 5, 6)};
  const std::vector<LabeledBox> labels{{kCarBox, ObjectClass::Car, 0.8}};
  const auto r = denoise_labels(frame, labels, library, {});
  EXPECT_EQ(r.frame.points, frame.points);
  EXPECT_EQ(r.report.per_class[0].empty_boxes, 1u);
}

TEST(Denoise, SparsePedestrianStaysOnRays)
{
  const auto library = dense_library();
  PointCloudFrame frame{"t", fill(kPedBox, 5, 7)};
  const std::vector<LabeledBox> labels{{kPedBox, ObjectClass::Pedestrian, 0.6}};
  DenoiseOptions options;
  const auto r = denoise_labels(frame, labels, library, options);
  ASSERT_EQ(r.frame.points.size(), 5u);
  EXPECT_EQ(r.report.per_class[1].rewritten_points, 5u);
  const Box3D grown = inflate(kPedBox, options.containment_margin);
  for (std::size_t i = 0; i < 5; ++i) {
    const Vec3 in = frame.points[i].position();
    const Vec3 out = r.frame.points[i].position();
    EXPECT_LE(norm(cross(out, in)) / norm(in), 1e-6 * norm(out));
    EXPECT_GT(dot(out, in), 0.0);
    EXPECT_EQ(r.frame.points[i].intensity, frame.points[i].intensity);
    EXPECT_TRUE(contains(grown, out));
  }
  EXPECT_EQ(r.report.containment_violations, 0u);
}

TEST(Denoise, MissingTemplateIsReported)
{
  const auto library = dense_library();
  const Box3D bike{6.0, 6.0, -0.95, 1.8, 0.7, 1.6, 0.0};
  PointCloudFrame frame{"t", fill(bike, 4, 8)};
  const auto r = denoise_labels(frame, std::vector<LabeledBox>{{bike, ObjectClass::Bike, 0.5}}, library, {});
  EXPECT_EQ(r.frame.points, frame.points);
  EXPECT_EQ(r.report.per_class[2].failed_boxes, 1u);
  EXPECT_EQ(r.report.errors.size(), 1u);
}

TEST(Denoise, DensePointsWinOverlaps)
{
  const auto library = dense_library();
  PointCloudFrame frame{"t", fill(kCarBox, 60, 9)};
  Box3D overlapping = kCarBox;
  overlapping.cx += 1.0;
  // The sparse box comes first in label order; the dense box still keeps every shared point.
  const std::vector<LabeledBox> labels{{overlapping, ObjectClass::Pedestrian, 0.5}, {kCarBox, ObjectClass::Car, 0.9}};
  DenoiseOptions options;
  options.thresholds.min_points = {50, 100, 100};
  const auto r = denoise_labels(frame, labels, library, options);
  EXPECT_EQ(r.frame.points, frame.points);
}

TEST(Projection, FixedPoint)
{
  const Vec3 p{7.25, -3.5, 0.75};
  const std::vector<Vec3> tmpl{p};
  const auto r = ray_project_point(p, tmpl, 0.1);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->position, p);
  EXPECT_FALSE(r->fallback);
}

TEST(Projection, PlaneAtTenMetres)
{
  const Vec3 dir{0.6, 0.8, 0.0};
  const Vec3 side{-0.8, 0.6, 0.0};
  std::vector<Vec3> plane;
  for (int a = -20; a <= 20; ++a) {
    for (int b = -20; b <= 20; ++b) {
      const double u = 0.01 * a;
      const double v = 0.01 * b;
      plane.push_back({10.0 * dir.x + u * side.x, 10.0 * dir.y + u * side.y, v});
    }
  }
  const Vec3 original{12.0 * dir.x, 12.0 * dir.y, 0.0};
  const auto r = ray_project_point(original, plane, 0.1);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(norm(r->position), 10.0, 1e-9);
  EXPECT_LE(norm(cross(r->position, original)) / (norm(r->position) * norm(original)), 1e-9);
}

TEST(Projection, FarTemplateFallsBackToNearestRange)
{
  const std::vector<Vec3> tmpl{{10.0, 5.0, 0.0}};
  const auto r = ray_project_point({20.0, 0.0, 0.0}, tmpl, 0.1);
  ASSERT_TRUE(r.has_value());
  EXPECT_TRUE(r->fallback);
  EXPECT_NEAR(r->position.x, std::sqrt(125.0), 1e-12);
  EXPECT_EQ(r->position.y, 0.0);
}

TEST(Projection, OriginIsDegenerate)
{
  const std::vector<Vec3> tmpl{{1.0, 0.0, 0.0}};
  EXPECT_FALSE(ray_project_point({0.0, 0.0, 0.0}, tmpl, 0.1).has_value());
}

TEST(Projection, CollinearityOverRandomCases)
{
  std::mt19937_64 engine(41);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  std::uniform_real_distribution<double> small(-1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const Vec3 p{u(engine), u(engine), small(engine)};
    std::vector<Vec3> tmpl;
    for (int k = 0; k < 30; ++k) {
      tmpl.push_back({p.x + small(engine), p.y + small(engine), p.z + small(engine)});
    }
    const auto r = ray_project_point(p, tmpl, 0.1);
    ASSERT_TRUE(r.has_value());
    EXPECT_LE(norm(cross(r->position, p)) / (norm(r->position) * norm(p)), 1e-9);
  }
}

}  // namespace
}  // namespace lidarwx
