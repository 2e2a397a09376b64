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
/// \brief Pseudo-label denoising by ray-constrained projection onto dense
///        per-class templates harvested from source ground truth.

#ifndef LIDARWX__DENOISE_HPP_
#define LIDARWX__DENOISE_HPP_

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lidarwx/geometry.hpp"
#include "lidarwx/object_bank.hpp"

namespace lidarwx
{

/// A dense object sample in box-local coordinates.
struct Template
{
  double length{1.0};
  double width{1.0};
  double height{1.0};
  std::vector<Point> points;  // box-local
  std::string source_frame_id;

  std::size_t point_count() const {return points.size();}
};

struct ReferenceLibrary
{
  /// Per class, sorted by point count descending.
  std::array<std::vector<Template>, kNumClasses> templates;

  const std::vector<Template> & of(ObjectClass c) const {return templates[class_index(c)];}
  std::size_t size() const;
};

struct LibraryBuildReport
{
  std::array<std::size_t, kNumClasses> templates{};
  std::array<std::size_t, kNumClasses> rejected_sparse{};  // boxes under min_template_points
  std::vector<ObjectClass> empty_classes;
};

struct LibraryBuild
{
  ReferenceLibrary library;
  LibraryBuildReport report;
};

/// Throws ConfigError if a frame has no label entry.
LibraryBuild build_reference_library(
  std::span<const PointCloudFrame> frames,
  const std::map<std::string, std::vector<LabeledBox>> & labels_by_frame,
  std::size_t min_template_points);

/// Persisted form: bank id Reference, entries with local == true.
ObjectBank library_to_bank(const ReferenceLibrary & library);

/// Re-sorts per class; throws IntegrityError for non-local entries.
ReferenceLibrary library_from_bank(const ObjectBank & bank);

struct DenoiseThresholds
{
  std::array<std::size_t, kNumClasses> min_points{50, 20, 20};

  std::size_t of(ObjectClass c) const {return min_points[class_index(c)];}
  void validate() const;
};

struct DenoiseOptions
{
  DenoiseThresholds thresholds;
  double ray_radius{0.1};           // m, perpendicular acceptance radius
  double containment_margin{0.01};  // box inflation for the containment check
};

/// Template of the class whose (l, w, h) is nearest in Euclidean distance to
/// the box dims, higher point count on ties. Empty optional if none exists.
std::optional<std::size_t> select_template(const ReferenceLibrary & library, ObjectClass c, const Box3D & box);

/// Template points scaled per axis to the box dims and posed at the box.
std::vector<Vec3> place_template(const Template & tmpl, const Box3D & box);

struct Projection
{
  Vec3 position;
  bool fallback{false};  // no template point within the ray radius
};

/// Casts the ray from the origin through `original` and returns the point on
/// that ray at the projection parameter of the template point closest to the
/// ray (smaller parameter on ties). Without a template point within
/// `ray_radius` of the ray, uses the template point nearest `original` at its
/// own range. When `clamp_to` is given the parameter is clamped to the ray's
/// interval inside that box. The result is always original * t / |original|.
/// Empty optional for a degenerate ray or an empty template.
std::optional<Projection> ray_project_point(
  const Vec3 & original, std::span<const Vec3> placed_template, double ray_radius,
  const std::optional<Box3D> & clamp_to = std::nullopt);

/// Parameter interval [t_in, t_out] of the ray origin + t * dir inside the box.
std::optional<std::array<double, 2>> ray_box_interval(const Vec3 & dir, const Box3D & box);

struct ClassDenoiseCounts
{
  std::size_t untouched_boxes{0};   // count >= threshold
  std::size_t empty_boxes{0};
  std::size_t rewritten_boxes{0};
  std::size_t rewritten_points{0};
  std::size_t fallback_points{0};
  std::size_t failed_boxes{0};      // no template for the class
};

struct DenoiseReport
{
  std::array<ClassDenoiseCounts, kNumClasses> per_class{};
  std::size_t degenerate_points{0};
  std::size_t containment_violations{0};
  std::vector<std::string> errors;
};

struct DenoiseResult
{
  PointCloudFrame frame;
  std::vector<LabeledBox> labels;  // every input label, unchanged
  DenoiseReport report;
};

/// Rewrites the points of sparse pseudo-label boxes (0 < count < threshold).
/// Points inside a box at or above its threshold are never moved. A point
/// inside several sparse boxes belongs to the first in label order. Point
/// count, order and intensities are preserved.
DenoiseResult denoise_labels(
  const PointCloudFrame & frame, std::span<const LabeledBox> pseudo_labels, const ReferenceLibrary & library,
  const DenoiseOptions & options);

}  // namespace lidarwx

#endif  // LIDARWX__DENOISE_HPP_
