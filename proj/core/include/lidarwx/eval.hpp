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
/// \brief Rotated-box IoU and AP at 40 recall positions.

#ifndef LIDARWX__EVAL_HPP_
#define LIDARWX__EVAL_HPP_

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lidarwx/geometry.hpp"

namespace lidarwx
{

using Polygon2 = std::vector<std::array<double, 2>>;

/// Signed shoelace area; positive for counterclockwise polygons.
double polygon_area(const Polygon2 & polygon);

/// Sutherland-Hodgman clip of `subject` against the convex, counterclockwise `clip`.
Polygon2 clip_convex(const Polygon2 & subject, const Polygon2 & clip);

double bev_intersection_area(const Box3D & a, const Box3D & b);
double iou_bev(const Box3D & a, const Box3D & b);
double iou_3d(const Box3D & a, const Box3D & b);

enum class IouKind { Bev, ThreeD };

struct EvalConfig
{
  std::array<double, kNumClasses> iou_threshold{0.70, 0.50, 0.25};
  std::size_t recall_positions{40};
  IouKind iou_kind{IouKind::ThreeD};

  double threshold(ObjectClass c) const {return iou_threshold[class_index(c)];}
  void validate() const;
};

struct FrameDetections
{
  std::string frame_id;
  std::vector<LabeledBox> predictions;   // scored
  std::vector<LabeledBox> ground_truth;
};

using DetectionResultSet = std::vector<FrameDetections>;

/// One prediction after matching, in global score order.
struct RankedDetection
{
  double score{0.0};
  bool true_positive{false};
};

/// Greedy per-frame matching: predictions by descending score each take the
/// unmatched ground truth with the highest IoU at or above the class
/// threshold, lower ground-truth index on ties. Returns detections sorted by
/// descending score (stable on frame then prediction order).
std::vector<RankedDetection> match_detections(
  const DetectionResultSet & results, ObjectClass class_id, const EvalConfig & config);

std::size_t count_ground_truth(const DetectionResultSet & results, ObjectClass class_id);

/// Mean interpolated precision at recall k / positions for k = 1..positions,
/// times 100. Interpolated precision at r is the maximum precision over ranks
/// whose recall is at least r, zero when no rank reaches r.
double average_precision(std::span<const RankedDetection> ranked, std::size_t num_gt, std::size_t positions);

/// AP percentage; std::nullopt when the class has no ground truth. Throws
/// std::invalid_argument if a prediction of the class has no score.
std::optional<double> average_precision_r40(
  const DetectionResultSet & results, ObjectClass class_id, const EvalConfig & config);

using ClassApTable = std::array<std::optional<double>, kNumClasses>;

struct EvalSummary
{
  ClassApTable ap;
  std::array<std::size_t, kNumClasses> num_gt{};
  std::array<std::size_t, kNumClasses> num_predictions{};
};

EvalSummary evaluate(const DetectionResultSet & results, const EvalConfig & config);

/// Aligned table followed by `ap.<Class>=<value|NA>` lines.
std::string format_eval(const EvalSummary & summary, const EvalConfig & config);

/// Reads the `ap.<Class>=` lines written by format_eval.
ClassApTable parse_ap_lines(const std::string & text);

struct DomainShiftRow
{
  ObjectClass class_id{ObjectClass::Car};
  std::optional<double> source_ap;
  std::optional<double> target_ap;
  std::optional<double> delta;  // source - target
};

struct DomainShiftReport
{
  std::string source;
  std::string target;
  std::vector<DomainShiftRow> rows;  // one per class
};

/// Throws std::invalid_argument if either domain is missing.
DomainShiftReport domain_shift_report(
  const std::map<std::string, ClassApTable> & results_by_domain, const std::string & source,
  const std::string & target);

/// Aligned table (two decimals) followed by key=value lines.
std::string format_domain_shift(const DomainShiftReport & report);

}  // namespace lidarwx

#endif  // LIDARWX__EVAL_HPP_
