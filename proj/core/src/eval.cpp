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

#include "lidarwx/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lidarwx/io.hpp"

namespace lidarwx
{

namespace
{

double edge_side(const std::array<double, 2> & a, const std::array<double, 2> & b, const std::array<double, 2> & p)
{
  return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
}

Polygon2 bev_polygon(const Box3D & box, double ox, double oy)
{
  Box3D shifted = box;
  shifted.cx -= ox;
  shifted.cy -= oy;
  const auto corners = bev_corners(shifted);
  return Polygon2(corners.begin(), corners.end());
}

double z_overlap(const Box3D & a, const Box3D & b)
{
  const double lo = std::max(a.cz - 0.5 * a.height, b.cz - 0.5 * b.height);
  const double hi = std::min(a.cz + 0.5 * a.height, b.cz + 0.5 * b.height);
  return std::max(0.0, hi - lo);
}

double pair_iou(const Box3D & a, const Box3D & b, IouKind kind)
{
  return kind == IouKind::Bev ? iou_bev(a, b) : iou_3d(a, b);
}

std::string format_ap(const std::optional<double> & v, bool fixed)
{
  if (!v) {
    return fixed ? "N/A" : "NA";
  }
  if (!fixed) {
    return format_double(*v);
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *v);
  return buf;
}

}  // namespace

double polygon_area(const Polygon2 & polygon)
{
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto & p = polygon[i];
    const auto & q = polygon[(i + 1) % polygon.size()];
    twice += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * twice;
}

Polygon2 clip_convex(const Polygon2 & subject, const Polygon2 & clip)
{
  Polygon2 output = subject;
  for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const auto & a = clip[e];
    const auto & b = clip[(e + 1) % clip.size()];
    Polygon2 input;
    input.swap(output);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const auto & cur = input[i];
      const auto & prev = input[(i + input.size() - 1) % input.size()];
      const double s_cur = edge_side(a, b, cur);
      const double s_prev = edge_side(a, b, prev);
      const bool in_cur = s_cur >= 0.0;
      const bool in_prev = s_prev >= 0.0;
      if (in_cur != in_prev) {
        const double t = s_prev / (s_prev - s_cur);
        output.push_back({prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])});
      }
      if (in_cur) {
        output.push_back(cur);
      }
    }
  }
  return output;
}

double bev_intersection_area(const Box3D & a, const Box3D & b)
{
  // Work relative to a's center to keep the clipping well conditioned.
  const Polygon2 pa = bev_polygon(a, a.cx, a.cy);
  const Polygon2 pb = bev_polygon(b, a.cx, a.cy);
  const Polygon2 inter = clip_convex(pa, pb);
  if (inter.size() < 3) {
    return 0.0;
  }
  return std::max(0.0, polygon_area(inter));
}

namespace
{

bool same_footprint(const Box3D & a, const Box3D & b)
{
  return a.cx == b.cx && a.cy == b.cy && a.length == b.length && a.width == b.width && a.yaw == b.yaw;
}

}  // namespace

double iou_bev(const Box3D & a, const Box3D & b)
{
  if (same_footprint(a, b)) {
    return 1.0;
  }
  const double inter = bev_intersection_area(a, b);
  if (inter <= 0.0) {
    return 0.0;
  }
  const double uni = a.length * a.width + b.length * b.width - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou_3d(const Box3D & a, const Box3D & b)
{
  if (a == b) {
    return 1.0;
  }
  const double dz = z_overlap(a, b);
  if (dz <= 0.0) {
    return 0.0;
  }
  const double area = same_footprint(a, b) ? a.length * a.width : bev_intersection_area(a, b);
  const double inter = area * dz;
  if (inter <= 0.0) {
    return 0.0;
  }
  const double uni = a.volume() + b.volume() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

void EvalConfig::validate() const
{
  for (double t : iou_threshold) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw std::invalid_argument("IoU thresholds must lie in (0, 1]");
    }
  }
  if (recall_positions < 1) {
    throw std::invalid_argument("recall positions must be >= 1");
  }
}

std::size_t count_ground_truth(const DetectionResultSet & results, ObjectClass class_id)
{
  std::size_t n = 0;
  for (const auto & frame : results) {
    n += static_cast<std::size_t>(std::count_if(frame.ground_truth.begin(), frame.ground_truth.end(),
      [class_id](const LabeledBox & g) {return g.class_id == class_id;}));
  }
  return n;
}

std::vector<RankedDetection> match_detections(
  const DetectionResultSet & results, ObjectClass class_id, const EvalConfig & config)
{
  struct Keyed
  {
    RankedDetection det;
    std::size_t frame;
    std::size_t order;
  };
  std::vector<Keyed> all;
  const double threshold = config.threshold(class_id);
  for (std::size_t f = 0; f < results.size(); ++f) {
    const auto & frame = results[f];
    std::vector<const LabeledBox *> gts;
    for (const auto & g : frame.ground_truth) {
      if (g.class_id == class_id) {
        gts.push_back(&g);
      }
    }
    std::vector<const LabeledBox *> preds;
    for (const auto & p : frame.predictions) {
      if (p.class_id == class_id) {
        if (!p.score) {
          throw std::invalid_argument("prediction without score in frame " + frame.frame_id);
        }
        preds.push_back(&p);
      }
    }
    std::stable_sort(preds.begin(), preds.end(),
      [](const LabeledBox * x, const LabeledBox * y) {return *x->score > *y->score;});
    std::vector<bool> matched(gts.size(), false);
    for (std::size_t k = 0; k < preds.size(); ++k) {
      std::optional<std::size_t> best;
      double best_iou = 0.0;
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (matched[g]) {
          continue;
        }
        const double iou = pair_iou(preds[k]->box, gts[g]->box, config.iou_kind);
        if (iou >= threshold && (!best || iou > best_iou)) {
          best = g;
          best_iou = iou;
        }
      }
      if (best) {
        matched[*best] = true;
      }
      all.push_back({{*preds[k]->score, best.has_value()}, f, k});
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Keyed & x, const Keyed & y) {
      if (x.det.score != y.det.score) {
        return x.det.score > y.det.score;
      }
      return std::tie(x.frame, x.order) < std::tie(y.frame, y.order);
    });
  std::vector<RankedDetection> ranked;
  ranked.reserve(all.size());
  for (const auto & k : all) {
    ranked.push_back(k.det);
  }
  return ranked;
}

double average_precision(std::span<const RankedDetection> ranked, std::size_t num_gt, std::size_t positions)
{
  if (num_gt == 0 || positions == 0) {
    return 0.0;
  }
  // best_at[j]: highest precision among ranks with exactly j true positives.
  std::vector<double> best_at(num_gt + 1, 0.0);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].true_positive) {
      ++tp;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(i + 1);
    best_at[tp] = std::max(best_at[tp], precision);
  }
  // Suffix maximum turns it into "best precision with at least j true positives".
  for (std::size_t j = num_gt; j-- > 0;) {
    best_at[j] = std::max(best_at[j], best_at[j + 1]);
  }
  double sum = 0.0;
  for (std::size_t k = 1; k <= positions; ++k) {
    // Smallest tp count with tp / num_gt >= k / positions.
    const std::size_t need = (k * num_gt + positions - 1) / positions;
    sum += best_at[need];
  }
  return 100.0 * sum / static_cast<double>(positions);
}

std::optional<double> average_precision_r40(
  const DetectionResultSet & results, ObjectClass class_id, const EvalConfig & config)
{
  config.validate();
  const std::size_t num_gt = count_ground_truth(results, class_id);
  const auto ranked = match_detections(results, class_id, config);
  if (num_gt == 0) {
    return std::nullopt;
  }
  return average_precision(ranked, num_gt, config.recall_positions);
}

EvalSummary evaluate(const DetectionResultSet & results, const EvalConfig & config)
{
  EvalSummary summary;
  for (ObjectClass c : kAllClasses) {
    const std::size_t i = class_index(c);
    summary.ap[i] = average_precision_r40(results, c, config);
    summary.num_gt[i] = count_ground_truth(results, c);
    for (const auto & frame : results) {
      summary.num_predictions[i] += static_cast<std::size_t>(std::count_if(
        frame.predictions.begin(), frame.predictions.end(),
        [c](const LabeledBox & p) {return p.class_id == c;}));
    }
  }
  return summary;
}

std::string format_eval(const EvalSummary & summary, const EvalConfig & config)
{
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %8s %8s %10s %8s\n", "class", "num_gt", "num_det", "iou_thr", "AP_R40");
  out += line;
  for (ObjectClass c : kAllClasses) {
    const std::size_t i = class_index(c);
    std::snprintf(line, sizeof(line), "%-12s %8zu %8zu %10.2f %8s\n", std::string(class_name(c)).c_str(),
      summary.num_gt[i], summary.num_predictions[i], config.iou_threshold[i],
      format_ap(summary.ap[i], true).c_str());
    out += line;
  }
  for (ObjectClass c : kAllClasses) {
    out += "ap.";
    out += class_name(c);
    out += '=';
    out += format_ap(summary.ap[class_index(c)], false);
    out += '\n';
  }
  return out;
}

ClassApTable parse_ap_lines(const std::string & text)
{
  ClassApTable table;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("ap.", 0) != 0) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("malformed AP line: " + line);
    }
    const auto cls = parse_class(line.substr(3, eq - 3));
    if (!cls) {
      throw std::invalid_argument("unknown class in AP line: " + line);
    }
    const std::string value = line.substr(eq + 1);
    if (value == "NA") {
      table[class_index(*cls)] = std::nullopt;
      continue;
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) {
        throw std::invalid_argument(value);
      }
      table[class_index(*cls)] = v;
    } catch (const std::exception &) {
      throw std::invalid_argument("malformed AP value: " + line);
    }
  }
  return table;
}

DomainShiftReport domain_shift_report(
  const std::map<std::string, ClassApTable> & results_by_domain, const std::string & source,
  const std::string & target)
{
  const auto src = results_by_domain.find(source);
  const auto tgt = results_by_domain.find(target);
  if (src == results_by_domain.end()) {
    throw std::invalid_argument("missing domain: " + source);
  }
  if (tgt == results_by_domain.end()) {
    throw std::invalid_argument("missing domain: " + target);
  }
  DomainShiftReport report{source, target, {}};
  for (ObjectClass c : kAllClasses) {
    DomainShiftRow row;
    row.class_id = c;
    row.source_ap = src->second[class_index(c)];
    row.target_ap = tgt->second[class_index(c)];
    if (row.source_ap && row.target_ap) {
      row.delta = *row.source_ap - *row.target_ap;
    }
    report.rows.push_back(row);
  }
  return report;
}

std::string format_domain_shift(const DomainShiftReport & report)
{
  const std::string delta_header = "Delta (" + report.source + " - " + report.target + ")";
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-12s %12s %12s %24s\n", "class", report.source.c_str(),
    report.target.c_str(), delta_header.c_str());
  out += line;
  for (const auto & row : report.rows) {
    std::snprintf(line, sizeof(line), "%-12s %12s %12s %24s\n", std::string(class_name(row.class_id)).c_str(),
      format_ap(row.source_ap, true).c_str(), format_ap(row.target_ap, true).c_str(),
      format_ap(row.delta, true).c_str());
    out += line;
  }
  for (const auto & row : report.rows) {
    out += "delta.";
    out += class_name(row.class_id);
    out += '=';
    out += format_ap(row.delta, false);
    out += '\n';
  }
  return out;
}

}  // namespace lidarwx
