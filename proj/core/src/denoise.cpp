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

#include "lidarwx/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lidarwx/errors.hpp"

namespace lidarwx
{

namespace
{

/// Rounds to f32 (the on-disk precision) and steps toward zero until the
/// coordinate lies within [-half, half].
double snap_inside(double value, double half)
{
  float f = static_cast<float>(value);
  while (std::abs(static_cast<double>(f)) > half + kBoundaryTolerance) {
    f = std::nextafter(f, 0.0f);
  }
  return f;
}

}  // namespace

std::size_t ReferenceLibrary::size() const
{
  std::size_t n = 0;
  for (const auto & list : templates) {
    n += list.size();
  }
  return n;
}

LibraryBuild build_reference_library(
  std::span<const PointCloudFrame> frames,
  const std::map<std::string, std::vector<LabeledBox>> & labels_by_frame,
  std::size_t min_template_points)
{
  LibraryBuild build;
  for (const PointCloudFrame & frame : frames) {
    const auto it = labels_by_frame.find(frame.frame_id);
    if (it == labels_by_frame.end()) {
      throw ConfigError("no labels for frame " + frame.frame_id);
    }
    for (const LabeledBox & label : it->second) {
      const auto members = points_in_box(frame, label.box);
      const std::size_t ci = class_index(label.class_id);
      if (members.empty() || members.size() < min_template_points) {
        ++build.report.rejected_sparse[ci];
        continue;
      }
      Template tmpl;
      tmpl.length = label.box.length;
      tmpl.width = label.box.width;
      tmpl.height = label.box.height;
      tmpl.source_frame_id = frame.frame_id;
      tmpl.points.reserve(members.size());
      for (std::size_t idx : members) {
        const Point & p = frame.points[idx];
        const Vec3 local = to_box_local(label.box, p.position());
        tmpl.points.push_back({snap_inside(local.x, 0.5 * tmpl.length), snap_inside(local.y, 0.5 * tmpl.width),
          snap_inside(local.z, 0.5 * tmpl.height), static_cast<float>(p.intensity)});
      }
      build.library.templates[ci].push_back(std::move(tmpl));
    }
  }
  for (ObjectClass c : kAllClasses) {
    auto & list = build.library.templates[class_index(c)];
    std::stable_sort(list.begin(), list.end(), [](const Template & a, const Template & b) {
        return a.point_count() > b.point_count();
      });
    build.report.templates[class_index(c)] = list.size();
    if (list.empty()) {
      build.report.empty_classes.push_back(c);
    }
  }
  return build;
}

ObjectBank library_to_bank(const ReferenceLibrary & library)
{
  ObjectBank bank;
  bank.bank_id = BankId::Reference;
  std::uint64_t next_id = 0;
  for (ObjectClass c : kAllClasses) {
    for (const Template & t : library.of(c)) {
      BankEntry e;
      e.object_id = next_id++;
      e.class_id = c;
      e.box = Box3D{0.0, 0.0, 0.0, t.length, t.width, t.height, 0.0};
      e.points = t.points;
      e.source_frame_id = t.source_frame_id;
      e.local = true;
      bank.entries.push_back(std::move(e));
    }
  }
  return bank;
}

ReferenceLibrary library_from_bank(const ObjectBank & bank)
{
  ReferenceLibrary library;
  for (const BankEntry & e : bank.entries) {
    if (!e.local) {
      throw IntegrityError("object " + std::to_string(e.object_id) + ": library entries must be box-local");
    }
    const Box3D canonical{0.0, 0.0, 0.0, e.box.length, e.box.width, e.box.height, 0.0};
    for (const Point & p : e.points) {
      if (!contains(canonical, p.position())) {
        throw IntegrityError("object " + std::to_string(e.object_id) + ": template point outside its box");
      }
    }
    library.templates[class_index(e.class_id)].push_back(
      Template{e.box.length, e.box.width, e.box.height, e.points, e.source_frame_id});
  }
  for (auto & list : library.templates) {
    std::stable_sort(list.begin(), list.end(), [](const Template & a, const Template & b) {
        return a.point_count() > b.point_count();
      });
  }
  return library;
}

void DenoiseThresholds::validate() const
{
  for (std::size_t n : min_points) {
    if (n < 1) {
      throw std::invalid_argument("denoise thresholds must be >= 1");
    }
  }
}

std::optional<std::size_t> select_template(const ReferenceLibrary & library, ObjectClass c, const Box3D & box)
{
  const auto & list = library.of(c);
  std::optional<std::size_t> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < list.size(); ++i) {
    const double dl = list[i].length - box.length;
    const double dw = list[i].width - box.width;
    const double dh = list[i].height - box.height;
    const double dist = std::sqrt(dl * dl + dw * dw + dh * dh);
    // List is sorted by point count, so strict < keeps the denser template on ties.
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

std::vector<Vec3> place_template(const Template & tmpl, const Box3D & box)
{
  const double sx = box.length / tmpl.length;
  const double sy = box.width / tmpl.width;
  const double sz = box.height / tmpl.height;
  std::vector<Vec3> placed;
  placed.reserve(tmpl.points.size());
  for (const Point & p : tmpl.points) {
    placed.push_back(from_box_local(box, {p.x * sx, p.y * sy, p.z * sz}));
  }
  return placed;
}

std::optional<std::array<double, 2>> ray_box_interval(const Vec3 & dir, const Box3D & box)
{
  const Vec3 origin = to_box_local(box, {0.0, 0.0, 0.0});
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const std::array<double, 3> o{origin.x, origin.y, origin.z};
  const std::array<double, 3> d{c * dir.x + s * dir.y, -s * dir.x + c * dir.y, dir.z};
  const std::array<double, 3> half{0.5 * box.length, 0.5 * box.width, 0.5 * box.height};
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < 3; ++k) {
    if (d[k] == 0.0) {
      if (std::abs(o[k]) > half[k]) {
        return std::nullopt;
      }
      continue;
    }
    double t0 = (-half[k] - o[k]) / d[k];
    double t1 = (half[k] - o[k]) / d[k];
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  if (lo > hi) {
    return std::nullopt;
  }
  return std::array<double, 2>{lo, hi};
}

std::optional<Projection> ray_project_point(
  const Vec3 & original, std::span<const Vec3> placed_template, double ray_radius,
  const std::optional<Box3D> & clamp_to)
{
  const double range = norm(original);
  if (range == 0.0 || !std::isfinite(range) || placed_template.empty()) {
    return std::nullopt;
  }
  const Vec3 dir{original.x / range, original.y / range, original.z / range};

  double best_perp = std::numeric_limits<double>::infinity();
  double best_t = 0.0;
  for (const Vec3 & q : placed_template) {
    const double t = q == original ? range : dot(q, dir);
    if (t <= 0.0) {
      continue;
    }
    const Vec3 off{q.x - t * dir.x, q.y - t * dir.y, q.z - t * dir.z};
    const double perp = norm(off);
    if (perp < best_perp || (perp == best_perp && t < best_t)) {
      best_perp = perp;
      best_t = t;
    }
  }

  Projection result;
  double t = best_t;
  if (!(best_perp <= ray_radius)) {
    result.fallback = true;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const Vec3 & q : placed_template) {
      const Vec3 diff{q.x - original.x, q.y - original.y, q.z - original.z};
      const double dist = norm(diff);
      if (dist < best_dist) {
        best_dist = dist;
        t = norm(q);
      }
    }
  }
  if (clamp_to) {
    if (const auto interval = ray_box_interval(dir, *clamp_to)) {
      t = std::clamp(t, (*interval)[0], (*interval)[1]);
    }
  }
  const double scale = t / range;
  result.position = {original.x * scale, original.y * scale, original.z * scale};
  return result;
}

DenoiseResult denoise_labels(
  const PointCloudFrame & frame, std::span<const LabeledBox> pseudo_labels, const ReferenceLibrary & library,
  const DenoiseOptions & options)
{
  options.thresholds.validate();
  DenoiseResult result;
  result.frame = frame;
  result.labels.assign(pseudo_labels.begin(), pseudo_labels.end());

  const std::size_t n_points = frame.points.size();
  std::vector<std::vector<std::size_t>> members(pseudo_labels.size());
  std::vector<bool> dense(pseudo_labels.size(), false);
  std::vector<bool> frozen(n_points, false);
  for (std::size_t b = 0; b < pseudo_labels.size(); ++b) {
    members[b] = points_in_box(frame, pseudo_labels[b].box);
    if (members[b].size() >= options.thresholds.of(pseudo_labels[b].class_id)) {
      dense[b] = true;
      for (std::size_t idx : members[b]) {
        frozen[idx] = true;
      }
    }
  }

  // Ownership is fixed before any point moves.
  constexpr std::size_t kNoOwner = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> owner(n_points, kNoOwner);
  for (std::size_t b = 0; b < pseudo_labels.size(); ++b) {
    if (dense[b]) {
      continue;
    }
    for (std::size_t idx : members[b]) {
      if (!frozen[idx] && owner[idx] == kNoOwner) {
        owner[idx] = b;
      }
    }
  }

  for (std::size_t b = 0; b < pseudo_labels.size(); ++b) {
    const LabeledBox & label = pseudo_labels[b];
    ClassDenoiseCounts & counts = result.report.per_class[class_index(label.class_id)];
    if (dense[b]) {
      ++counts.untouched_boxes;
      continue;
    }
    if (members[b].empty()) {
      ++counts.empty_boxes;
      continue;
    }
    const auto chosen = select_template(library, label.class_id, label.box);
    if (!chosen) {
      ++counts.failed_boxes;
      result.report.errors.push_back("box " + std::to_string(b) + " (" + std::string(class_name(label.class_id)) +
                                     "): no reference template for class");
      continue;
    }
    const auto placed = place_template(library.of(label.class_id)[*chosen], label.box);
    const Box3D check = inflate(label.box, options.containment_margin);
    ++counts.rewritten_boxes;
    for (std::size_t idx : members[b]) {
      if (owner[idx] != b) {
        continue;
      }
      Point & p = result.frame.points[idx];
      const auto projected = ray_project_point(p.position(), placed, options.ray_radius, label.box);
      if (!projected) {
        ++result.report.degenerate_points;
        continue;
      }
      p.x = projected->position.x;
      p.y = projected->position.y;
      p.z = projected->position.z;
      ++counts.rewritten_points;
      if (projected->fallback) {
        ++counts.fallback_points;
      }
      if (!contains(check, projected->position)) {
        ++result.report.containment_violations;
      }
    }
  }
  return result;
}

}  // namespace lidarwx
