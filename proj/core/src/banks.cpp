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

#include "lidarwx/banks.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lidarwx/errors.hpp"
#include "lidarwx/eval.hpp"
#include "lidarwx/parallel.hpp"
#include "lidarwx/random.hpp"

namespace lidarwx
{
namespace fs = std::filesystem;

std::string_view set_name(SetId id)
{
  switch (id) {
    case SetId::Source:
      return "source";
    case SetId::Sim:
      return "sim";
    case SetId::Wild:
      return "wild";
  }
  return "unknown";
}

std::optional<SetId> parse_set_id(std::string_view token)
{
  for (SetId id : kAllSets) {
    if (set_name(id) == token) {
      return id;
    }
  }
  return std::nullopt;
}

BankId bank_for_set(SetId id)
{
  switch (id) {
    case SetId::Source:
      return BankId::SourceGT;
    case SetId::Sim:
      return BankId::SimGT;
    case SetId::Wild:
      return BankId::WildPseudo;
  }
  return BankId::SourceGT;
}

BankBuild build_bank(
  std::span<const PointCloudFrame> frames,
  const std::map<std::string, std::vector<LabeledBox>> & labels_by_frame, BankId bank_id)
{
  BankBuild build;
  build.bank.bank_id = bank_id;
  std::uint64_t next_id = 0;
  for (const PointCloudFrame & frame : frames) {
    const auto it = labels_by_frame.find(frame.frame_id);
    if (it == labels_by_frame.end()) {
      throw ConfigError("no labels for frame " + frame.frame_id);
    }
    for (const LabeledBox & label : it->second) {
      const auto members = points_in_box(frame, label.box);
      if (members.empty()) {
        ++build.report.skipped_empty;
        continue;
      }
      BankEntry entry;
      entry.object_id = next_id++;
      entry.class_id = label.class_id;
      entry.box = label.box;
      entry.source_frame_id = frame.frame_id;
      entry.points.reserve(members.size());
      for (std::size_t idx : members) {
        entry.points.push_back(frame.points[idx]);
      }
      build.bank.entries.push_back(std::move(entry));
    }
  }
  build.report.entries = build.bank.entries.size();
  return build;
}

void SamplerConfig::validate() const
{
  if (max_attempts < 1) {
    throw ConfigError("sampler max_attempts must be >= 1");
  }
}

SampledFrame sample_into_frame(
  const PointCloudFrame & frame, std::span<const LabeledBox> labels, const ObjectBank & bank,
  const SamplerConfig & config)
{
  config.validate();
  SampledFrame out;
  out.labels.assign(labels.begin(), labels.end());
  if (bank.entries.empty()) {
    out.frame = frame;
    return out;
  }

  Engine engine(derive_seed(config.seed, frame.frame_id));
  std::vector<bool> removed(frame.points.size(), false);
  std::vector<const BankEntry *> accepted;

  for (ObjectClass c : kAllClasses) {
    std::vector<const BankEntry *> pool;
    for (const BankEntry & e : bank.entries) {
      if (e.class_id == c && !e.points.empty()) {
        pool.push_back(&e);
      }
    }
    const std::size_t target = config.per_class[class_index(c)];
    for (std::size_t n = 0; n < target; ++n) {
      bool placed = false;
      for (std::size_t attempt = 0; attempt < config.max_attempts && !pool.empty(); ++attempt) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const std::size_t k = pick(engine);
        const BankEntry * candidate = pool[k];
        // Each entry is drawn at most once per frame, accepted or not.
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
        const bool collides = std::any_of(out.labels.begin(), out.labels.end(),
          [&](const LabeledBox & existing) {return iou_bev(existing.box, candidate->box) > 0.0;});
        if (collides) {
          continue;
        }
        for (std::size_t idx : points_in_box(frame, candidate->box)) {
          if (!removed[idx]) {
            removed[idx] = true;
            ++out.report.removed_points;
          }
        }
        out.inserted.push_back({out.labels.size(), bank.bank_id, candidate->object_id});
        out.labels.push_back({candidate->box, candidate->class_id, std::nullopt});
        accepted.push_back(candidate);
        ++out.report.inserted[class_index(c)];
        placed = true;
        break;
      }
      if (!placed) {
        ++out.report.unplaced[class_index(c)];
      }
    }
  }

  out.frame.frame_id = frame.frame_id;
  out.frame.points.reserve(frame.points.size());
  for (std::size_t i = 0; i < frame.points.size(); ++i) {
    if (!removed[i]) {
      out.frame.points.push_back(frame.points[i]);
    }
  }
  for (const BankEntry * e : accepted) {
    out.frame.points.insert(out.frame.points.end(), e->points.begin(), e->points.end());
  }
  return out;
}

void AugmentConfig::validate() const
{
  if (!(flip_x_prob >= 0.0 && flip_x_prob <= 1.0) || !(flip_y_prob >= 0.0 && flip_y_prob <= 1.0)) {
    throw ConfigError("flip probabilities must lie in [0, 1]");
  }
  if (!(max_rotation >= 0.0 && max_rotation <= kPi)) {
    throw ConfigError("max_rotation must lie in [0, pi]");
  }
}

GlobalTransform draw_global_transform(const AugmentConfig & config, std::string_view key)
{
  Engine engine(derive_seed(config.seed, key));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GlobalTransform t;
  const double ux = unit(engine);
  const double uy = unit(engine);
  const double ur = unit(engine);
  t.flip_x = ux < config.flip_x_prob;
  t.flip_y = uy < config.flip_y_prob;
  t.rotation = config.max_rotation > 0.0 ? (2.0 * ur - 1.0) * config.max_rotation : 0.0;
  return t;
}

AnnotatedFrame apply_global_transform(
  const PointCloudFrame & frame, std::span<const LabeledBox> labels, const GlobalTransform & transform)
{
  AnnotatedFrame current{frame, std::vector<LabeledBox>(labels.begin(), labels.end())};
  if (transform.flip_x) {
    current = flip_frame(current.frame, current.labels, FlipAxis::X);
  }
  if (transform.flip_y) {
    current = flip_frame(current.frame, current.labels, FlipAxis::Y);
  }
  if (transform.rotation != 0.0) {
    current = rotate_frame_z(current.frame, current.labels, transform.rotation);
  }
  return current;
}

AugmentedFrame augment_frame(
  SetId set, const PointCloudFrame & frame, std::span<const LabeledBox> labels, const ObjectBank & bank,
  const SamplerConfig & sampler, const AugmentConfig & augment)
{
  if (bank.bank_id != bank_for_set(set)) {
    throw ConfigError("set " + std::string(set_name(set)) + " cannot sample from bank " +
                      std::string(bank_name(bank.bank_id)));
  }
  augment.validate();
  SamplerConfig keyed = sampler;
  keyed.seed = derive_seed(sampler.seed, set_name(set));
  SampledFrame sampled = sample_into_frame(frame, labels, bank, keyed);

  AugmentConfig keyed_aug = augment;
  keyed_aug.seed = derive_seed(augment.seed, set_name(set));
  const GlobalTransform transform = draw_global_transform(keyed_aug, frame.frame_id);
  AnnotatedFrame moved = apply_global_transform(sampled.frame, sampled.labels, transform);

  AugmentedFrame out;
  out.frame = std::move(moved.frame);
  out.labels = std::move(moved.labels);
  out.inserted = std::move(sampled.inserted);
  out.report = sampled.report;
  return out;
}

std::string format_manifest(std::span<const ManifestEntry> entries)
{
  std::string out;
  for (const auto & e : entries) {
    out += set_name(e.set);
    out += ' ';
    out += e.frame_id;
    out += ' ';
    out += e.cloud_path;
    out += ' ';
    out += e.label_path;
    out += '\n';
  }
  return out;
}

std::vector<ManifestEntry> parse_manifest(const std::string & text)
{
  std::vector<ManifestEntry> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::istringstream fields(line);
    std::string set, frame_id, cloud, label, extra;
    if (!(fields >> set >> frame_id >> cloud >> label) || (fields >> extra)) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": expected 4 fields", line_no);
    }
    const auto id = parse_set_id(set);
    if (!id) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": unknown set '" + set + "'", line_no);
    }
    entries.push_back({*id, frame_id, cloud, label});
  }
  return entries;
}

SetOutput augment_set(
  const SetInput & input, const AugmentConfig & augment, const fs::path & out_dir, std::size_t length,
  std::size_t jobs)
{
  if (input.bank.bank_id != bank_for_set(input.set)) {
    throw ConfigError("set " + std::string(set_name(input.set)) + " cannot sample from bank " +
                      std::string(bank_name(input.bank.bank_id)));
  }
  if (length > 0 && input.frames.empty()) {
    throw ConfigError("set " + std::string(set_name(input.set)) + " has no frames");
  }
  input.sampler.validate();
  augment.validate();

  const std::string set_dir = std::string(set_name(input.set));
  fs::create_directories(out_dir / set_dir / "clouds");
  fs::create_directories(out_dir / set_dir / "labels");

  std::vector<std::string> out_ids(length);
  std::vector<SampleReport> reports(length);
  std::vector<std::string> provenance(length);

  parallel_for(length, jobs, [&](std::size_t j) {
      const FrameFiles & files = input.frames[j % input.frames.size()];
      const std::size_t repetition = j / input.frames.size();
      std::string out_id = files.frame_id;
      if (repetition > 0) {
        out_id += "_r" + std::to_string(repetition);
      }
      if (!files.labels) {
        throw ConfigError("missing label file for frame " + files.frame_id);
      }
      PointCloudFrame frame = read_cloud(files.cloud).frame;
      frame.frame_id = out_id;
      const auto labels = read_labels(*files.labels).labels;
      const AugmentedFrame aug = augment_frame(input.set, frame, labels, input.bank, input.sampler, augment);
      write_cloud(aug.frame, out_dir / set_dir / "clouds" / (out_id + ".bin"));
      write_labels(aug.labels, out_dir / set_dir / "labels" / (out_id + ".txt"));
      std::string prov;
      for (const InsertedObject & obj : aug.inserted) {
        prov += out_id + ' ' + std::to_string(obj.label_index) + ' ' + std::string(bank_name(obj.bank)) + ' ' +
          std::to_string(obj.object_id) + '\n';
      }
      out_ids[j] = std::move(out_id);
      reports[j] = aug.report;
      provenance[j] = std::move(prov);
    });

  SetOutput output;
  std::string prov_text;
  for (std::size_t j = 0; j < length; ++j) {
    output.manifest.push_back({input.set, out_ids[j], set_dir + "/clouds/" + out_ids[j] + ".bin",
        set_dir + "/labels/" + out_ids[j] + ".txt"});
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      output.totals.inserted[c] += reports[j].inserted[c];
      output.totals.unplaced[c] += reports[j].unplaced[c];
    }
    output.totals.removed_points += reports[j].removed_points;
    prov_text += provenance[j];
  }
  write_file_atomic(out_dir / set_dir / "provenance.txt", prov_text);
  write_file_atomic(out_dir / ("manifest_" + set_dir + ".txt"), format_manifest(output.manifest));
  return output;
}

AssembleResult assemble_wild_sam(
  std::span<const SetInput> inputs, const AugmentConfig & augment, const fs::path & out_dir, std::size_t jobs)
{
  if (inputs.size() != 3) {
    throw ConfigError("expected exactly three sets (source, sim, wild)");
  }
  std::array<bool, 3> seen{};
  std::size_t length = 0;
  for (const SetInput & in : inputs) {
    const auto k = static_cast<std::size_t>(in.set);
    if (seen[k]) {
      throw ConfigError("set " + std::string(set_name(in.set)) + " given twice");
    }
    seen[k] = true;
    if (in.bank.bank_id != bank_for_set(in.set)) {
      throw ConfigError("set " + std::string(set_name(in.set)) + " cannot sample from bank " +
                        std::string(bank_name(in.bank.bank_id)));
    }
    length = std::max(length, in.frames.size());
  }
  AssembleResult result;
  for (const SetInput & in : inputs) {
    result.sets[static_cast<std::size_t>(in.set)] = augment_set(in, augment, out_dir, length, jobs);
  }
  return result;
}

std::vector<ProvenanceRecord> parse_provenance(const std::string & text)
{
  std::vector<ProvenanceRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::istringstream fields(line);
    ProvenanceRecord rec;
    std::string bank;
    if (!(fields >> rec.frame_id >> rec.label_index >> bank >> rec.object_id)) {
      throw ParseError("provenance line " + std::to_string(line_no) + ": expected 4 fields", line_no);
    }
    const auto id = parse_bank_id(bank);
    if (!id) {
      throw ParseError("provenance line " + std::to_string(line_no) + ": unknown bank '" + bank + "'", line_no);
    }
    rec.bank = *id;
    records.push_back(rec);
  }
  return records;
}

}  // namespace lidarwx
