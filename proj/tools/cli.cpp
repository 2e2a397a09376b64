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

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "lidarwx/banks.hpp"
#include "lidarwx/config.hpp"
#include "lidarwx/denoise.hpp"
#include "lidarwx/errors.hpp"
#include "lidarwx/eval.hpp"
#include "lidarwx/io.hpp"
#include "lidarwx/parallel.hpp"
#include "lidarwx/random.hpp"
#include "lidarwx/synthetic.hpp"
#include "lidarwx/weather.hpp"

namespace lidarwx::cli
{
namespace fs = std::filesystem;

namespace
{

class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t jobs{1};
};

using Counters = std::map<std::string, std::size_t>;

fs::path absolute_normal(const fs::path & p)
{
  return fs::absolute(p).lexically_normal();
}

std::string relative_to(const fs::path & p, const fs::path & base)
{
  return absolute_normal(p).lexically_relative(absolute_normal(base)).generic_string();
}

void require_dir(const std::string & path, const char * flag)
{
  if (!fs::is_directory(path)) {
    throw UsageError(std::string(flag) + ": not a directory: " + path);
  }
}

void require_file(const std::string & path, const char * flag)
{
  if (!fs::is_regular_file(path)) {
    throw UsageError(std::string(flag) + ": no such file: " + path);
  }
}

/// Refuses output directories that coincide with or contain an input.
void require_distinct(const fs::path & out, std::initializer_list<fs::path> inputs)
{
  const fs::path o = absolute_normal(out);
  for (const fs::path & in : inputs) {
    const fs::path i = absolute_normal(in);
    const auto rel = i.lexically_relative(o).generic_string();
    if (i == o || (!rel.empty() && rel.rfind("..", 0) != 0)) {
      throw UsageError("output directory " + out.string() + " overlaps input " + in.string());
    }
  }
}

PipelineConfig resolve(const CommonOptions & common, ConfigEntries overrides)
{
  if (common.seed) {
    overrides.emplace_back("seed", std::to_string(*common.seed));
  }
  PipelineConfig config;
  if (!common.config.empty()) {
    require_file(common.config, "--config");
    config = load_config(common.config, overrides);
  } else {
    config = resolve_config({}, overrides);
  }
  config.validate();
  return config;
}

/// run_manifest.txt: what ran, on which inputs, with which config, and what it wrote.
class RunManifest
{
public:
  RunManifest(std::string subcommand, std::string provenance, const PipelineConfig & config)
  : subcommand_(std::move(subcommand)), provenance_(std::move(provenance)), seed_(config.seed),
    config_hash_(config.hash()) {}

  void add_input(const fs::path & p) {inputs_.push_back(p);}
  void add_inputs(const DatasetLayout & layout)
  {
    for (const auto & f : layout.frames) {
      add_input(f.cloud);
      if (f.labels) {
        add_input(*f.labels);
      }
    }
  }
  void set(const std::string & key, std::string value) {extra_[key] = std::move(value);}
  Counters & counters() {return counters_;}

  /// Lists every file under `out_dir` (except the manifest itself) as an output.
  void write(const fs::path & manifest_path, const fs::path & out_dir) const
  {
    const fs::path base = manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();
    std::string text;
    text += "subcommand = " + subcommand_ + "\n";
    text += "provenance = " + provenance_ + "\n";
    text += "seed = " + std::to_string(seed_) + "\n";
    text += "config_hash = " + hex64(config_hash_) + "\n";
    for (const auto & [k, v] : extra_) {
      text += k + " = " + v + "\n";
    }
    for (const auto & in : inputs_) {
      text += "input = " + relative_to(in, base) + " " + hex64(fnv1a64(read_file_bytes(in))) + "\n";
    }
    std::vector<fs::path> outputs;
    if (!out_dir.empty() && fs::is_directory(out_dir)) {
      for (const auto & item : fs::recursive_directory_iterator(out_dir)) {
        if (item.is_regular_file() && absolute_normal(item.path()) != absolute_normal(manifest_path)) {
          outputs.push_back(item.path());
        }
      }
    } else if (!out_dir.empty() && fs::is_regular_file(out_dir)) {
      outputs.push_back(out_dir);
    }
    std::vector<std::pair<std::string, fs::path>> named;
    for (const auto & p : outputs) {
      named.emplace_back(relative_to(p, base), p);
    }
    std::sort(named.begin(), named.end());
    for (const auto & [rel, p] : named) {
      text += "output = " + rel + " " + hex64(fnv1a64(read_file_bytes(p))) + "\n";
    }
    for (const auto & [k, v] : counters_) {
      text += "counter." + k + " = " + std::to_string(v) + "\n";
    }
    write_file_atomic(manifest_path, text);
  }

private:
  std::string subcommand_;
  std::string provenance_;
  std::uint64_t seed_;
  std::uint64_t config_hash_;
  std::vector<fs::path> inputs_;
  std::map<std::string, std::string> extra_;
  Counters counters_;
};

void print_counters(std::ostream & err, const std::string & subcommand, const Counters & counters)
{
  for (const auto & [k, v] : counters) {
    err << subcommand << ": " << k << " = " << v << "\n";
  }
}

std::map<std::string, std::vector<LabeledBox>> read_all_labels(const DatasetLayout & layout)
{
  std::map<std::string, std::vector<LabeledBox>> labels;
  for (const auto & f : layout.frames) {
    if (!f.labels) {
      throw UsageError("missing label file for frame " + f.frame_id);
    }
    labels[f.frame_id] = read_labels(*f.labels).labels;
  }
  return labels;
}

std::vector<PointCloudFrame> read_all_clouds(const DatasetLayout & layout, Counters & counters)
{
  std::vector<PointCloudFrame> frames;
  frames.reserve(layout.frames.size());
  for (const auto & f : layout.frames) {
    auto read = read_cloud(f.cloud);
    counters["clamped_intensities"] += read.clamped_intensities;
    frames.push_back(std::move(read.frame));
  }
  return frames;
}

void write_resolved_config(const PipelineConfig & config, const fs::path & out_dir)
{
  write_file_atomic(out_dir / "config_resolved.txt", config.canonical());
}

std::vector<double> parse_tau_list(const std::string & text)
{
  std::vector<double> taus;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size() || !(v >= 0.0)) {
      throw UsageError("--taus: invalid value '" + item + "'");
    }
    taus.push_back(v);
  }
  if (taus.empty()) {
    throw UsageError("--taus: empty list");
  }
  if (!std::is_sorted(taus.begin(), taus.end())) {
    throw UsageError("--taus: values must be ascending");
  }
  return taus;
}

BankId parse_bank_flag(const std::string & token)
{
  if (const auto set = parse_set_id(token)) {
    return bank_for_set(*set);
  }
  if (const auto id = parse_bank_id(token)) {
    return *id;
  }
  throw UsageError("--bank-id: expected source, sim or wild");
}

/// The denoiser moves points; running it on its own output would re-project.
void guard_double_denoise(const fs::path & frames_dir)
{
  for (const fs::path & candidate : {frames_dir / "run_manifest.txt", frames_dir.parent_path() / "run_manifest.txt"}) {
    if (!fs::is_regular_file(candidate)) {
      continue;
    }
    std::ifstream in(candidate);
    std::string line;
    while (std::getline(in, line)) {
      if (line == "provenance = denoised") {
        throw UsageError("frames in " + frames_dir.string() + " were already denoised (" + candidate.string() + ")");
      }
    }
  }
}

// ---------------------------------------------------------------------------

struct SynthArgs
{
  std::string out;
  std::size_t frames{4};
  std::string profile{"dense"};
  std::string prefix{"frame"};
};

int cmd_synth(const SynthArgs & a, const CommonOptions & common, std::ostream &, std::ostream & err)
{
  const PipelineConfig config = resolve(common, {});
  if (a.profile != "dense" && a.profile != "sparse") {
    throw UsageError("--profile: expected dense or sparse");
  }
  const fs::path out(a.out);
  fs::create_directories(out / "clouds");
  fs::create_directories(out / "labels");
  SceneOptions options;
  options.seed = config.seed;
  const bool sparse = a.profile == "sparse";
  if (sparse) {
    options.points_per_object = {30, 10, 10};
    options.objects = {5, 4, 4};
  }
  Counters counters;
  for (std::size_t i = 0; i < a.frames; ++i) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s_%06zu", a.prefix.c_str(), i);
    AnnotatedFrame scene = make_scene(options, id);
    if (sparse) {
      Engine engine(derive_seed(config.seed, std::string("score:") + id));
      std::uniform_real_distribution<double> unit(0.3, 0.95);
      for (auto & label : scene.labels) {
        label.score = unit(engine);
      }
    }
    write_cloud(scene.frame, out / "clouds" / (std::string(id) + ".bin"));
    write_labels(scene.labels, out / "labels" / (std::string(id) + ".txt"));
    counters["frames"] += 1;
    counters["points"] += scene.frame.points.size();
    counters["boxes"] += scene.labels.size();
  }
  RunManifest manifest("synth", sparse ? "synthetic-sparse" : "synthetic-dense", config);
  manifest.counters() = counters;
  manifest.write(out / "run_manifest.txt", out);
  print_counters(err, "synth", counters);
  return kExitOk;
}

struct SimulateArgs
{
  std::string frames;
  std::string labels;
  std::string out;
  std::optional<double> tau;
  std::string kind;
};

int cmd_simulate(const SimulateArgs & a, const CommonOptions & common, std::ostream &, std::ostream & err)
{
  ConfigEntries overrides;
  if (!a.kind.empty()) {
    overrides.emplace_back("weather.kind", a.kind);
  }
  if (a.tau) {
    overrides.emplace_back("weather.tau", format_double(*a.tau));
  }
  const PipelineConfig config = resolve(common, overrides);
  require_dir(a.frames, "--frames");
  std::optional<fs::path> label_dir;
  if (!a.labels.empty()) {
    require_dir(a.labels, "--labels");
    label_dir = a.labels;
  }
  const fs::path out(a.out);
  require_distinct(out, {a.frames});
  if (label_dir) {
    require_distinct(out, {*label_dir});
  }
  const DatasetLayout layout = DatasetLayout::scan(a.frames, label_dir, false);
  fs::create_directories(out / "clouds");
  if (label_dir) {
    fs::create_directories(out / "labels");
  }

  std::vector<SimReport> reports(layout.frames.size());
  std::vector<std::size_t> clamped(layout.frames.size(), 0);
  const std::uint64_t stream = derive_seed(config.seed, "simulate");
  parallel_for(layout.frames.size(), common.jobs, [&](std::size_t i) {
      const FrameFiles & f = layout.frames[i];
      auto read = read_cloud(f.cloud);
      clamped[i] = read.clamped_intensities;
      WeatherParams params = config.weather;
      params.seed = derive_seed(stream, f.frame_id);
      const SimResult sim = simulate_weather(read.frame, params);
      write_cloud(sim.frame, out / "clouds" / (f.frame_id + ".bin"));
      if (f.labels) {
        // Annotations stay valid under the simulation.
        write_file_atomic(out / "labels" / (f.frame_id + ".txt"), read_file_bytes(*f.labels));
      }
      reports[i] = sim.report;
    });

  SimReport total;
  Counters counters;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    total += reports[i];
    counters["clamped_intensities"] += clamped[i];
  }
  counters["frames"] = layout.frames.size();
  counters["points_in"] = total.input_points;
  counters["unchanged"] = total.unchanged;
  counters["attenuated"] = total.attenuated;
  counters["occluded"] = total.occluded;
  counters["floored"] = total.floored;

  write_resolved_config(config, out);
  RunManifest manifest("simulate", "simulated", config);
  manifest.add_inputs(layout);
  manifest.set("weather", std::string(kind_name(config.weather.kind)) + " tau=" + format_double(config.weather.tau));
  manifest.set("identity", config.weather.tau == 0.0 ? "true" : "false");
  manifest.counters() = counters;
  manifest.write(out / "run_manifest.txt", out);
  print_counters(err, "simulate", counters);
  return kExitOk;
}

struct SweepArgs
{
  std::string cloud;
  std::string taus{"5,10,20"};
  std::size_t replicas{1};
  std::string kind;
  std::string out;
};

int cmd_sweep(const SweepArgs & a, const CommonOptions & common, std::ostream & out, std::ostream & err)
{
  ConfigEntries overrides;
  if (!a.kind.empty()) {
    overrides.emplace_back("weather.kind", a.kind);
  }
  const PipelineConfig config = resolve(common, overrides);
  require_file(a.cloud, "--cloud");
  if (a.replicas < 1) {
    throw UsageError("--replicas must be >= 1");
  }
  const auto taus = parse_tau_list(a.taus);
  const auto read = read_cloud(a.cloud);
  WeatherParams base = config.weather;
  base.seed = derive_seed(config.seed, "sweep-tau");
  const auto rows = sweep_tau(read.frame, base, taus, a.replicas);
  const std::string table = format_sweep_table(rows);
  out << table;
  if (!a.out.empty()) {
    write_file_atomic(a.out, table);
    RunManifest manifest("sweep-tau", "sweep", config);
    manifest.add_input(a.cloud);
    manifest.set("taus", a.taus);
    manifest.set("replicas", std::to_string(a.replicas));
    manifest.write(fs::path(a.out + ".manifest"), fs::path(a.out));
  }
  err << "sweep-tau: rows = " << rows.size() << "\n";
  return kExitOk;
}

struct LibraryArgs
{
  std::string frames;
  std::string labels;
  std::string out;
  std::optional<std::size_t> min_points;
};

int cmd_build_library(const LibraryArgs & a, const CommonOptions & common, std::ostream &, std::ostream & err)
{
  ConfigEntries overrides;
  if (a.min_points) {
    overrides.emplace_back("library.min_points", std::to_string(*a.min_points));
  }
  const PipelineConfig config = resolve(common, overrides);
  require_dir(a.frames, "--frames");
  require_dir(a.labels, "--labels");
  const fs::path out(a.out);
  require_distinct(out, {a.frames, a.labels});
  const DatasetLayout layout = DatasetLayout::scan(a.frames, fs::path(a.labels), true);
  Counters counters;
  const auto frames = read_all_clouds(layout, counters);
  const auto labels = read_all_labels(layout);
  const LibraryBuild build = build_reference_library(frames, labels, config.library_min_points);
  save_bank(library_to_bank(build.library), out);
  for (ObjectClass c : kAllClasses) {
    const std::string name(class_name(c));
    counters["templates." + name] = build.report.templates[class_index(c)];
    counters["rejected_sparse." + name] = build.report.rejected_sparse[class_index(c)];
  }
  for (ObjectClass c : build.report.empty_classes) {
    err << "build-library: warning: no templates for class " << class_name(c) << "\n";
  }
  write_resolved_config(config, out);
  RunManifest manifest("build-library", "reference-library", config);
  manifest.add_inputs(layout);
  manifest.counters() = counters;
  manifest.write(out / "run_manifest.txt", out);
  print_counters(err, "build-library", counters);
  return kExitOk;
}

struct DenoiseArgs
{
  std::string frames;
  std::string pseudo;
  std::string library;
  std::string out;
};

int cmd_denoise(const DenoiseArgs & a, const CommonOptions & common, std::ostream &, std::ostream & err)
{
  const PipelineConfig config = resolve(common, {});
  require_dir(a.frames, "--frames");
  require_dir(a.pseudo, "--pseudo");
  require_dir(a.library, "--library");
  const fs::path out(a.out);
  require_distinct(out, {a.frames, a.pseudo, a.library});
  guard_double_denoise(a.frames);
  const ObjectBank bank = load_bank(a.library);
  if (bank.bank_id != BankId::Reference) {
    throw UsageError("--library: bank " + a.library + " is not a reference library");
  }
  const ReferenceLibrary library = library_from_bank(bank);
  const DatasetLayout layout = DatasetLayout::scan(a.frames, fs::path(a.pseudo), true);
  fs::create_directories(out / "clouds");
  fs::create_directories(out / "labels");

  std::vector<DenoiseReport> reports(layout.frames.size());
  parallel_for(layout.frames.size(), common.jobs, [&](std::size_t i) {
      const FrameFiles & f = layout.frames[i];
      const auto frame = read_cloud(f.cloud).frame;
      const auto labels = read_labels(*f.labels).labels;
      DenoiseResult result = denoise_labels(frame, labels, library, config.denoise);
      write_cloud(result.frame, out / "clouds" / (f.frame_id + ".bin"));
      write_labels(result.labels, out / "labels" / (f.frame_id + ".txt"));
      for (auto & e : result.report.errors) {
        e = f.frame_id + ": " + e;
      }
      reports[i] = std::move(result.report);
    });

  Counters counters;
  counters["frames"] = layout.frames.size();
  for (const auto & r : reports) {
    for (ObjectClass c : kAllClasses) {
      const std::string name(class_name(c));
      const auto & pc = r.per_class[class_index(c)];
      counters["untouched_boxes." + name] += pc.untouched_boxes;
      counters["empty_boxes." + name] += pc.empty_boxes;
      counters["rewritten_boxes." + name] += pc.rewritten_boxes;
      counters["rewritten_points." + name] += pc.rewritten_points;
      counters["fallback_points." + name] += pc.fallback_points;
      counters["failed_boxes." + name] += pc.failed_boxes;
    }
    counters["degenerate_points"] += r.degenerate_points;
    counters["containment_violations"] += r.containment_violations;
    for (const auto & e : r.errors) {
      err << "denoise: error: " << e << "\n";
    }
  }
  write_resolved_config(config, out);
  RunManifest manifest("denoise", "denoised", config);
  manifest.add_inputs(layout);
  manifest.add_input(fs::path(a.library) / "index.txt");
  manifest.counters() = counters;
  manifest.write(out / "run_manifest.txt", out);
  print_counters(err, "denoise", counters);
  return kExitOk;
}

struct BankArgs
{
  std::string frames;
  std::string labels;
  std::string bank_id;
  std::string out;
};

int cmd_build_bank(const BankArgs & a, const CommonOptions & common, std::ostream &, std::ostream & err)
{
  const PipelineConfig config = resolve(common, {});
  const BankId id = parse_bank_flag(a.bank_id);
  require_dir(a.frames, "--frames");
  require_dir(a.labels, "--labels");
  const fs::path out(a.out);
  require_distinct(out, {a.frames, a.labels});
  const DatasetLayout layout = DatasetLayout::scan(a.frames, fs::path(a.labels), true);
  Counters counters;
  const auto frames = read_all_clouds(layout, counters);
  const auto labels = read_all_labels(layout);
  const BankBuild build = build_bank(frames, labels, id);
  save_bank(build.bank, out);
  counters["entries"] = build.report.entries;
  counters["skipped_empty"] = build.report.skipped_empty;
  RunManifest manifest("build-bank", std::string("bank:") + std::string(bank_name(id)), config);
  manifest.add_inputs(layout);
  manifest.counters() = counters;
  manifest.write(out / "run_manifest.txt", out);
  print_counters(err, "build-bank", counters);
  return kExitOk;
}

SetInput load_set(SetId set, const fs::path & dataset_dir, const fs::path & bank_dir, const PipelineConfig & config)
{
  SetInput input;
  input.set = set;
  input.frames = DatasetLayout::scan(dataset_dir / "clouds", dataset_dir / "labels", true).frames;
  input.bank = load_bank(bank_dir);
  if (input.bank.bank_id != bank_for_set(set)) {
    throw UsageError("bank " + bank_dir.string() + " holds " + std::string(bank_name(input.bank.bank_id)) +
                     " objects; set " + std::string(set_name(set)) + " requires " +
                     std::string(bank_name(bank_for_set(set))));
  }
  input.sampler = config.sampler(set);
  input.sampler.seed = derive_seed(config.seed, "sampler");
  return input;
}

AugmentConfig augment_config(const PipelineConfig & config)
{
  AugmentConfig aug = config.augment;
  aug.seed = derive_seed(config.seed, "augment");
  return aug;
}

void add_set_counters(Counters & counters, SetId set, const SetOutput & output)
{
  const std::string prefix = std::string(set_name(set)) + ".";
  counters[prefix + "frames"] = output.manifest.size();
  for (ObjectClass c : kAllClasses) {
    counters[prefix + "inserted." + std::string(class_name(c))] = output.totals.inserted[class_index(c)];
    counters[prefix + "unplaced." + std::string(class_name(c))] = output.totals.unplaced[class_index(c)];
  }
  counters[prefix + "removed_points"] = output.totals.removed_points;
}

struct AugmentArgs
{
  std::string set;
  std::string bank;
  std::string frames;
  std::string labels;
  std::string out;
  std::optional<std::size_t> length;
};

int cmd_augment(const AugmentArgs & a, const CommonOptions & common, std::ostream &, std::ostream & err)
{
  const PipelineConfig config = resolve(common, {});
  const auto set = parse_set_id(a.set);
  if (!set) {
    throw UsageError("--set: expected source, sim or wild");
  }
  require_dir(a.bank, "--bank");
  require_dir(a.frames, "--frames");
  require_dir(a.labels, "--labels");
  const fs::path out(a.out);
  require_distinct(out, {a.bank, a.frames, a.labels});
  SetInput input;
  input.set = *set;
  const DatasetLayout layout = DatasetLayout::scan(a.frames, fs::path(a.labels), true);
  input.frames = layout.frames;
  input.bank = load_bank(a.bank);
  if (input.bank.bank_id != bank_for_set(*set)) {
    throw UsageError("--bank holds " + std::string(bank_name(input.bank.bank_id)) + " objects; set " + a.set +
                     " requires " + std::string(bank_name(bank_for_set(*set))));
  }
  input.sampler = config.sampler(*set);
  input.sampler.seed = derive_seed(config.seed, "sampler");
  fs::create_directories(out);
  const SetOutput output = augment_set(input, augment_config(config), out, a.length.value_or(layout.frames.size()),
    common.jobs);
  Counters counters;
  add_set_counters(counters, *set, output);
  write_resolved_config(config, out);
  RunManifest manifest("augment", "augmented:" + a.set, config);
  manifest.add_inputs(layout);
  manifest.add_input(fs::path(a.bank) / "index.txt");
  manifest.counters() = counters;
  manifest.write(out / "run_manifest.txt", out);
  print_counters(err, "augment", counters);
  return kExitOk;
}

struct AssembleArgs
{
  std::string source;
  std::string sim;
  std::string wild;
  std::string source_bank;
  std::string sim_bank;
  std::string wild_bank;
  std::string out;
};

int cmd_assemble(const AssembleArgs & a, const CommonOptions & common, std::ostream &, std::ostream & err)
{
  const PipelineConfig config = resolve(common, {});
  for (const auto & [path, flag] : {std::pair{a.source, "--source"}, {a.sim, "--sim"}, {a.wild, "--wild"},
      {a.source_bank, "--source-bank"}, {a.sim_bank, "--sim-bank"}, {a.wild_bank, "--wild-bank"}})
  {
    require_dir(path, flag);
  }
  const fs::path out(a.out);
  require_distinct(out, {a.source, a.sim, a.wild, a.source_bank, a.sim_bank, a.wild_bank});
  std::vector<SetInput> inputs;
  inputs.push_back(load_set(SetId::Source, a.source, a.source_bank, config));
  inputs.push_back(load_set(SetId::Sim, a.sim, a.sim_bank, config));
  inputs.push_back(load_set(SetId::Wild, a.wild, a.wild_bank, config));
  fs::create_directories(out);
  const AssembleResult result = assemble_wild_sam(inputs, augment_config(config), out, common.jobs);
  Counters counters;
  for (SetId s : kAllSets) {
    add_set_counters(counters, s, result.sets[static_cast<std::size_t>(s)]);
  }
  write_resolved_config(config, out);
  RunManifest manifest("assemble", "wild-sam", config);
  for (const auto & in : inputs) {
    for (const auto & f : in.frames) {
      manifest.add_input(f.cloud);
      manifest.add_input(*f.labels);
    }
  }
  for (const auto & bank : {a.source_bank, a.sim_bank, a.wild_bank}) {
    manifest.add_input(fs::path(bank) / "index.txt");
  }
  manifest.counters() = counters;
  manifest.write(out / "run_manifest.txt", out);
  print_counters(err, "assemble", counters);
  return kExitOk;
}

struct EvaluateArgs
{
  std::string pred;
  std::string gt;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs & a, const CommonOptions & common, std::ostream & out, std::ostream & err)
{
  const PipelineConfig config = resolve(common, {});
  require_dir(a.pred, "--pred");
  require_dir(a.gt, "--gt");
  std::map<std::string, fs::path> gt_files;
  for (const auto & item : fs::directory_iterator(a.gt)) {
    if (item.is_regular_file() && item.path().extension() == ".txt") {
      gt_files[item.path().stem().string()] = item.path();
    }
  }
  DetectionResultSet results;
  std::size_t missing_predictions = 0;
  std::vector<fs::path> inputs;
  for (const auto & [id, path] : gt_files) {
    FrameDetections frame;
    frame.frame_id = id;
    frame.ground_truth = read_labels(path).labels;
    inputs.push_back(path);
    const fs::path pred_path = fs::path(a.pred) / (id + ".txt");
    if (fs::is_regular_file(pred_path)) {
      frame.predictions = read_labels(pred_path).labels;
      inputs.push_back(pred_path);
    } else {
      ++missing_predictions;
    }
    results.push_back(std::move(frame));
  }
  for (const auto & item : fs::directory_iterator(a.pred)) {
    if (item.is_regular_file() && item.path().extension() == ".txt" &&
      !gt_files.contains(item.path().stem().string()))
    {
      throw UsageError("prediction file without ground truth: " + item.path().string());
    }
  }
  const EvalSummary summary = evaluate(results, config.eval);
  const std::string text = format_eval(summary, config.eval);
  out << text;
  if (!a.out.empty()) {
    write_file_atomic(a.out, text);
    RunManifest manifest("evaluate", "evaluation", config);
    for (const auto & p : inputs) {
      manifest.add_input(p);
    }
    manifest.write(fs::path(a.out + ".manifest"), fs::path(a.out));
  }
  err << "evaluate: frames = " << results.size() << "\n";
  err << "evaluate: frames_without_predictions = " << missing_predictions << "\n";
  return kExitOk;
}

struct ReportArgs
{
  std::string source;
  std::string target;
  std::string source_name{"source"};
  std::string target_name{"target"};
  std::string out;
};

int cmd_report(const ReportArgs & a, const CommonOptions & common, std::ostream & out, std::ostream &)
{
  const PipelineConfig config = resolve(common, {});
  require_file(a.source, "--source");
  require_file(a.target, "--target");
  if (a.source_name == a.target_name) {
    throw UsageError("--source-name and --target-name must differ");
  }
  auto slurp = [](const std::string & p) {
      const auto bytes = read_file_bytes(p);
      return std::string(reinterpret_cast<const char *>(bytes.data()), bytes.size());
    };
  std::map<std::string, ClassApTable> domains;
  domains[a.source_name] = parse_ap_lines(slurp(a.source));
  domains[a.target_name] = parse_ap_lines(slurp(a.target));
  const std::string text = format_domain_shift(domain_shift_report(domains, a.source_name, a.target_name));
  out << text;
  if (!a.out.empty()) {
    write_file_atomic(a.out, text);
    RunManifest manifest("report", "domain-shift", config);
    manifest.add_input(a.source);
    manifest.add_input(a.target);
    manifest.write(fs::path(a.out + ".manifest"), fs::path(a.out));
  }
  return kExitOk;
}

void add_common(CLI::App * sub, CommonOptions & common)
{
  sub->add_option("--config", common.config, "key = value configuration file");
  sub->add_option("--seed", common.seed, "global seed (overrides the config file)");
  sub->add_option("--jobs", common.jobs, "worker threads over frames")->check(CLI::PositiveNumber);
}

void print_error(std::ostream & err, const char * kind, const std::string & type, const std::string & message)
{
  std::string escaped;
  for (char ch : message) {
    if (ch == '"' || ch == '\\') {
      escaped += '\\';
    }
    escaped += ch == '\n' ? ' ' : ch;
  }
  err << "error: kind=" << kind << " type=" << type << " message=\"" << escaped << "\"\n";
}

}  // namespace

int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
  CLI::App app{"LiDAR adverse-weather data pipeline", "lidarwx"};
  app.require_subcommand(1);
  CommonOptions common;

  SynthArgs synth;
  auto * synth_cmd = app.add_subcommand("synth", "write procedural frames and labels");
  synth_cmd->add_option("--out", synth.out)->required();
  synth_cmd->add_option("--frames", synth.frames);
  synth_cmd->add_option("--profile", synth.profile, "dense (source-like) or sparse (scored, target-like)");
  synth_cmd->add_option("--prefix", synth.prefix);
  add_common(synth_cmd, common);

  SimulateArgs simulate;
  auto * sim_cmd = app.add_subcommand("simulate", "apply rain/snow to clear-weather frames");
  sim_cmd->add_option("--frames", simulate.frames, "directory of .bin clouds")->required();
  sim_cmd->add_option("--labels", simulate.labels, "directory of .txt labels (copied through)");
  sim_cmd->add_option("--out", simulate.out)->required();
  sim_cmd->add_option("--tau", simulate.tau, "precipitation rate, mm/hr");
  sim_cmd->add_option("--kind", simulate.kind, "rain or snow");
  add_common(sim_cmd, common);

  SweepArgs sweep;
  auto * sweep_cmd = app.add_subcommand("sweep-tau", "survival fraction per precipitation rate");
  sweep_cmd->add_option("--cloud", sweep.cloud)->required();
  sweep_cmd->add_option("--taus", sweep.taus, "comma-separated ascending rates");
  sweep_cmd->add_option("--replicas", sweep.replicas, "seeds per rate");
  sweep_cmd->add_option("--kind", sweep.kind, "rain or snow");
  sweep_cmd->add_option("--out", sweep.out, "also write the table here");
  add_common(sweep_cmd, common);

  LibraryArgs library;
  auto * lib_cmd = app.add_subcommand("build-library", "harvest dense reference templates from ground truth");
  lib_cmd->add_option("--frames", library.frames)->required();
  lib_cmd->add_option("--labels", library.labels)->required();
  lib_cmd->add_option("--out", library.out)->required();
  lib_cmd->add_option("--min-points", library.min_points);
  add_common(lib_cmd, common);

  DenoiseArgs denoise;
  auto * den_cmd = app.add_subcommand("denoise", "rewrite points of sparse pseudo-label boxes");
  den_cmd->add_option("--frames", denoise.frames)->required();
  den_cmd->add_option("--pseudo", denoise.pseudo)->required();
  den_cmd->add_option("--library", denoise.library)->required();
  den_cmd->add_option("--out", denoise.out)->required();
  add_common(den_cmd, common);

  BankArgs bank;
  auto * bank_cmd = app.add_subcommand("build-bank", "crop labeled objects into a bank");
  bank_cmd->add_option("--frames", bank.frames)->required();
  bank_cmd->add_option("--labels", bank.labels)->required();
  bank_cmd->add_option("--bank-id", bank.bank_id, "source, sim or wild")->required();
  bank_cmd->add_option("--out", bank.out)->required();
  add_common(bank_cmd, common);

  AugmentArgs augment;
  auto * aug_cmd = app.add_subcommand("augment", "sample bank objects into one set, then flip/rotate");
  aug_cmd->add_option("--set", augment.set, "source, sim or wild")->required();
  aug_cmd->add_option("--bank", augment.bank)->required();
  aug_cmd->add_option("--frames", augment.frames)->required();
  aug_cmd->add_option("--labels", augment.labels)->required();
  aug_cmd->add_option("--out", augment.out)->required();
  aug_cmd->add_option("--length", augment.length, "output frame count (inputs are cycled)");
  add_common(aug_cmd, common);

  AssembleArgs assemble;
  auto * asm_cmd = app.add_subcommand("assemble", "augment all three sets into lockstep manifests");
  asm_cmd->add_option("--source", assemble.source, "dataset dir with clouds/ and labels/")->required();
  asm_cmd->add_option("--sim", assemble.sim)->required();
  asm_cmd->add_option("--wild", assemble.wild)->required();
  asm_cmd->add_option("--source-bank", assemble.source_bank)->required();
  asm_cmd->add_option("--sim-bank", assemble.sim_bank)->required();
  asm_cmd->add_option("--wild-bank", assemble.wild_bank)->required();
  asm_cmd->add_option("--out", assemble.out)->required();
  add_common(asm_cmd, common);

  EvaluateArgs evaluate_args;
  auto * eval_cmd = app.add_subcommand("evaluate", "AP at 40 recall positions per class");
  eval_cmd->add_option("--pred", evaluate_args.pred, "directory of scored detection files")->required();
  eval_cmd->add_option("--gt", evaluate_args.gt, "directory of ground-truth label files")->required();
  eval_cmd->add_option("--out", evaluate_args.out);
  add_common(eval_cmd, common);

  ReportArgs report;
  auto * rep_cmd = app.add_subcommand("report", "domain-shift table from two evaluate outputs");
  rep_cmd->add_option("--source", report.source)->required();
  rep_cmd->add_option("--target", report.target)->required();
  rep_cmd->add_option("--source-name", report.source_name);
  rep_cmd->add_option("--target-name", report.target_name);
  rep_cmd->add_option("--out", report.out);
  add_common(rep_cmd, common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError & e) {
    print_error(err, "usage", "ParseError", e.what());
    return kExitUsage;
  }

  try {
    if (*synth_cmd) {return cmd_synth(synth, common, out, err);}
    if (*sim_cmd) {return cmd_simulate(simulate, common, out, err);}
    if (*sweep_cmd) {return cmd_sweep(sweep, common, out, err);}
    if (*lib_cmd) {return cmd_build_library(library, common, out, err);}
    if (*den_cmd) {return cmd_denoise(denoise, common, out, err);}
    if (*bank_cmd) {return cmd_build_bank(bank, common, out, err);}
    if (*aug_cmd) {return cmd_augment(augment, common, out, err);}
    if (*asm_cmd) {return cmd_assemble(assemble, common, out, err);}
    if (*eval_cmd) {return cmd_evaluate(evaluate_args, common, out, err);}
    if (*rep_cmd) {return cmd_report(report, common, out, err);}
  } catch (const UsageError & e) {
    print_error(err, "usage", "UsageError", e.what());
    return kExitUsage;
  } catch (const ConfigError & e) {
    print_error(err, "usage", "ConfigError", e.what());
    return kExitUsage;
  } catch (const FormatError & e) {
    print_error(err, "runtime", "FormatError", e.what());
    return kExitRuntime;
  } catch (const ParseError & e) {
    print_error(err, "runtime", "ParseError", e.what());
    return kExitRuntime;
  } catch (const IntegrityError & e) {
    print_error(err, "runtime", "IntegrityError", e.what());
    return kExitRuntime;
  } catch (const std::exception & e) {
    print_error(err, "runtime", "Error", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace lidarwx::cli
