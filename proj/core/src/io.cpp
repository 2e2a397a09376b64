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

#include "lidarwx/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "lidarwx/errors.hpp"

namespace lidarwx
{
namespace fs = std::filesystem;

namespace
{

std::uint32_t to_little_endian(std::uint32_t v)
{
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffU) << 24) | ((v & 0xff00U) << 8) | ((v >> 8) & 0xff00U) | (v >> 24);
  }
}

float load_f32(const std::byte * src)
{
  std::uint32_t raw = 0;
  std::memcpy(&raw, src, sizeof(raw));
  return std::bit_cast<float>(to_little_endian(raw));
}

void store_f32(std::byte * dst, float value)
{
  const std::uint32_t raw = to_little_endian(std::bit_cast<std::uint32_t>(value));
  std::memcpy(dst, &raw, sizeof(raw));
}

std::vector<std::string_view> split_ws(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {++i;}
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {++i;}
    if (i > start) {
      out.push_back(line.substr(start, i - start));
    }
  }
  return out;
}

std::optional<double> parse_double(std::string_view token)
{
  if (!token.empty() && token.front() == '+') {
    token.remove_prefix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    return std::nullopt;
  }
  return value;
}

template<typename Int>
std::optional<Int> parse_integer(std::string_view token)
{
  Int value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    return std::nullopt;
  }
  return value;
}

/// Parses the seven box fields starting at tokens[first].
Box3D parse_box_fields(
  const std::vector<std::string_view> & tokens, std::size_t first, std::size_t line_no,
  std::size_t & normalized_yaws)
{
  std::array<double, 7> v{};
  for (std::size_t k = 0; k < 7; ++k) {
    const auto parsed = parse_double(tokens[first + k]);
    if (!parsed) {
      throw ParseError("line " + std::to_string(line_no) + ": invalid number '" +
                       std::string(tokens[first + k]) + "'", line_no);
    }
    if (!std::isfinite(*parsed)) {
      throw ParseError("line " + std::to_string(line_no) + ": non-finite number '" +
                       std::string(tokens[first + k]) + "'", line_no);
    }
    v[k] = *parsed;
  }
  Box3D box{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
  if (!(box.length > 0.0 && box.width > 0.0 && box.height > 0.0)) {
    throw ParseError("line " + std::to_string(line_no) + ": box dimensions must be positive", line_no);
  }
  const double wrapped = normalize_yaw(box.yaw);
  if (wrapped != box.yaw) {
    box.yaw = wrapped;
    ++normalized_yaws;
  }
  return box;
}

void append_box_fields(std::string & out, const Box3D & b)
{
  for (double v : {b.cx, b.cy, b.cz, b.length, b.width, b.height, b.yaw}) {
    out += ' ';
    out += format_double(v);
  }
}

std::string read_text(const fs::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view bank_name(BankId id)
{
  switch (id) {
    case BankId::SourceGT:
      return "SourceGT";
    case BankId::SimGT:
      return "SimGT";
    case BankId::WildPseudo:
      return "WildPseudo";
    case BankId::Reference:
      return "Reference";
  }
  return "Unknown";
}

std::optional<BankId> parse_bank_id(std::string_view token)
{
  for (BankId id : {BankId::SourceGT, BankId::SimGT, BankId::WildPseudo, BankId::Reference}) {
    if (bank_name(id) == token) {
      return id;
    }
  }
  return std::nullopt;
}

CloudReadResult decode_cloud(std::span<const std::byte> bytes, std::string frame_id)
{
  if (bytes.size() % kBytesPerPoint != 0) {
    const std::size_t offset = bytes.size() - bytes.size() % kBytesPerPoint;
    throw FormatError("cloud length " + std::to_string(bytes.size()) +
                      " is not a multiple of 16 bytes; truncated record at byte offset " +
                      std::to_string(offset));
  }
  CloudReadResult result;
  result.frame.frame_id = std::move(frame_id);
  const std::size_t count = bytes.size() / kBytesPerPoint;
  result.frame.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::byte * rec = bytes.data() + i * kBytesPerPoint;
    std::array<float, 4> f{};
    for (std::size_t k = 0; k < 4; ++k) {
      f[k] = load_f32(rec + 4 * k);
      if (!std::isfinite(f[k])) {
        throw FormatError("non-finite value at byte offset " + std::to_string(i * kBytesPerPoint + 4 * k));
      }
    }
    double intensity = f[3];
    if (intensity < 0.0 || intensity > 1.0) {
      intensity = std::clamp(intensity, 0.0, 1.0);
      ++result.clamped_intensities;
    }
    result.frame.points.push_back({f[0], f[1], f[2], intensity});
  }
  return result;
}

std::vector<std::byte> encode_cloud(std::span<const Point> points)
{
  std::vector<std::byte> bytes(points.size() * kBytesPerPoint);
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::byte * rec = bytes.data() + i * kBytesPerPoint;
    const Point & p = points[i];
    store_f32(rec, static_cast<float>(p.x));
    store_f32(rec + 4, static_cast<float>(p.y));
    store_f32(rec + 8, static_cast<float>(p.z));
    store_f32(rec + 12, static_cast<float>(p.intensity));
  }
  return bytes;
}

CloudReadResult read_cloud(const fs::path & path)
{
  const auto bytes = read_file_bytes(path);
  try {
    return decode_cloud(bytes, path.stem().string());
  } catch (const FormatError & e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_cloud(const PointCloudFrame & frame, const fs::path & path)
{
  write_file_atomic(path, encode_cloud(frame.points));
}

std::string format_double(double value)
{
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), ptr);
}

LabelReadResult parse_labels(std::string_view text)
{
  LabelReadResult result;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') {
      continue;
    }
    if (tokens.size() != 8 && tokens.size() != 9) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 8 or 9 fields, got " +
                       std::to_string(tokens.size()), line_no);
    }
    const auto cls = parse_class(tokens[0]);
    if (!cls) {
      throw ParseError("line " + std::to_string(line_no) + ": unknown class '" +
                       std::string(tokens[0]) + "'", line_no);
    }
    LabeledBox label;
    label.class_id = *cls;
    label.box = parse_box_fields(tokens, 1, line_no, result.normalized_yaws);
    if (tokens.size() == 9) {
      const auto score = parse_double(tokens[8]);
      if (!score || !std::isfinite(*score)) {
        throw ParseError("line " + std::to_string(line_no) + ": invalid score '" +
                         std::string(tokens[8]) + "'", line_no);
      }
      if (*score < 0.0 || *score > 1.0) {
        throw ParseError("line " + std::to_string(line_no) + ": score outside [0, 1]", line_no);
      }
      label.score = *score;
    }
    result.labels.push_back(label);
  }
  return result;
}

std::string format_labels(std::span<const LabeledBox> labels)
{
  std::string out;
  for (const LabeledBox & label : labels) {
    out += class_name(label.class_id);
    append_box_fields(out, label.box);
    if (label.score) {
      out += ' ';
      out += format_double(*label.score);
    }
    out += '\n';
  }
  return out;
}

LabelReadResult read_labels(const fs::path & path)
{
  const std::string text = read_text(path);
  try {
    return parse_labels(text);
  } catch (const ParseError & e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

void write_labels(std::span<const LabeledBox> labels, const fs::path & path)
{
  write_file_atomic(path, format_labels(labels));
}

void save_bank(const ObjectBank & bank, const fs::path & dir)
{
  fs::create_directories(dir);
  std::set<std::uint64_t> seen;
  std::string index = "# lidarwx object bank v1\n";
  index += "bank_id ";
  index += bank_name(bank.bank_id);
  index += '\n';
  for (const BankEntry & e : bank.entries) {
    if (!seen.insert(e.object_id).second) {
      throw ConfigError("duplicate object id " + std::to_string(e.object_id));
    }
    const bool bad_frame_id = std::any_of(e.source_frame_id.begin(), e.source_frame_id.end(),
        [](unsigned char ch) {return std::isspace(ch) != 0;});
    if (bad_frame_id || e.source_frame_id == "-") {
      throw ConfigError("source frame id '" + e.source_frame_id + "' cannot be stored in a bank index");
    }
    const auto bytes = encode_cloud(e.points);
    write_file_atomic(dir / ("obj_" + std::to_string(e.object_id) + ".bin"), bytes);
    index += std::to_string(e.object_id);
    index += ' ';
    index += class_name(e.class_id);
    append_box_fields(index, e.box);
    index += ' ';
    index += std::to_string(e.points.size());
    index += ' ';
    index += e.source_frame_id.empty() ? std::string("-") : e.source_frame_id;
    index += e.local ? " local=true" : " local=false";
    index += " fnv=" + hex64(fnv1a64(bytes)) + "\n";
  }
  write_file_atomic(dir / "index.txt", index);
}

ObjectBank load_bank(const fs::path & dir)
{
  const fs::path index_path = dir / "index.txt";
  if (!fs::exists(index_path)) {
    throw IntegrityError("bank index missing: " + index_path.string());
  }
  const std::string text = read_text(index_path);
  ObjectBank bank;
  bool have_header = false;
  std::set<std::uint64_t> seen;
  std::size_t line_no = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') {
      continue;
    }
    if (!have_header) {
      if (tokens.size() != 2 || tokens[0] != "bank_id") {
        throw ParseError("bank index line " + std::to_string(line_no) + ": expected 'bank_id <name>'", line_no);
      }
      const auto id = parse_bank_id(tokens[1]);
      if (!id) {
        throw ParseError("bank index line " + std::to_string(line_no) + ": unknown bank id '" +
                         std::string(tokens[1]) + "'", line_no);
      }
      bank.bank_id = *id;
      have_header = true;
      continue;
    }
    if (tokens.size() != 13) {
      throw ParseError("bank index line " + std::to_string(line_no) + ": expected 13 fields", line_no);
    }
    BankEntry entry;
    const auto object_id = parse_integer<std::uint64_t>(tokens[0]);
    if (!object_id) {
      throw ParseError("bank index line " + std::to_string(line_no) + ": invalid object id", line_no);
    }
    entry.object_id = *object_id;
    if (!seen.insert(entry.object_id).second) {
      throw IntegrityError("object " + std::to_string(entry.object_id) + ": duplicate id in index");
    }
    const auto cls = parse_class(tokens[1]);
    if (!cls) {
      throw ParseError("bank index line " + std::to_string(line_no) + ": unknown class", line_no);
    }
    entry.class_id = *cls;
    std::size_t unused = 0;
    entry.box = parse_box_fields(tokens, 2, line_no, unused);
    const auto count = parse_integer<std::size_t>(tokens[9]);
    if (!count) {
      throw ParseError("bank index line " + std::to_string(line_no) + ": invalid point count", line_no);
    }
    entry.source_frame_id = tokens[10] == "-" ? std::string() : std::string(tokens[10]);
    if (tokens[11] == "local=true") {
      entry.local = true;
    } else if (tokens[11] != "local=false") {
      throw ParseError("bank index line " + std::to_string(line_no) + ": expected local=true|false", line_no);
    }
    if (tokens[12].substr(0, 4) != "fnv=" || tokens[12].size() != 20) {
      throw ParseError("bank index line " + std::to_string(line_no) + ": expected fnv=<16 hex digits>", line_no);
    }

    const fs::path obj_path = dir / ("obj_" + std::to_string(entry.object_id) + ".bin");
    std::error_code ec;
    const auto size = fs::file_size(obj_path, ec);
    if (ec) {
      throw IntegrityError("object " + std::to_string(entry.object_id) + ": missing file " + obj_path.string());
    }
    if (size != *count * kBytesPerPoint) {
      throw IntegrityError("object " + std::to_string(entry.object_id) + ": index lists " +
                           std::to_string(*count) + " points but file holds " + std::to_string(size) + " bytes");
    }
    const auto bytes = read_file_bytes(obj_path);
    if ("fnv=" + hex64(fnv1a64(bytes)) != tokens[12]) {
      throw IntegrityError("object " + std::to_string(entry.object_id) + ": checksum mismatch in " + obj_path.string());
    }
    auto decoded = decode_cloud(bytes);
    if (decoded.clamped_intensities != 0) {
      throw IntegrityError("object " + std::to_string(entry.object_id) + ": intensity outside [0, 1]");
    }
    entry.points = std::move(decoded.frame.points);
    bank.entries.push_back(std::move(entry));
  }
  if (!have_header) {
    throw ParseError("bank index has no bank_id line: " + index_path.string(), 0);
  }
  return bank;
}

DatasetLayout DatasetLayout::scan(
  const fs::path & cloud_dir, const std::optional<fs::path> & label_dir, bool require_labels)
{
  if (!fs::is_directory(cloud_dir)) {
    throw ConfigError("not a directory: " + cloud_dir.string());
  }
  if (label_dir && !fs::is_directory(*label_dir)) {
    throw ConfigError("not a directory: " + label_dir->string());
  }
  std::map<std::string, FrameFiles> by_id;
  for (const auto & item : fs::directory_iterator(cloud_dir)) {
    if (item.is_regular_file() && item.path().extension() == ".bin") {
      const std::string id = item.path().stem().string();
      by_id[id] = FrameFiles{id, item.path(), std::nullopt};
    }
  }
  if (label_dir) {
    for (const auto & item : fs::directory_iterator(*label_dir)) {
      if (item.is_regular_file() && item.path().extension() == ".txt") {
        const std::string id = item.path().stem().string();
        auto it = by_id.find(id);
        if (it == by_id.end()) {
          throw ConfigError("label file without cloud for frame " + id);
        }
        it->second.labels = item.path();
      }
    }
  }
  DatasetLayout layout;
  layout.root = cloud_dir.parent_path();
  for (auto & [id, files] : by_id) {
    if (require_labels && !files.labels) {
      throw ConfigError("missing label file for frame " + id);
    }
    layout.frames.push_back(std::move(files));
  }
  return layout;
}

DatasetLayout DatasetLayout::open(const fs::path & root, const std::string & split)
{
  const fs::path base = root / split;
  const fs::path labels = base / "labels";
  DatasetLayout layout = scan(
    base / "clouds", fs::is_directory(labels) ? std::optional<fs::path>(labels) : std::nullopt, false);
  layout.root = root;
  layout.split = split;
  return layout;
}

std::vector<std::byte> read_file_bytes(const fs::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char *>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw IoError("short read on " + path.string());
  }
  return bytes;
}

void write_file_atomic(const fs::path & path, std::span<const std::byte> bytes)
{
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot write " + tmp.string());
    }
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw IoError("write failed on " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

void write_file_atomic(const fs::path & path, std::string_view text)
{
  write_file_atomic(path, std::as_bytes(std::span<const char>(text.data(), text.size())));
}

std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t seed)
{
  std::uint64_t h = seed;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed)
{
  return fnv1a64(std::as_bytes(std::span<const char>(text.data(), text.size())), seed);
}

std::string hex64(std::uint64_t value)
{
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

}  // namespace lidarwx
