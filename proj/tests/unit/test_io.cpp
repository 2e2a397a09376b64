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

#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "lidarwx/errors.hpp"
#include "lidarwx/io.hpp"
#include "support/oracles.hpp"

namespace lidarwx
{
namespace
{

namespace fs = std::filesystem;

std::vector<std::byte> le_floats(std::initializer_list<float> values)
{
  std::vector<std::byte> out;
  for (float f : values) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int k = 0; k < 4; ++k) {
      out.push_back(static_cast<std::byte>((bits >> (8 * k)) & 0xffu));
    }
  }
  return out;
}

TEST(Cloud, EmptyBytesGiveEmptyFrame)
{
  const auto r = decode_cloud({}, "f");
  EXPECT_TRUE(r.frame.points.empty());
  EXPECT_TRUE(encode_cloud({}).empty());
}

TEST(Cloud, HandEncodedPoint)
{
  const auto bytes = le_floats({1.0f, 2.0f, 3.0f, 0.5f});
  const auto r = decode_cloud(bytes);
  ASSERT_EQ(r.frame.points.size(), 1u);
  EXPECT_EQ(r.frame.points[0], (Point{1.0, 2.0, 3.0, 0.5}));
  EXPECT_EQ(encode_cloud(r.frame.points), bytes);
}

TEST(Cloud, TwoPointsAre32Bytes)
{
  const std::vector<Point> pts{{0, 0, 0, 0}, {1, 1, 1, 1}};
  EXPECT_EQ(encode_cloud(pts).size(), 32u);
}

TEST(Cloud, TruncatedRecordIsRejected)
{
  auto bytes = le_floats({1.0f, 2.0f, 3.0f, 0.5f});
  bytes.pop_back();
  EXPECT_THROW(decode_cloud(bytes), FormatError);
}

TEST(Cloud, NonFiniteIsRejected)
{
  EXPECT_THROW(decode_cloud(le_floats({1.0f, std::nanf(""), 3.0f, 0.5f})), FormatError);
  EXPECT_THROW(decode_cloud(le_floats({1.0f, 2.0f, INFINITY, 0.5f})), FormatError);
}

TEST(Cloud, IntensityIsClampedAndCounted)
{
  const auto r = decode_cloud(le_floats({0, 0, 0, 1.5f, 0, 0, 0, -0.25f, 0, 0, 0, 0.5f}));
  EXPECT_EQ(r.clamped_intensities, 2u);
  EXPECT_EQ(r.frame.points[0].intensity, 1.0);
  EXPECT_EQ(r.frame.points[1].intensity, 0.0);
  EXPECT_EQ(r.frame.points[2].intensity, 0.5);
}

TEST(Cloud, FileRoundTripIsByteExact)
{
  const auto dir = oracle::scratch_dir("io_cloud");
  std::mt19937_64 engine(3);
  std::uniform_real_distribution<float> u(-50.0f, 50.0f);
  std::uniform_real_distribution<float> i(0.0f, 1.0f);
  std::vector<float> raw;
  for (int k = 0; k < 100; ++k) {
    raw.insert(raw.end(), {u(engine), u(engine), u(engine), i(engine)});
  }
  std::vector<std::byte> bytes;
  for (float f : raw) {
    const auto b = le_floats({f});
    bytes.insert(bytes.end(), b.begin(), b.end());
  }
  write_file_atomic(dir / "a.bin", bytes);
  const auto frame = read_cloud(dir / "a.bin");
  EXPECT_EQ(frame.frame.frame_id, "a");
  write_cloud(frame.frame, dir / "b.bin");
  EXPECT_EQ(read_file_bytes(dir / "b.bin"), bytes);
}

TEST(Labels, EmptyText)
{
  EXPECT_TRUE(parse_labels("").labels.empty());
  EXPECT_TRUE(parse_labels("\n# comment\n   \n").labels.empty());
}

TEST(Labels, ScoredLine)
{
  const auto r = parse_labels("Car 1 2 0 4 2 1.5 0.0 0.9\n");
  ASSERT_EQ(r.labels.size(), 1u);
  const auto & l = r.labels[0];
  EXPECT_EQ(l.class_id, ObjectClass::Car);
  EXPECT_EQ(l.box, (Box3D{1, 2, 0, 4, 2, 1.5, 0.0}));
  ASSERT_TRUE(l.score.has_value());
  EXPECT_EQ(*l.score, 0.9);
}

TEST(Labels, MalformedLinesNameTheLine)
{
  try {
    parse_labels("Car 1 2 0 4 2 1.5 0.0\nCar 1 2\n");
    FAIL();
  } catch (const ParseError & e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_labels("Truck 1 2 0 4 2 1.5 0.0\n"), ParseError);
  EXPECT_THROW(parse_labels("Car 1 2 0 -4 2 1.5 0.0\n"), ParseError);
  EXPECT_THROW(parse_labels("Car 1 2 0 4 2 1.5 nan\n"), ParseError);
}

TEST(Labels, OutOfRangeYawIsWrapped)
{
  const auto r = parse_labels("Bike 0 0 0 1 1 1 4.0\n");
  EXPECT_EQ(r.normalized_yaws, 1u);
  EXPECT_NEAR(r.labels[0].box.yaw, 4.0 - 2.0 * kPi, 1e-12);
}

TEST(Labels, RandomRoundTrip)
{
  std::mt19937_64 engine(5);
  std::uniform_real_distribution<double> u(-80.0, 80.0);
  std::uniform_real_distribution<double> d(0.1, 10.0);
  std::uniform_real_distribution<double> s(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LabeledBox> labels;
    for (int k = 0; k < 5; ++k) {
      LabeledBox l{{u(engine), u(engine), u(engine), d(engine), d(engine), d(engine), oracle::random_yaw(engine)},
        kAllClasses[static_cast<std::size_t>(k % 3)], std::nullopt};
      if (k % 2 == 0) {
        l.score = s(engine);
      }
      labels.push_back(l);
    }
    EXPECT_EQ(parse_labels(format_labels(labels)).labels, labels);
  }
}

ObjectBank three_object_bank()
{
  ObjectBank bank;
  bank.bank_id = BankId::SimGT;
  for (std::uint64_t id = 0; id < 3; ++id) {
    BankEntry e;
    e.object_id = id * 7;
    e.class_id = kAllClasses[id];
    e.box = {1.0 + static_cast<double>(id), 2.0, -1.0, 4.0, 2.0, 1.5, 0.25};
    e.points = {{1.0f + static_cast<double>(id), 2.0, -1.0, 0.5}, {1.5f + static_cast<double>(id), 2.25, -0.75, 0.25}};
    e.source_frame_id = "frame_" + std::to_string(id);
    bank.entries.push_back(e);
  }
  return bank;
}

TEST(Bank, EmptyRoundTrip)
{
  const auto dir = oracle::scratch_dir("io_bank_empty");
  ObjectBank bank;
  bank.bank_id = BankId::WildPseudo;
  save_bank(bank, dir);
  EXPECT_EQ(load_bank(dir), bank);
}

TEST(Bank, ThreeObjectRoundTripKeepsIndex)
{
  const auto dir = oracle::scratch_dir("io_bank_three");
  const auto bank = three_object_bank();
  save_bank(bank, dir);
  const auto index = read_file_bytes(dir / "index.txt");
  const auto loaded = load_bank(dir);
  EXPECT_EQ(loaded, bank);
  save_bank(loaded, dir);
  EXPECT_EQ(read_file_bytes(dir / "index.txt"), index);
}

TEST(Bank, FourByteCorruptionIsAnIntegrityError)
{
  const auto dir = oracle::scratch_dir("io_bank_corrupt");
  save_bank(three_object_bank(), dir);
  const auto victim = dir / "obj_7.bin";
  auto bytes = read_file_bytes(victim);
  for (std::size_t k = 4; k < 8; ++k) {
    bytes[k] = static_cast<std::byte>(~std::to_integer<unsigned>(bytes[k]) & 0xffu);
  }
  write_file_atomic(victim, bytes);
  try {
    load_bank(dir);
    FAIL() << "corruption not detected";
  } catch (const IntegrityError & e) {
    EXPECT_NE(std::string(e.what()).find("object 7"), std::string::npos);
  }
}

TEST(Bank, TruncationIsAnIntegrityError)
{
  const auto dir = oracle::scratch_dir("io_bank_trunc");
  save_bank(three_object_bank(), dir);
  auto bytes = read_file_bytes(dir / "obj_14.bin");
  bytes.resize(bytes.size() - 4);
  write_file_atomic(dir / "obj_14.bin", bytes);
  EXPECT_THROW(load_bank(dir), IntegrityError);
}

TEST(Bank, MissingObjectFile)
{
  const auto dir = oracle::scratch_dir("io_bank_missing");
  save_bank(three_object_bank(), dir);
  fs::remove(dir / "obj_0.bin");
  EXPECT_THROW(load_bank(dir), IntegrityError);
}

TEST(Layout, PairsCloudsAndLabels)
{
  const auto dir = oracle::scratch_dir("io_layout");
  fs::create_directories(dir / "train" / "clouds");
  fs::create_directories(dir / "train" / "labels");
  write_cloud({"b", {}}, dir / "train" / "clouds" / "b.bin");
  write_cloud({"a", {}}, dir / "train" / "clouds" / "a.bin");
  write_labels({}, dir / "train" / "labels" / "a.txt");
  write_labels({}, dir / "train" / "labels" / "b.txt");
  const auto layout = DatasetLayout::open(dir, "train");
  ASSERT_EQ(layout.frames.size(), 2u);
  EXPECT_EQ(layout.frames[0].frame_id, "a");
  EXPECT_TRUE(layout.frames[1].labels.has_value());

  fs::remove(dir / "train" / "labels" / "b.txt");
  EXPECT_ANY_THROW(DatasetLayout::scan(dir / "train" / "clouds", dir / "train" / "labels", true));
  const auto partial = DatasetLayout::scan(dir / "train" / "clouds", dir / "train" / "labels", false);
  EXPECT_FALSE(partial.frames[1].labels.has_value());
}

TEST(Doubles, ShortestRoundTrip)
{
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
  std::mt19937_64 engine(9);
  for (int k = 0; k < 1000; ++k) {
    const double v = std::bit_cast<double>(engine() & 0x7fefffffffffffffULL);
    const std::string text = format_double(v);
    double back = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), back);
    EXPECT_EQ(back, v);
  }
}

}  // namespace
}  // namespace lidarwx
