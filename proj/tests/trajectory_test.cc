// Copyright 2026 The ASV Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "asv/trajectory.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "asv/error.hpp"
#include "asv/simulation.hpp"
#include "test_util.hpp"

namespace asv {
namespace {

Trajectory observed_row() {
  Trajectory t;
  t.x1 = {0.1};
  t.a1 = 0;
  t.c1 = 0;
  t.s1 = 1;
  t.x2 = std::vector<double>{0.5};
  t.a2 = 1;
  t.c2 = 0;
  t.s2 = 1;
  t.y = 2.3;
  return t;
}

std::string field_of(const Trajectory& t) {
  try {
    validate(t);
  } catch (const MonotoneViolation& e) {
    return e.field();
  }
  return "";
}

TEST(ValidateTest, CensoredAtStageOne) {
  Trajectory t;
  t.x1 = {0.1};
  t.a1 = 1;
  t.c1 = 1;
  EXPECT_NO_THROW(validate(t));
  EXPECT_EQ(shape_of(t), Shape::kCensoredStage1);
}

TEST(ValidateTest, CensoredRowWithSurvivalIsRejected) {
  Trajectory t;
  t.x1 = {0.1};
  t.a1 = 1;
  t.c1 = 1;
  t.s1 = 1;
  EXPECT_EQ(field_of(t), "s1");
}

TEST(ValidateTest, FullyObserved) {
  const Trajectory t = observed_row();
  EXPECT_NO_THROW(validate(t));
  EXPECT_EQ(shape_of(t), Shape::kObserved);
}

TEST(ValidateTest, OnlyFiveOfSixtyFourPresenceMasksAreLegal) {
  int legal = 0;
  for (int mask = 0; mask < 64; ++mask) {
    auto has = [mask](int bit) { return (mask >> bit) & 1; };
    Trajectory t;
    t.x1 = {0.0};
    t.c1 = mask == 0 ? 1 : 0;
    if (has(0)) t.s1 = has(1) ? 1 : 0;
    if (has(1)) t.x2 = std::vector<double>{0.0};
    if (has(2)) t.a2 = 0;
    if (has(3)) t.c2 = has(4) ? 0 : 1;
    if (has(4)) t.s2 = has(5) ? 1 : 0;
    if (has(5)) t.y = 1.0;
    try {
      validate(t);
      ++legal;
    } catch (const Error&) {
    }
  }
  EXPECT_EQ(legal, 5);
}

TEST(ValidateTest, NonBinaryIndicator) {
  Trajectory t = observed_row();
  t.a2 = 2;
  EXPECT_THROW(validate(t), InvalidValue);
}

TEST(CsvTest, ReadsWellFormedFile) {
  std::istringstream in(
      "id,x1_1,a1,c1,s1,x2_1,a2,c2,s2,y\n"
      "0,0.1,1,1,,,,,,\n"
      "1,0.2,0,0,0,,,,,\n"
      "2,0.3,0,0,1,0.5,1,0,1,2.5\n");
  const Dataset d = read_csv(in);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(shape_of(d[0]), Shape::kCensoredStage1);
  EXPECT_EQ(shape_of(d[1]), Shape::kDiedStage1);
  EXPECT_DOUBLE_EQ(*d[2].y, 2.5);
}

TEST(CsvTest, OutcomeAfterDeathNamesRow) {
  std::istringstream in(
      "x1_1,a1,c1,s1,x2_1,a2,c2,s2,y\n"
      "0.1,0,0,1,0.5,1,0,1,2.0\n"
      "0.1,0,0,1,0.5,1,0,0,2.0\n");
  try {
    read_csv(in);
    FAIL() << "expected MonotoneViolation";
  } catch (const MonotoneViolation& e) {
    EXPECT_EQ(e.field(), "y");
    ASSERT_TRUE(e.row().has_value());
    EXPECT_EQ(*e.row(), 1u);
  }
}

TEST(CsvTest, NonNumericCovariate) {
  std::istringstream in("x1_1,a1,c1,s1,x2_1,a2,c2,s2,y\nabc,1,1,,,,,,\n");
  EXPECT_THROW(read_csv(in), ParseError);
}

TEST(CsvTest, WritesEmptyCellsForAbsentFields) {
  Dataset d;
  Trajectory t;
  t.x1 = {0.25};
  t.a1 = 1;
  t.c1 = 1;
  d.rows.push_back(t);
  d.rows.push_back(observed_row());
  d.rows[1].id = 1;
  std::ostringstream out;
  write_csv(d, out);
  std::istringstream lines(out.str());
  std::string header, first, second;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_EQ(header, "id,x1_1,a1,c1,s1,x2_1,a2,c2,s2,y");
  EXPECT_EQ(first, "0,0.25,1,1,,,,,,");
  EXPECT_EQ(second, "1,0.1,0,0,1,0.5,1,0,1,2.3");
}

TEST(CsvTest, SimulatedRoundTrip) {
  const Dataset d = simulate(SimConfig::preset_config("dgp1"), 100, 3);
  const std::string path = testing::temp_path("round_trip.csv");
  write_csv(d, path);
  EXPECT_EQ(read_csv(path), d);
}

TEST(CsvTest, FuzzedMultivariateRoundTrip) {
  const Dataset d = testing::fuzz_dataset(200, 11, {.p1 = 3, .p2 = 2});
  std::stringstream buf;
  write_csv(d, buf);
  EXPECT_EQ(read_csv(buf), d);
}

TEST(CsvTest, MissingFile) { EXPECT_THROW(read_csv("/nonexistent/none.csv"), Error); }

}  // namespace
}  // namespace asv
