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

// Two-stage observed record with monotone censoring and death, plus CSV I/O.

#ifndef ASV_TRAJECTORY_HPP_
#define ASV_TRAJECTORY_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace asv {

struct Trajectory {
  std::uint64_t id = 0;
  std::vector<double> x1;
  int a1 = 0;
  int c1 = 0;  // 1 = censored
  std::optional<int> s1;
  std::optional<std::vector<double>> x2;
  std::optional<int> a2;
  std::optional<int> c2;
  std::optional<int> s2;
  std::optional<double> y;

  // Stage 2 observed: uncensored and alive after stage 1.
  bool reached_stage2() const { return c1 == 0 && s1 && *s1 == 1; }
  bool outcome_observed() const { return y.has_value(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

enum class Shape {
  kCensoredStage1,
  kDiedStage1,
  kCensoredStage2,
  kDiedStage2,
  kObserved,
};

const char* shape_name(Shape s);

// Throws MonotoneViolation naming the first illegal field, or InvalidValue
// for non-binary indicators and non-finite covariates.
void validate(const Trajectory& t);
Shape shape_of(const Trajectory& t);

struct Dataset {
  std::vector<Trajectory> rows;
  int p1 = 1;
  int p2 = 1;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  const Trajectory& operator[](std::size_t i) const { return rows[i]; }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Validates every row and the shared dimensions. Row index is attached to
// MonotoneViolation.
void validate(const Dataset& d);

// Column names. Covariate columns are <prefix><j> for j = 1..p.
struct CsvSchema {
  std::string id = "id";
  std::string x1_prefix = "x1_";
  std::string a1 = "a1";
  std::string c1 = "c1";
  std::string s1 = "s1";
  std::string x2_prefix = "x2_";
  std::string a2 = "a2";
  std::string c2 = "c2";
  std::string s2 = "s2";
  std::string y = "y";
};

// The id column is optional on input; rows default to their 0-based index.
Dataset read_csv(std::istream& in, const CsvSchema& schema = {});
Dataset read_csv(const std::string& path, const CsvSchema& schema = {});
void write_csv(const Dataset& d, std::ostream& out,
               const CsvSchema& schema = {});
void write_csv(const Dataset& d, const std::string& path,
               const CsvSchema& schema = {});

}  // namespace asv

#endif  // ASV_TRAJECTORY_HPP_
