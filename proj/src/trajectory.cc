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

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "asv/error.hpp"

namespace asv {
namespace {

void check_binary(int v, const char* field) {
  if (v != 0 && v != 1) {
    throw InvalidValue(std::string("field '") + field + "' must be 0 or 1");
  }
}

void check_finite(const std::vector<double>& x, const char* field) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw InvalidValue(std::string("field '") + field + "' is not finite");
    }
  }
}

// Fields after the stop point, in schema order.
void require_absent_from(const Trajectory& t, int first) {
  const bool present[6] = {t.s1.has_value(), t.x2.has_value(),
                           t.a2.has_value(), t.c2.has_value(),
                           t.s2.has_value(), t.y.has_value()};
  static const char* kNames[6] = {"s1", "x2", "a2", "c2", "s2", "y"};
  for (int i = first; i < 6; ++i) {
    if (present[i]) throw MonotoneViolation(kNames[i]);
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

double parse_real(std::string_view cell, std::size_t row,
                  const std::string& col) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw ParseError(row, col, "not a finite number: '" + std::string(cell) + "'");
  }
  return v;
}

int parse_binary(std::string_view cell, std::size_t row, const std::string& col) {
  if (cell == "0") return 0;
  if (cell == "1") return 1;
  throw ParseError(row, col, "expected 0 or 1, got '" + std::string(cell) + "'");
}

// Covariate columns <prefix>1..<prefix>p, located in the header.
std::vector<int> covariate_columns(const std::vector<std::string>& header,
                                   const std::string& prefix) {
  std::vector<int> cols;
  for (int j = 1;; ++j) {
    const std::string name = prefix + std::to_string(j);
    int found = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) found = static_cast<int>(c);
    }
    if (found < 0) break;
    cols.push_back(found);
  }
  return cols;
}

void write_real(std::ostream& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

const char* shape_name(Shape s) {
  switch (s) {
    case Shape::kCensoredStage1: return "censored_stage1";
    case Shape::kDiedStage1: return "died_stage1";
    case Shape::kCensoredStage2: return "censored_stage2";
    case Shape::kDiedStage2: return "died_stage2";
    case Shape::kObserved: return "observed";
  }
  return "unknown";
}

void validate(const Trajectory& t) {
  if (t.x1.empty()) throw InvalidValue("x1 must be non-empty");
  check_finite(t.x1, "x1");
  check_binary(t.a1, "a1");
  check_binary(t.c1, "c1");
  if (t.c1 == 1) {
    require_absent_from(t, 0);
    return;
  }
  if (!t.s1) throw MonotoneViolation("s1");
  check_binary(*t.s1, "s1");
  if (*t.s1 == 0) {
    require_absent_from(t, 1);
    return;
  }
  if (!t.x2) throw MonotoneViolation("x2");
  if (t.x2->empty()) throw InvalidValue("x2 must be non-empty");
  check_finite(*t.x2, "x2");
  if (!t.a2) throw MonotoneViolation("a2");
  if (!t.c2) throw MonotoneViolation("c2");
  check_binary(*t.a2, "a2");
  check_binary(*t.c2, "c2");
  if (*t.c2 == 1) {
    require_absent_from(t, 4);
    return;
  }
  if (!t.s2) throw MonotoneViolation("s2");
  check_binary(*t.s2, "s2");
  if (*t.s2 == 0) {
    require_absent_from(t, 5);
    return;
  }
  if (!t.y) throw MonotoneViolation("y");
  if (!std::isfinite(*t.y)) throw InvalidValue("field 'y' is not finite");
}

Shape shape_of(const Trajectory& t) {
  if (t.c1 == 1) return Shape::kCensoredStage1;
  if (!t.s1 || *t.s1 == 0) return Shape::kDiedStage1;
  if (t.c2 && *t.c2 == 1) return Shape::kCensoredStage2;
  if (!t.s2 || *t.s2 == 0) return Shape::kDiedStage2;
  return Shape::kObserved;
}

void validate(const Dataset& d) {
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const Trajectory& t = d.rows[i];
    try {
      validate(t);
    } catch (const MonotoneViolation& e) {
      throw e.with_row(i);
    }
    if (static_cast<int>(t.x1.size()) != d.p1) {
      throw DimensionMismatch(static_cast<std::size_t>(d.p1), t.x1.size());
    }
    if (t.x2 && static_cast<int>(t.x2->size()) != d.p2) {
      throw DimensionMismatch(static_cast<std::size_t>(d.p2), t.x2->size());
    }
  }
}

Dataset read_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(0, "", "missing header row");
  std::vector<std::string> header;
  for (auto f : split(line)) header.emplace_back(f);

  auto column = [&](const std::string& name, bool required) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return static_cast<int>(c);
    }
    if (required) throw ParseError(0, name, "column missing from header");
    return -1;
  };
  const int id_col = column(schema.id, false);
  const std::vector<int> x1_cols = covariate_columns(header, schema.x1_prefix);
  const std::vector<int> x2_cols = covariate_columns(header, schema.x2_prefix);
  if (x1_cols.empty()) throw ParseError(0, schema.x1_prefix + "1", "column missing from header");
  if (x2_cols.empty()) throw ParseError(0, schema.x2_prefix + "1", "column missing from header");
  const int a1 = column(schema.a1, true), c1 = column(schema.c1, true),
            s1 = column(schema.s1, true), a2 = column(schema.a2, true),
            c2 = column(schema.c2, true), s2 = column(schema.s2, true),
            y = column(schema.y, true);

  Dataset d;
  d.p1 = static_cast<int>(x1_cols.size());
  d.p2 = static_cast<int>(x2_cols.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError(row, "", "expected " + std::to_string(header.size()) +
                                    " cells, got " + std::to_string(cells.size()));
    }
    auto opt_binary = [&](int col, const std::string& name) -> std::optional<int> {
      if (cells[col].empty()) return std::nullopt;
      return parse_binary(cells[col], row, name);
    };
    auto req_binary = [&](int col, const std::string& name) {
      if (cells[col].empty()) throw ParseError(row, name, "required cell is empty");
      return parse_binary(cells[col], row, name);
    };
    auto covariates = [&](const std::vector<int>& cols, const std::string& prefix,
                          bool required) -> std::optional<std::vector<double>> {
      std::size_t filled = 0;
      for (int c : cols) filled += cells[c].empty() ? 0 : 1;
      if (filled == 0 && !required) return std::nullopt;
      std::vector<double> x;
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const std::string name = prefix + std::to_string(j + 1);
        if (cells[cols[j]].empty()) throw ParseError(row, name, "partially empty covariate vector");
        x.push_back(parse_real(cells[cols[j]], row, name));
      }
      return x;
    };

    Trajectory t;
    if (id_col >= 0 && !cells[id_col].empty()) {
      std::uint64_t v = 0;
      const auto cell = cells[id_col];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError(row, schema.id, "not an unsigned integer");
      }
      t.id = v;
    } else {
      t.id = row;
    }
    t.x1 = *covariates(x1_cols, schema.x1_prefix, true);
    t.a1 = req_binary(a1, schema.a1);
    t.c1 = req_binary(c1, schema.c1);
    t.s1 = opt_binary(s1, schema.s1);
    t.x2 = covariates(x2_cols, schema.x2_prefix, false);
    t.a2 = opt_binary(a2, schema.a2);
    t.c2 = opt_binary(c2, schema.c2);
    t.s2 = opt_binary(s2, schema.s2);
    if (!cells[y].empty()) t.y = parse_real(cells[y], row, schema.y);
    try {
      validate(t);
    } catch (const MonotoneViolation& e) {
      throw e.with_row(row);
    }
    d.rows.push_back(std::move(t));
    ++row;
  }
  return d;
}

Dataset read_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_csv(in, schema);
}

void write_csv(const Dataset& d, std::ostream& out, const CsvSchema& schema) {
  out << schema.id;
  for (int j = 1; j <= d.p1; ++j) out << ',' << schema.x1_prefix << j;
  out << ',' << schema.a1 << ',' << schema.c1 << ',' << schema.s1;
  for (int j = 1; j <= d.p2; ++j) out << ',' << schema.x2_prefix << j;
  out << ',' << schema.a2 << ',' << schema.c2 << ',' << schema.s2 << ','
      << schema.y << '\n';
  auto opt = [&](const std::optional<int>& v) {
    out << ',';
    if (v) out << *v;
  };
  for (const Trajectory& t : d.rows) {
    out << t.id;
    for (double v : t.x1) {
      out << ',';
      write_real(out, v);
    }
    out << ',' << t.a1 << ',' << t.c1;
    opt(t.s1);
    for (int j = 0; j < d.p2; ++j) {
      out << ',';
      if (t.x2) write_real(out, (*t.x2)[static_cast<std::size_t>(j)]);
    }
    opt(t.a2);
    opt(t.c2);
    opt(t.s2);
    out << ',';
    if (t.y) write_real(out, *t.y);
    out << '\n';
  }
  if (!out) throw Error("write failure");
}

void write_csv(const Dataset& d, const std::string& path, const CsvSchema& schema) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_csv(d, out, schema);
}

}  // namespace asv
