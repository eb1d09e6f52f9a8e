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

// Exception hierarchy shared by every module.

#ifndef ASV_ERROR_HPP_
#define ASV_ERROR_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace asv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A trajectory field is present (or absent) against the monotone shape.
class MonotoneViolation : public Error {
 public:
  MonotoneViolation(std::string field, std::optional<std::size_t> row = {});
  const std::string& field() const { return field_; }
  std::optional<std::size_t> row() const { return row_; }
  MonotoneViolation with_row(std::size_t row) const {
    return MonotoneViolation(field_, row);
  }

 private:
  std::string field_;
  std::optional<std::size_t> row_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& detail);
  std::size_t row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// A value outside its domain (non-binary indicator, non-finite covariate).
class InvalidValue : public Error {
 public:
  using Error::Error;
};

class EmptyStratum : public Error {
 public:
  EmptyStratum(std::string name, std::optional<int> fold = {});
  const std::string& name() const { return name_; }
  std::optional<int> fold() const { return fold_; }
  EmptyStratum with_fold(int fold) const { return EmptyStratum(name_, fold); }

 private:
  std::string name_;
  std::optional<int> fold_;
};

class NonpositiveDenominator : public Error {
 public:
  explicit NonpositiveDenominator(double value);
  double value() const { return value_; }

 private:
  double value_;
};

class ArmNotFitted : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual);
};

class ZeroOmega : public Error {
 public:
  using Error::Error;
};

// Bad configuration or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace asv

#endif  // ASV_ERROR_HPP_
