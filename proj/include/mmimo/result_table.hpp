// SPDX-License-Identifier: Apache-2.0
//
// mmimo-iot: Monte-Carlo simulation of massive MIMO links for URLLC and mMTC
// Copyright (C) 2026 mmimo-iot contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mmimo {

using Cell = std::variant<std::int64_t, double, std::string>;

struct Column
{
    std::string name;
    std::string unit; // empty for dimensionless or categorical columns
};

// Tabular experiment output. CSV layout:
//   # key = value          metadata, in insertion order
//   # units = u1,u2,...
//   name1,name2,...
//   v1,v2,...
// Doubles use the shortest round-trip representation, so parse followed by
// to_csv reproduces the input byte for byte.
class ResultTable
{
  public:
    ResultTable() = default;
    explicit ResultTable(std::vector<Column> columns);

    const std::vector<Column> &columns() const { return columns_; }
    const std::vector<std::vector<Cell>> &rows() const { return rows_; }
    const std::vector<std::pair<std::string, std::string>> &metadata() const { return metadata_; }

    void add_row(std::vector<Cell> row);
    // Replaces an existing entry in place or appends a new one.
    void set_meta(const std::string &key, const std::string &value);
    // Empty string when absent.
    std::string meta(const std::string &key) const;
    bool has_meta(const std::string &key) const;

    std::size_t column_index(std::string_view name) const; // throws std::out_of_range
    double number(std::size_t row, std::string_view column) const;
    std::string text(std::size_t row, std::string_view column) const;

    std::string to_csv() const;
    // Header and data rows only, without metadata.
    std::string body_csv() const;
    std::string to_json() const;

    static ResultTable parse_csv(std::string_view text);

  private:
    std::vector<Column> columns_;
    std::vector<std::vector<Cell>> rows_;
    std::vector<std::pair<std::string, std::string>> metadata_;
};

std::string format_cell(const Cell &c);
std::string format_double(double v);
Cell parse_cell(std::string_view s);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

} // namespace mmimo
