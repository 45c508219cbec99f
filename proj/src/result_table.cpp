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

#include "mmimo/result_table.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace mmimo {

namespace {

void check_text(const std::string &s, const char *what)
{
    if (s.find_first_of(",\n\r") != std::string::npos)
        throw std::invalid_argument(std::string(what) + " must not contain commas or line breaks: '" + s + "'");
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;)
    {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos)
        {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string format_cell(const Cell &c)
{
    if (const auto *i = std::get_if<std::int64_t>(&c))
        return std::to_string(*i);
    if (const auto *d = std::get_if<double>(&c))
        return format_double(*d);
    return std::get<std::string>(c);
}

Cell parse_cell(std::string_view s)
{
    std::int64_t i = 0;
    auto ri = std::from_chars(s.data(), s.data() + s.size(), i);
    if (!s.empty() && ri.ec == std::errc() && ri.ptr == s.data() + s.size())
        return i;
    if (s == "nan")
        return std::nan("");
    if (s == "inf")
        return HUGE_VAL;
    if (s == "-inf")
        return -HUGE_VAL;
    double d = 0.0;
    auto rd = std::from_chars(s.data(), s.data() + s.size(), d);
    if (!s.empty() && rd.ec == std::errc() && rd.ptr == s.data() + s.size())
        return d;
    return std::string(s);
}

std::uint64_t fnv1a64(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    static const char *digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4)
        s[i] = digits[v & 0xF];
    return s;
}

ResultTable::ResultTable(std::vector<Column> columns) : columns_(std::move(columns))
{
    for (const auto &c : columns_)
    {
        check_text(c.name, "column name");
        check_text(c.unit, "column unit");
    }
}

void ResultTable::add_row(std::vector<Cell> row)
{
    if (row.size() != columns_.size())
        throw std::invalid_argument("row has " + std::to_string(row.size()) + " cells, table has " +
                                    std::to_string(columns_.size()) + " columns");
    for (const auto &c : row)
        if (const auto *s = std::get_if<std::string>(&c))
            check_text(*s, "cell");
    rows_.push_back(std::move(row));
}

void ResultTable::set_meta(const std::string &key, const std::string &value)
{
    if (key.empty() || key == "units" || key.find(" = ") != std::string::npos ||
        key.find_first_of("\n\r") != std::string::npos || value.find_first_of("\n\r") != std::string::npos)
        throw std::invalid_argument("invalid metadata entry '" + key + "'");
    for (auto &kv : metadata_)
        if (kv.first == key)
        {
            kv.second = value;
            return;
        }
    metadata_.emplace_back(key, value);
}

std::string ResultTable::meta(const std::string &key) const
{
    for (const auto &kv : metadata_)
        if (kv.first == key)
            return kv.second;
    return {};
}

bool ResultTable::has_meta(const std::string &key) const
{
    for (const auto &kv : metadata_)
        if (kv.first == key)
            return true;
    return false;
}

std::size_t ResultTable::column_index(std::string_view name) const
{
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].name == name)
            return i;
    throw std::out_of_range("no column '" + std::string(name) + "'");
}

double ResultTable::number(std::size_t row, std::string_view column) const
{
    const Cell &c = rows_.at(row).at(column_index(column));
    if (const auto *i = std::get_if<std::int64_t>(&c))
        return static_cast<double>(*i);
    if (const auto *d = std::get_if<double>(&c))
        return *d;
    throw std::invalid_argument("column '" + std::string(column) + "' is not numeric");
}

std::string ResultTable::text(std::size_t row, std::string_view column) const
{
    return format_cell(rows_.at(row).at(column_index(column)));
}

std::string ResultTable::body_csv() const
{
    std::string out;
    for (std::size_t i = 0; i < columns_.size(); ++i)
        out += (i ? "," : "") + columns_[i].name;
    out += '\n';
    for (const auto &row : rows_)
    {
        for (std::size_t i = 0; i < row.size(); ++i)
            out += (i ? "," : "") + format_cell(row[i]);
        out += '\n';
    }
    return out;
}

std::string ResultTable::to_csv() const
{
    std::string out;
    for (const auto &kv : metadata_)
        out += "# " + kv.first + " = " + kv.second + "\n";
    out += "# units = ";
    for (std::size_t i = 0; i < columns_.size(); ++i)
        out += (i ? "," : "") + columns_[i].unit;
    out += '\n';
    return out + body_csv();
}

std::string ResultTable::to_json() const
{
    nlohmann::ordered_json j;
    j["metadata"] = nlohmann::ordered_json::object();
    for (const auto &kv : metadata_)
        j["metadata"][kv.first] = kv.second;
    j["columns"] = nlohmann::ordered_json::array();
    for (const auto &c : columns_)
        j["columns"].push_back({{"name", c.name}, {"unit", c.unit}});
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto &row : rows_)
    {
        auto r = nlohmann::ordered_json::array();
        for (const auto &c : row)
        {
            if (const auto *i = std::get_if<std::int64_t>(&c))
                r.push_back(*i);
            else if (const auto *d = std::get_if<double>(&c))
                std::isfinite(*d) ? r.push_back(*d) : r.push_back(format_double(*d));
            else
                r.push_back(std::get<std::string>(c));
        }
        j["rows"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

ResultTable ResultTable::parse_csv(std::string_view text)
{
    ResultTable t;
    std::vector<std::string_view> lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty())
        lines.pop_back();

    std::size_t i = 0;
    std::vector<std::string_view> units;
    bool have_units = false;
    for (; i < lines.size() && lines[i].starts_with("# "); ++i)
    {
        const std::string_view body = lines[i].substr(2);
        const std::size_t eq = body.find(" = ");
        if (eq == std::string_view::npos)
            throw std::invalid_argument("malformed metadata line " + std::to_string(i + 1));
        const std::string key(body.substr(0, eq));
        const std::string_view value = body.substr(eq + 3);
        if (key == "units")
        {
            units = split(value, ',');
            have_units = true;
        }
        else
            t.metadata_.emplace_back(key, std::string(value));
    }
    if (i >= lines.size())
        throw std::invalid_argument("CSV has no header line");
    for (auto name : split(lines[i], ','))
        t.columns_.push_back({std::string(name), ""});
    if (have_units)
    {
        if (units.size() != t.columns_.size())
            throw std::invalid_argument("units line does not match the header");
        for (std::size_t c = 0; c < units.size(); ++c)
            t.columns_[c].unit = std::string(units[c]);
    }
    for (++i; i < lines.size(); ++i)
    {
        const auto fields = split(lines[i], ',');
        if (fields.size() != t.columns_.size())
            throw std::invalid_argument("row on line " + std::to_string(i + 1) + " has wrong field count");
        std::vector<Cell> row;
        row.reserve(fields.size());
        for (auto f : fields)
            row.push_back(parse_cell(f));
        t.rows_.push_back(std::move(row));
    }
    return t;
}

} // namespace mmimo
