// Copyright 2026 The bregdecomp Authors.
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

#ifndef BREGDECOMP_HARNESS_IO_HPP
#define BREGDECOMP_HARNESS_IO_HPP

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <bregdecomp/calibration.hpp>
#include <bregdecomp/empirical.hpp>
#include <bregdecomp/errors.hpp>
#include <bregdecomp/harness/format.hpp>

namespace bregdecomp::harness {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

/// Reads a headered CSV; returns rows as column-name → field maps, keyed by 1-based line number.
inline std::vector<std::pair<std::size_t, std::map<std::string, std::string>>> read_table(
    std::istream& in, const std::vector<std::string>& required, const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw InvalidInput(what + ": empty file");
  }
  const auto header = split_csv_line(line);
  for (const auto& col : required) {
    if (std::find(header.begin(), header.end(), col) == header.end()) {
      throw InvalidInput(what + ": line 1: missing column '" + col + "'");
    }
  }
  std::vector<std::pair<std::size_t, std::map<std::string, std::string>>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw InvalidInput(what + ": line " + std::to_string(line_no) + ": expected " +
                         std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    std::map<std::string, std::string> row;
    for (std::size_t c = 0; c < header.size(); ++c) {
      row[header[c]] = fields[c];
    }
    rows.emplace_back(line_no, std::move(row));
  }
  return rows;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInput("cannot open '" + path + "'");
  }
  return in;
}

}  // namespace detail

/// Parses the sample format: regime,y,w_sel,w_cens,mhat,cluster_id (mhat may be blank).
inline std::vector<WeightedSample> read_samples(std::istream& in) {
  const auto rows =
      detail::read_table(in, {"regime", "y", "w_sel", "w_cens", "mhat", "cluster_id"}, "samples");
  std::vector<WeightedSample> out;
  out.reserve(rows.size());
  for (const auto& [line_no, row] : rows) {
    const std::string ctx = "samples: line " + std::to_string(line_no);
    try {
      WeightedSample s;
      s.regime = parse_regime(row.at("regime"));
      s.y = parse_double(row.at("y"), ctx + ", field y");
      s.w_sel = parse_double(row.at("w_sel"), ctx + ", field w_sel");
      s.w_cens = parse_double(row.at("w_cens"), ctx + ", field w_cens");
      if (const auto& m = row.at("mhat"); !m.empty()) {
        s.mhat = parse_double(m, ctx + ", field mhat");
      }
      s.cluster_id = row.at("cluster_id");
      validate(s);
      out.push_back(std::move(s));
    } catch (const InvalidInput& e) {
      const std::string msg = e.what();
      throw InvalidInput(msg.rfind("samples: line", 0) == 0 ? msg : ctx + ": " + msg);
    }
  }
  return out;
}

inline std::vector<WeightedSample> read_samples_file(const std::string& path) {
  auto in = detail::open_input(path);
  return read_samples(in);
}

inline std::string samples_to_csv(const std::vector<WeightedSample>& samples) {
  std::ostringstream out;
  out << "regime,y,w_sel,w_cens,mhat,cluster_id\n";
  for (const auto& s : samples) {
    out << to_string(s.regime) << ',' << format_double(s.y) << ',' << format_double(s.w_sel) << ','
        << format_double(s.w_cens) << ',' << (s.mhat ? format_double(*s.mhat) : std::string{}) << ','
        << s.cluster_id << '\n';
  }
  return out.str();
}

/// Parses the graded-observation format: lam,eps,loss,weight.
inline std::vector<GradedObservation> read_observations(std::istream& in) {
  const auto rows = detail::read_table(in, {"lam", "eps", "loss", "weight"}, "observations");
  std::vector<GradedObservation> out;
  out.reserve(rows.size());
  for (const auto& [line_no, row] : rows) {
    const std::string ctx = "observations: line " + std::to_string(line_no);
    out.push_back({parse_double(row.at("lam"), ctx + ", field lam"), parse_double(row.at("eps"), ctx + ", field eps"),
                   parse_double(row.at("loss"), ctx + ", field loss"),
                   parse_double(row.at("weight"), ctx + ", field weight")});
  }
  return out;
}

inline std::vector<GradedObservation> read_observations_file(const std::string& path) {
  auto in = detail::open_input(path);
  return read_observations(in);
}

}  // namespace bregdecomp::harness

#endif  // BREGDECOMP_HARNESS_IO_HPP
