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

#ifndef BREGDECOMP_HARNESS_FORMAT_HPP
#define BREGDECOMP_HARNESS_FORMAT_HPP

#include <charconv>
#include <string>
#include <system_error>

#include <bregdecomp/errors.hpp>

namespace bregdecomp::harness {

/// Shortest representation that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

/// Like format_double but always shows a decimal point for integral values ("1.0", "0.5").
inline std::string format_decimal(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".eEn") == std::string::npos) {
    s += ".0";
  }
  return s;
}

inline double parse_double(const std::string& text, const std::string& context) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first != last && *first == ' ') {
    ++first;
  }
  while (last != first && (last[-1] == ' ' || last[-1] == '\r')) {
    --last;
  }
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw InvalidInput(context + ": cannot parse '" + text + "' as a number");
  }
  return v;
}

}  // namespace bregdecomp::harness

#endif  // BREGDECOMP_HARNESS_FORMAT_HPP
