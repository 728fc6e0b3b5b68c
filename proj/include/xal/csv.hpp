/*
 * Copyright 2026 The XAL Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// RFC-4180 style delimited text: quoted fields, doubled quotes, CRLF or LF.

#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "xal/common.hpp"

namespace xal::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of the first column named `name`, or -1.
  int column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

/// Reads one record; returns false at end of input. Lines starting with '#'
/// outside a quoted field are skipped when `skip_comments` is set.
inline bool read_record(std::istream& in, std::vector<std::string>& fields,
                        bool skip_comments = true) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  bool at_line_start = true;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(static_cast<char>(c));
      }
      continue;
    }
    if (at_line_start && skip_comments && c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      any = false;
      continue;
    }
    at_line_start = false;
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      break;
    } else if (c == '\n') {
      break;
    } else {
      field.push_back(static_cast<char>(c));
    }
  }
  if (!any) return false;
  if (in_quotes) throw Error("csv: unterminated quoted field");
  fields.push_back(std::move(field));
  return true;
}

inline Table read(std::istream& in) {
  Table t;
  if (!read_record(in, t.header)) throw Error("csv: missing header row");
  if (!t.header.empty() && t.header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    t.header[0].erase(0, 3);
  }
  std::vector<std::string> rec;
  while (read_record(in, rec)) {
    if (rec.size() == 1 && rec[0].empty()) continue;
    t.rows.push_back(rec);
  }
  return t;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_record(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << "\r\n";
}

}  // namespace xal::csv
