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

// Line-oriented `key = value` documents shared by dataset manifests and
// experiment configs.
//
//   # comment
//   loop.steps = 200
//   feature = age : continuous
//   feature = sex : categorical : Female, Male
//
// Keys may repeat; repeated keys form lists in file order. Every entry keeps
// its line number so validation errors can point at the source.

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xal/common.hpp"

namespace xal::kv {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

class Document {
 public:
  static Document parse(std::string_view text) {
    Document doc;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto end = text.find('\n', start);
      const auto raw = text.substr(start, end == std::string_view::npos
                                              ? std::string_view::npos
                                              : end - start);
      ++line_no;
      const auto line = trim(raw);
      if (!line.empty() && line[0] != '#') {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
          throw ConfigError("expected 'key = value', got '" + std::string(line) + "'",
                            line_no);
        }
        Entry e{std::string(trim(line.substr(0, eq))),
                std::string(trim(line.substr(eq + 1))), line_no};
        if (e.key.empty()) throw ConfigError("empty key", line_no);
        doc.entries_.push_back(std::move(e));
      }
      if (end == std::string_view::npos) break;
      start = end + 1;
    }
    return doc;
  }

  static Document load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  void set(const std::string& key, const std::string& value) {
    for (auto& e : entries_) {
      if (e.key == key) {
        e.value = value;
        return;
      }
    }
    entries_.push_back({key, value, 0});
  }

  void add(const std::string& key, const std::string& value) {
    entries_.push_back({key, value, 0});
  }

  /// Last entry for `key`, or nullptr.
  const Entry* find(std::string_view key) const {
    const Entry* found = nullptr;
    for (const auto& e : entries_) {
      if (e.key == key) found = &e;
    }
    return found;
  }

  std::vector<const Entry*> find_all(std::string_view key) const {
    std::vector<const Entry*> out;
    for (const auto& e : entries_) {
      if (e.key == key) out.push_back(&e);
    }
    return out;
  }

  const std::vector<Entry>& entries() const { return entries_; }

  std::string to_text() const {
    std::string out;
    for (const auto& e : entries_) out += e.key + " = " + e.value + "\n";
    return out;
  }

 private:
  std::vector<Entry> entries_;
};

}  // namespace xal::kv
