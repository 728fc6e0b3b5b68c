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

// Brute-force uncertainty bias, written from the definition with integer
// counts and a sort-based median. Shared by the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

namespace xal::oracle {

inline double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

/// region[i] < 0 marks an untracked row.
inline std::optional<double> bias(const std::vector<double>& certainty, const std::vector<int>& region,
                                  int r) {
  const double m = sorted_median(certainty);
  std::int64_t n_in = 0, c_in = 0, n_out = 0, c_out = 0;
  for (std::size_t i = 0; i < certainty.size(); ++i) {
    if (region[i] < 0) continue;
    const int plus = certainty[i] >= m;
    if (region[i] == r) {
      ++n_in;
      c_in += plus;
    } else {
      ++n_out;
      c_out += plus;
    }
  }
  if (n_in == 0 || n_out == 0 || c_out == 0) return std::nullopt;
  return 1.0 - static_cast<double>(c_in * n_out) / static_cast<double>(n_in * c_out);
}

}  // namespace xal::oracle
