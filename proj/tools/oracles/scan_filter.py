#!/usr/bin/env python3
# Copyright 2026 The XAL Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Line-by-line row counts for the ProPublica cleaning filters.

Independent of the C++ loader; its output is pinned in the dataset tests.
Usage: scan_filter.py compas-scores-two-years.csv
"""
import csv
import sys


def main(path):
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        col = {}
        for i, name in enumerate(header):
            col.setdefault(name, i)  # first occurrence of duplicated names
        base = 0
        priors_gt_100 = 0
        priors_gt_20 = 0
        for row in reader:
            days = row[col["days_b_screening_arrest"]]
            recid = row[col["is_recid"]]
            degree = row[col["c_charge_degree"]]
            if days == "" or not -30 <= float(days) <= 30:
                continue
            if recid == "" or int(recid) == -1:
                continue
            if degree not in ("F", "M"):
                continue
            base += 1
            priors = float(row[col["priors_count"]])
            priors_gt_100 += priors > 100
            priors_gt_20 += priors > 20
    print(f"cleaned_rows {base}")
    print(f"cleaned_and_priors_gt_100 {priors_gt_100}")
    print(f"cleaned_and_priors_gt_20 {priors_gt_20}")


if __name__ == "__main__":
    main(sys.argv[1])
