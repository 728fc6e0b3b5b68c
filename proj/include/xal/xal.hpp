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

#pragma once

#include "xal/batch.hpp"
#include "xal/bias.hpp"
#include "xal/cluster.hpp"
#include "xal/common.hpp"
#include "xal/config.hpp"
#include "xal/csv.hpp"
#include "xal/dataset.hpp"
#include "xal/discretizer.hpp"
#include "xal/explain.hpp"
#include "xal/keyvalue.hpp"
#include "xal/kmeans.hpp"
#include "xal/learner.hpp"
#include "xal/models.hpp"
#include "xal/report.hpp"
#include "xal/runner.hpp"
#include "xal/service.hpp"
