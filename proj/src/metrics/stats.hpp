// Copyright (C) 2026 The ragbench Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ragbench::metrics {

// Nearest-rank percentile: element ceil(p*n)-1 of the sorted samples.
// Throws EmptySamples, InvalidArgument when p is outside (0, 1].
double percentile(std::span<const double> samples, double p);
// Same on already sorted input.
double percentile_sorted(std::span<const double> sorted, double p);

struct LatencySummary {
    std::string stage;
    std::uint64_t count = 0;
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p95_ms = 0.0;
    double p99_ms = 0.0;
    double max_ms = 0.0;
};

// Throws EmptySamples.
LatencySummary summarize(std::string stage, std::vector<double> samples_ms);

}  // namespace ragbench::metrics
