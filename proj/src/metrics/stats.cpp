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

#include "metrics/stats.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace ragbench::metrics {

double percentile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) fail(Errc::kEmptySamples, "percentile of an empty sample set");
    if (!(p > 0.0 && p <= 1.0)) fail(Errc::kInvalidArgument, "percentile rank must be in (0, 1]");
    const double n = static_cast<double>(sorted.size());
    // Guard p*n landing a hair above an integer through rounding (0.95 * 100).
    double rank = std::ceil(p * n - 1e-9 * n);
    rank = std::clamp(rank, 1.0, n);
    return sorted[static_cast<std::size_t>(rank) - 1];
}

double percentile(std::span<const double> samples, double p) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    return percentile_sorted(sorted, p);
}

LatencySummary summarize(std::string stage, std::vector<double> samples_ms) {
    if (samples_ms.empty()) fail(Errc::kEmptySamples, "no samples for stage " + stage);
    std::sort(samples_ms.begin(), samples_ms.end());
    LatencySummary s;
    s.stage = std::move(stage);
    s.count = samples_ms.size();
    double sum = 0.0;
    for (double v : samples_ms) sum += v;
    s.mean_ms = sum / static_cast<double>(samples_ms.size());
    s.p50_ms = percentile_sorted(samples_ms, 0.50);
    s.p95_ms = percentile_sorted(samples_ms, 0.95);
    s.p99_ms = percentile_sorted(samples_ms, 0.99);
    s.max_ms = samples_ms.back();
    return s;
}

}  // namespace ragbench::metrics
