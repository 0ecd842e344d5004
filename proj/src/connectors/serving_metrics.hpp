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
#include <optional>
#include <string_view>

#include "connectors/endpoint.hpp"

namespace ragbench::connectors {

struct ServingMetricsSnapshot {
    std::optional<double> ttft_ms;  // mean over the server's histogram
    std::optional<double> tpot_ms;
    std::optional<double> kv_cache_utilization;  // fraction in [0, 1]
    std::int64_t timestamp_ns = 0;               // monotonic, at scrape time
};

// Metric names read from a text exposition. Histogram means come from the
// _sum and _count series; label sets are summed.
struct ServingMetricNames {
    std::string_view ttft_seconds = "vllm:time_to_first_token_seconds";
    std::string_view tpot_seconds = "vllm:time_per_output_token_seconds";
    std::string_view kv_usage = "vllm:gpu_cache_usage_perc";
    std::string_view kv_usage_alt = "vllm:kv_cache_usage_perc";
};

// Parses a Prometheus-style text exposition. Malformed lines raise
// ParseError naming the 1-based line number; absent metrics stay unset.
ServingMetricsSnapshot parse_exposition(std::string_view text, std::int64_t timestamp_ns = 0,
                                        const ServingMetricNames& names = {});

ServingMetricsSnapshot scrape_metrics(HttpEndpoint& endpoint, const ServingMetricNames& names = {});

}  // namespace ragbench::connectors
