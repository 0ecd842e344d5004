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

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pipeline/pipeline.hpp"
#include "pipeline/request_log.hpp"
#include "workload/workload.hpp"

namespace ragbench::pipeline {

struct DriverOptions {
    std::size_t workers = 1;       // closed-loop concurrency or open-loop dispatch pool
    std::size_t batch_size = 1;    // consecutive queries grouped into one pipeline call
    bool open_loop = false;        // honour Request::scheduled_at_ns
    std::optional<double> duration_s;
    const std::atomic<bool>* stop = nullptr;
    // Called after every update/insert/removal completes, from the dispatch thread.
    std::function<void(const workload::Request&, const UpdateOutcome&)> on_write;
};

struct DriverResult {
    std::uint64_t completed = 0;
    std::uint64_t completed_queries = 0;
    std::int64_t run_start_ns = 0;  // monotonic
    std::int64_t wall_ns = 0;
    bool interrupted = false;
    std::vector<RequestRecord> records;  // ordered by sequence_no
};

using RequestSource = std::function<std::optional<workload::Request>()>;

// Executes requests in stream order. Queries between two writes run
// concurrently on the worker pool; a write waits for in-flight queries to
// drain and runs alone, so content-derived results do not depend on thread
// scheduling. Records carry timestamps relative to the run start.
DriverResult run_requests(Pipeline& pipeline, const RequestSource& source, const DriverOptions& options,
                          RequestLogWriter* log = nullptr);

}  // namespace ragbench::pipeline
