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
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipeline/types.hpp"
#include "workload/workload.hpp"

namespace ragbench::pipeline {

inline constexpr int kRequestLogVersion = 1;

// One executed request. Everything under `timing` in the serialized form is
// clock-derived; the rest is content-derived and reproducible.
struct RequestRecord {
    std::uint64_t sequence_no = 0;
    workload::OperationKind kind = workload::OperationKind::kQuery;
    std::string target;
    std::vector<ChunkId> retrieved_ids;
    std::vector<ChunkId> reranked_ids;
    std::string answer_text;
    std::optional<workload::QAEntry> qa;
    std::uint64_t scanned_vectors = 0;
    std::uint32_t rebuilds = 0;
    std::string error;

    std::vector<StageTiming> stages;
    std::int64_t start_ns = 0;  // relative to run start
    std::int64_t end_ns = 0;
    std::optional<std::int64_t> scheduled_ns;
    std::int64_t rebuild_ns = 0;
    std::optional<double> ttft_ms;
    std::optional<double> tpot_ms;

    std::int64_t e2e_ns() const { return end_ns - start_ns; }
};

struct LogHeader {
    std::string run_id;
    std::string config_digest;
    int version = kRequestLogVersion;
};

// Written when a run ends normally or is interrupted; absent after a crash.
struct LogFooter {
    std::int64_t wall_ns = 0;
    std::uint64_t completed = 0;
    bool interrupted = false;
};

nlohmann::ordered_json header_json(const LogHeader& h);
nlohmann::ordered_json footer_json(const LogFooter& f);
nlohmann::ordered_json to_json(const RequestRecord& r);
RequestRecord record_from_json(const nlohmann::json& j);

// Many-producer log writer that emits lines in sequence_no order. Records
// arriving early are held until the gap before them closes.
class RequestLogWriter {
 public:
    RequestLogWriter(const std::string& path, const LogHeader& header, std::uint64_t first_sequence_no = 0);
    ~RequestLogWriter();

    void submit(RequestRecord record);
    // Writes held records regardless of gaps, then the footer when given.
    void close(std::optional<LogFooter> footer = std::nullopt);
    std::uint64_t written() const;

 private:
    void write_locked(const RequestRecord& r);

    mutable std::mutex mu_;
    std::ofstream out_;
    std::uint64_t next_;
    std::map<std::uint64_t, RequestRecord> held_;
    std::uint64_t written_ = 0;
    bool closed_ = false;
};

}  // namespace ragbench::pipeline
