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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "app/config.hpp"
#include "metrics/report.hpp"
#include "pipeline/driver.hpp"
#include "pipeline/pipeline.hpp"
#include "refbackends/reference_store.hpp"

namespace ragbench::app {

// Lifecycle phase, doubling as the process exit code.
enum class Phase : int { kOk = 0, kConfig = 2, kIndex = 3, kRun = 4, kReport = 5 };

class PhaseError : public Error {
 public:
    PhaseError(Phase phase, const Error& cause)
        : Error(cause.code(), cause.what(), cause.stage()), phase_(phase) {}
    Phase phase() const { return phase_; }

 private:
    Phase phase_;
};

struct Backends {
    pipeline::Components components;
    std::shared_ptr<workload::Mutator> mutator;
    std::shared_ptr<metrics::Judge> judge;
    std::shared_ptr<ref::ReferenceStore> reference_store;  // set for the reference store backend
};

std::shared_ptr<pipeline::Chunker> make_chunker(const ChunkingConfig& cfg);
// Remote backends fetch nothing until used, except the store, which reads
// its capability declaration.
Backends make_backends(const RunConfig& cfg);

// Checks the configured store's declared capabilities against what the run
// needs. Contacts remote stores. Throws ConfigError.
void check_backend_capabilities(const RunConfig& cfg);

struct RunPaths {
    std::string run_dir;
    std::string request_log;
    std::string trace;
    std::string quality;
    std::string index_stats;
    std::string manifest;
    std::string report_json;
    std::string report_csv;
    std::string report_svg;
};
RunPaths run_paths(const RunConfig& cfg);

struct SnapshotPaths {
    std::string dir;
    std::string meta;   // JSON: digests and index stats
    std::string store;  // reference store snapshot
};
SnapshotPaths snapshot_paths(const RunConfig& cfg);

// Hash of everything that determines index contents.
std::string index_digest(const RunConfig& cfg, const CorpusManifest& manifest);

struct IndexSummary {
    pipeline::IndexStats stats;
    std::size_t documents_indexed = 0;
    std::string index_digest;
    SnapshotPaths paths;
};

// Builds the index and persists the snapshot. Throws PhaseError.
IndexSummary build_index_snapshot(const RunConfig& cfg);

struct RunOptions {
    bool skip_index = false;
    std::optional<std::string> emit_trace;
    const std::atomic<bool>* stop = nullptr;
};

struct RunOutcome {
    RunPaths paths;
    bool partial = false;
    bool trace_written = false;
    std::uint64_t completed = 0;
    std::uint64_t completed_queries = 0;
    double wall_s = 0.0;
    std::optional<metrics::QualityAggregate> quality;
    std::optional<monitor::FlushReport> monitor;
    nlohmann::ordered_json report;
};

// Monitor start, index (or snapshot restore), workload execution, monitor
// stop, quality evaluation and report, in that order. Artifacts written so
// far are flushed before an error propagates. Throws PhaseError.
RunOutcome run_benchmark(const RunConfig& cfg, const RunOptions& options = {});

struct ReportRequest {
    std::string request_log;
    std::optional<std::string> trace;
    std::optional<std::string> quality;
    std::optional<std::string> index_stats;
    std::string out_dir;
    std::vector<std::string> formats = {"json"};
    metrics::RecallMode recall_mode = metrics::RecallMode::kRecall;
    std::shared_ptr<metrics::Judge> judge;  // reference judge when null
};

// Builds the report from artifacts on disk. Returns the report document.
nlohmann::ordered_json write_report(const ReportRequest& req, metrics::QualityAggregate* quality_out = nullptr);

}  // namespace ragbench::app
