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
#include <string>
#include <vector>

#include "common/error.hpp"
#include "connectors/endpoint.hpp"
#include "metrics/quality.hpp"
#include "monitor/monitor.hpp"
#include "pipeline/interfaces.hpp"
#include "pipeline/types.hpp"
#include "workload/workload.hpp"

namespace ragbench::app {

struct Diagnostic {
    std::string key_path;  // dotted, e.g. "workload.mix"
    int line = 0;          // 1-based, 0 when unknown
    std::string message;
};

std::string format_diagnostic(const Diagnostic& d);

// SchemaError or ParseError carrying every diagnostic found.
class ConfigError : public Error {
 public:
    ConfigError(Errc code, std::vector<Diagnostic> diags);
    const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
    std::vector<Diagnostic> diags_;
};

inline constexpr const char* kReferenceBackend = "reference";
inline constexpr const char* kRemoteBackend = "remote";

enum class CorpusFormat { kPlainDir, kJsonl, kSynthetic };

struct CorpusConfig {
    std::string path;
    CorpusFormat format = CorpusFormat::kJsonl;
    std::optional<std::size_t> limit;
    std::size_t holdout = 0;
    std::size_t synthetic_documents = 200;  // synthetic format only
    std::uint64_t synthetic_seed = 7;
};

struct ChunkingConfig {
    std::string mode = "fixed";  // fixed | separator
    std::size_t size = 512;
    std::size_t overlap = 64;
    std::vector<std::string> separators = {"\n\n", "\n", ". "};
    std::size_t max_len = 1024;
    std::size_t context_overlap = 0;  // separator mode: previous segments prepended
};

struct BackendChoice {
    std::string backend = kReferenceBackend;
    std::optional<connectors::EndpointConfig> endpoint;

    bool remote() const { return backend == kRemoteBackend; }
};

struct EmbeddingConfig : BackendChoice {
    std::size_t dim = 256;
    std::size_t batch_size = 32;
    std::uint64_t seed = 42;
};

struct StoreConfig : BackendChoice {
    IndexSpec index;
};

struct GenerationConfig : BackendChoice {
    std::size_t max_tokens = 64;
};

struct MonitorSection {
    bool enabled = true;
    monitor::MonitorConfig config;  // output path, run id and digest are filled at run time
    std::optional<connectors::EndpointConfig> serving_endpoint;
    std::uint32_t serving_interval_ms = 1000;
};

struct EvaluationConfig : BackendChoice {
    metrics::RecallMode recall_mode = metrics::RecallMode::kRecall;
};

struct RunConfig {
    std::string run_id = "run";
    std::string output_dir = "ragbench_out";
    CorpusConfig corpus;

    workload::WorkloadSpec workload;
    std::size_t dispatchers = 4;  // open-loop worker pool
    BackendChoice mutator;

    ChunkingConfig chunking;
    EmbeddingConfig embedding;
    StoreConfig store;
    QuerySpec query;
    BackendChoice rerank;
    GenerationConfig generation;

    MonitorSection monitor;
    EvaluationConfig evaluation;

    std::string digest;       // content hash of the document, output_dir excluded
    std::string source_path;  // empty when parsed from a string

    std::size_t driver_workers() const;
    bool open_loop() const;
};

// Parses and validates; relative corpus paths resolve against the config
// file's directory. RAGBENCH_OUT, when set, overrides output_dir.
// Throws ConfigError (ParseError or SchemaError).
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& yaml_text, const std::string& base_dir = ".");

// Store operations the configured run needs, checked against what the
// backend declares. Returns diagnostics; empty means supported.
std::vector<Diagnostic> check_capabilities(const RunConfig& cfg, const pipeline::StoreCapabilities& caps);

}  // namespace ragbench::app
