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

#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pipeline/chunker.hpp"
#include "pipeline/corpus.hpp"
#include "pipeline/interfaces.hpp"
#include "workload/workload.hpp"

namespace ragbench::pipeline {

inline constexpr std::string_view kContextDelimiter = "\n---\n";

// Substitutes {question} and {contexts} (each must appear exactly once).
// Contexts are joined by a "---" delimiter line. Throws BadTemplate.
Prompt assemble_prompt(std::string_view question, std::span<const std::string> contexts, std::string_view tmpl);

// Current chunks per live file plus every chunk version ever created, so
// post-hoc evaluation can resolve logged ids to text.
class ChunkRegistry {
 public:
    void add_file(const std::string& file_id, std::vector<Chunk> chunks);
    std::vector<ChunkId> current_ids(const std::string& file_id) const;
    Chunk current_chunk(const std::string& file_id, std::uint32_t chunk_index) const;
    void replace(const std::string& file_id, std::uint32_t chunk_index, Chunk next);
    std::vector<ChunkId> remove_file(const std::string& file_id);
    bool has_file(const std::string& file_id) const;

    std::optional<Chunk> find(ChunkId id) const;
    std::vector<std::string> retrieval_texts(std::span<const ChunkId> ids) const;
    std::vector<std::string> core_texts(std::span<const ChunkId> ids) const;
    std::size_t live_chunk_count() const;

 private:
    mutable std::shared_mutex mu_;
    std::unordered_map<std::string, std::vector<ChunkId>> current_;
    std::unordered_map<ChunkId, Chunk> archive_;
};

struct IndexStats {
    double chunk_s = 0.0;
    double embed_s = 0.0;
    double insert_s = 0.0;
    double build_s = 0.0;
    std::uint64_t chunk_count = 0;
    std::uint64_t index_bytes = 0;
    std::uint64_t raw_vector_bytes = 0;
};

struct QueryOutcome {
    std::string answer_text;
    std::vector<ChunkId> retrieved_ids;
    std::vector<ChunkId> reranked_ids;
    std::vector<StageTiming> timings;
    std::optional<double> ttft_ms;
    std::optional<double> tpot_ms;
    std::int64_t start_ns = 0;
    std::int64_t end_ns = 0;
    std::uint64_t scanned_vectors = 0;
};

struct UpdateOutcome {
    std::vector<StageTiming> timings;
    std::uint32_t rebuilds = 0;
    std::int64_t rebuild_ns = 0;
    std::int64_t start_ns = 0;
    std::int64_t end_ns = 0;
};

struct Components {
    std::shared_ptr<Chunker> chunker;
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<VectorStore> store;
    std::shared_ptr<Reranker> reranker;
    std::shared_ptr<Generator> generator;
};

// Chunks, embeds and inserts the first `count` documents (all when nullopt)
// in embedding batches, then builds the index.
IndexStats index_corpus(const Corpus& corpus, const Chunker& chunker, Embedder& embedder, VectorStore& store,
                        std::size_t batch_size, ChunkRegistry* registry = nullptr,
                        std::optional<std::size_t> count = std::nullopt);

class Pipeline {
 public:
    Pipeline(Components components, QuerySpec query_spec, const Corpus& corpus, std::size_t embed_batch_size = 32,
             std::size_t max_tokens = 64);

    IndexStats index(std::optional<std::size_t> count = std::nullopt);
    // Registers chunks without embedding, for a store restored from a snapshot.
    std::size_t register_chunks(std::optional<std::size_t> count = std::nullopt);

    QueryOutcome handle_query(const workload::QAEntry& qa);
    // One embed call for the batch; per-stage timings are batch-level.
    std::vector<QueryOutcome> handle_query_batch(std::span<const workload::QAEntry> batch);
    UpdateOutcome apply_update(const workload::Request& req);

    const ChunkRegistry& registry() const { return registry_; }
    ChunkRegistry& registry() { return registry_; }
    const Components& components() const { return components_; }
    const QuerySpec& query_spec() const { return query_spec_; }

 private:
    Components components_;
    QuerySpec query_spec_;
    const Corpus& corpus_;
    std::size_t embed_batch_size_;
    std::size_t max_tokens_;
    ChunkRegistry registry_;
};

}  // namespace ragbench::pipeline
