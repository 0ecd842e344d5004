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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pipeline/types.hpp"

namespace ragbench::pipeline {

class Embedder {
 public:
    virtual ~Embedder() = default;
    virtual std::size_t dim() const = 0;
    // One vector per text, order preserved.
    virtual std::vector<Vector> embed(std::span<const std::string> texts) = 0;
};

struct StoreCapabilities {
    bool insert = true;
    bool remove = true;
    bool search = true;
    bool build_index = true;
    bool stats = true;
};

struct StoreInsertOutcome {
    std::uint32_t rebuilds = 0;
    std::int64_t rebuild_ns = 0;
};

struct StoreStats {
    std::uint64_t live_vectors = 0;
    std::uint64_t index_bytes = 0;
    std::uint64_t raw_vector_bytes = 0;
    std::uint64_t rebuild_count = 0;
    std::uint64_t buffer_size = 0;
    std::uint64_t pending_size = 0;
    std::uint64_t scanned_vectors_last_search = 0;
};

struct SearchResult {
    std::vector<RetrievalCandidate> candidates;
    std::uint64_t scanned_vectors = 0;
};

// The minimal database contract the pipeline drives. Searches may run
// concurrently with each other; mutations are serialized by the store.
class VectorStore {
 public:
    virtual ~VectorStore() = default;
    virtual void create_collection(std::size_t dim, Metric metric) = 0;
    virtual std::size_t dim() const = 0;
    virtual StoreInsertOutcome insert(std::span<const ChunkId> ids, std::span<const Vector> vectors) = 0;
    // Unknown ids raise UnknownFileId.
    virtual void remove(std::span<const ChunkId> ids) = 0;
    virtual SearchResult search(const Vector& query, std::size_t k) = 0;
    virtual void build_index() = 0;
    virtual StoreStats stats() const = 0;
    virtual StoreCapabilities capabilities() const { return {}; }
};

struct RerankInput {
    ChunkId id = 0;
    std::string_view text;
};

class Reranker {
 public:
    virtual ~Reranker() = default;
    virtual std::vector<ChunkId> rerank(std::string_view question, std::span<const RerankInput> candidates,
                                        std::size_t out_depth) = 0;
};

// A prompt as assembled by the pipeline. `question` and `contexts` are the
// exact substrings that were substituted into `text`; remote generators only
// send `text`.
struct Prompt {
    std::string text;
    std::string question;
    std::vector<std::string> contexts;
};

struct GenerationResult {
    std::string text;
    std::optional<double> ttft_ms;
    std::optional<double> tpot_ms;
    std::uint32_t tokens = 0;
};

class Generator {
 public:
    virtual ~Generator() = default;
    virtual GenerationResult generate(const Prompt& prompt, std::size_t max_tokens) = 0;
};

}  // namespace ragbench::pipeline
