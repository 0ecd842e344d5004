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
#include <string_view>
#include <vector>

namespace ragbench {

// Chunk ids pack (file ordinal, chunk index, version) so that every version
// of every chunk has a distinct id that the workload generator and the
// pipeline derive independently.
using ChunkId = std::uint64_t;

inline constexpr int kChunkVersionBits = 20;
inline constexpr int kChunkIndexBits = 16;
inline constexpr int kFileOrdinalBits = 64 - kChunkVersionBits - kChunkIndexBits;
inline constexpr std::uint64_t kMaxChunkVersion = (1ULL << kChunkVersionBits) - 1;
inline constexpr std::uint64_t kMaxChunkIndex = (1ULL << kChunkIndexBits) - 1;
inline constexpr std::uint64_t kMaxFileOrdinal = (1ULL << kFileOrdinalBits) - 1;

ChunkId make_chunk_id(std::uint64_t file_ordinal, std::uint64_t chunk_index, std::uint64_t version);

inline std::uint64_t chunk_file_ordinal(ChunkId id) { return id >> (kChunkVersionBits + kChunkIndexBits); }
inline std::uint64_t chunk_index_of(ChunkId id) { return (id >> kChunkVersionBits) & kMaxChunkIndex; }
inline std::uint64_t chunk_version_of(ChunkId id) { return id & kMaxChunkVersion; }

struct Document {
    std::string file_id;
    std::string title;
    std::string body;
};

struct Chunk {
    ChunkId chunk_id = 0;
    std::string file_id;
    std::size_t start = 0;  // byte offsets of the core span in the parent body
    std::size_t end = 0;
    std::string text;            // core text; equals body[start,end) at version 0
    std::string context_prefix;  // overlap text prepended for embedding (separator chunker)
    std::uint32_t version = 0;

    std::string retrieval_text() const { return context_prefix.empty() ? text : context_prefix + text; }
};

using Vector = std::vector<double>;

enum class Metric : std::uint8_t { kCosine = 0, kL2 = 1 };

struct RetrievalCandidate {
    ChunkId id = 0;
    double score = 0.0;  // higher is better; negated squared distance under l2

    friend bool operator==(const RetrievalCandidate&, const RetrievalCandidate&) = default;
};

enum class Stage : std::uint8_t { kChunk, kEmbed, kInsert, kBuildIndex, kRetrieve, kRerank, kPrompt, kGenerate, kRemove };

std::string_view stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view name);

struct StageTiming {
    Stage stage = Stage::kEmbed;
    std::int64_t start_ns = 0;  // monotonic
    std::int64_t end_ns = 0;
    std::uint32_t batch_size = 1;

    std::int64_t duration_ns() const { return end_ns - start_ns; }
};

enum class IndexKind : std::uint8_t { kFlat = 0, kIvf = 1, kHybridIvf = 2 };

struct IndexSpec {
    IndexKind kind = IndexKind::kHybridIvf;
    std::uint32_t nlist = 16;
    std::uint32_t nprobe = 4;
    Metric metric = Metric::kCosine;
    std::uint32_t buffer_threshold = 1024;
    // Graph parameters are accepted for config compatibility; the reference
    // backends do not build graphs.
    std::uint32_t graph_m = 16;
    std::uint32_t ef_construction = 200;
    std::uint64_t seed = 0;
};

void validate(const IndexSpec& spec);

struct QuerySpec {
    std::uint32_t k = 5;
    std::uint32_t rerank_out = 3;
    std::string prompt_template = "Answer the question using the context.\nContext:\n{contexts}\nQuestion: {question}\nAnswer:";
};

void validate(const QuerySpec& spec);

std::string_view index_kind_name(IndexKind k);
std::string_view metric_name(Metric m);

}  // namespace ragbench
