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

#include "pipeline/types.hpp"

#include "common/error.hpp"

namespace ragbench {

ChunkId make_chunk_id(std::uint64_t file_ordinal, std::uint64_t chunk_index, std::uint64_t version) {
    if (file_ordinal > kMaxFileOrdinal || chunk_index > kMaxChunkIndex || version > kMaxChunkVersion) {
        fail(Errc::kInvalidArgument, "chunk id component out of range (file " + std::to_string(file_ordinal) +
                                         ", chunk " + std::to_string(chunk_index) + ", version " +
                                         std::to_string(version) + ")");
    }
    return (file_ordinal << (kChunkVersionBits + kChunkIndexBits)) | (chunk_index << kChunkVersionBits) | version;
}

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::kChunk: return "chunk";
        case Stage::kEmbed: return "embed";
        case Stage::kInsert: return "insert";
        case Stage::kBuildIndex: return "build_index";
        case Stage::kRetrieve: return "retrieve";
        case Stage::kRerank: return "rerank";
        case Stage::kPrompt: return "prompt";
        case Stage::kGenerate: return "generate";
        case Stage::kRemove: return "remove";
    }
    return "unknown";
}

std::optional<Stage> parse_stage(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(Stage::kRemove); ++i) {
        if (stage_name(static_cast<Stage>(i)) == name) return static_cast<Stage>(i);
    }
    return std::nullopt;
}

std::string_view index_kind_name(IndexKind k) {
    switch (k) {
        case IndexKind::kFlat: return "flat";
        case IndexKind::kIvf: return "ivf";
        case IndexKind::kHybridIvf: return "hybrid_ivf";
    }
    return "unknown";
}

std::string_view metric_name(Metric m) { return m == Metric::kCosine ? "cosine" : "l2"; }

void validate(const IndexSpec& spec) {
    if (spec.nlist < 1 || spec.nprobe < 1 || spec.nprobe > spec.nlist) {
        fail(Errc::kInvalidArgument, "index requires 1 <= nprobe <= nlist");
    }
    if (spec.buffer_threshold < 1) fail(Errc::kInvalidArgument, "buffer_threshold must be >= 1");
}

void validate(const QuerySpec& spec) {
    if (spec.k < 1) fail(Errc::kInvalidArgument, "retrieval depth k must be >= 1");
    if (spec.rerank_out < 1 || spec.rerank_out > spec.k) {
        fail(Errc::kInvalidArgument, "rerank_out must satisfy 1 <= rerank_out <= k");
    }
}

}  // namespace ragbench
