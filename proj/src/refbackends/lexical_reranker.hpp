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

#include "pipeline/interfaces.hpp"

namespace ragbench::ref {

// Score = |question tokens ∩ candidate tokens| / |question tokens| over
// lowercased token sets; stable descending sort keeps retrieval order on ties.
class LexicalReranker final : public pipeline::Reranker {
 public:
    std::vector<ChunkId> rerank(std::string_view question, std::span<const pipeline::RerankInput> candidates,
                                std::size_t out_depth) override;

    static double overlap_score(std::string_view question, std::string_view candidate);
};

}  // namespace ragbench::ref
