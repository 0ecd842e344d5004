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

#include "refbackends/lexical_reranker.hpp"

#include <algorithm>
#include <set>

#include "common/error.hpp"
#include "common/text.hpp"

namespace ragbench::ref {

namespace {
std::set<std::string> token_set(std::string_view s) {
    auto toks = text::tokens(s, true);
    return {toks.begin(), toks.end()};
}

double score_against(const std::set<std::string>& q, std::string_view candidate) {
    if (q.empty()) return 0.0;
    const auto c = token_set(candidate);
    std::size_t hits = 0;
    for (const auto& t : q) hits += c.count(t);
    return static_cast<double>(hits) / static_cast<double>(q.size());
}
}  // namespace

double LexicalReranker::overlap_score(std::string_view question, std::string_view candidate) {
    return score_against(token_set(question), candidate);
}

std::vector<ChunkId> LexicalReranker::rerank(std::string_view question,
                                             std::span<const pipeline::RerankInput> candidates,
                                             std::size_t out_depth) {
    if (out_depth < 1) fail(Errc::kInvalidArgument, "rerank out_depth must be >= 1");
    const auto q = token_set(question);
    std::vector<std::pair<double, ChunkId>> scored;
    scored.reserve(candidates.size());
    for (const auto& c : candidates) scored.emplace_back(score_against(q, c.text), c.id);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<ChunkId> out;
    for (std::size_t i = 0; i < scored.size() && i < out_depth; ++i) out.push_back(scored[i].second);
    return out;
}

}  // namespace ragbench::ref
