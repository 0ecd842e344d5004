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

#include "metrics/quality.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "common/error.hpp"
#include "common/text.hpp"
#include "refbackends/template_generator.hpp"

namespace ragbench::metrics {

namespace {

const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> words = {
        "a",     "about", "above", "after", "again", "all",   "also",  "am",    "an",    "and",   "any",
        "are",   "as",    "at",    "be",    "been",  "being", "but",   "by",    "can",   "could", "did",
        "do",    "does",  "for",   "from",  "had",   "has",   "have",  "he",    "her",   "here",  "his",
        "how",   "i",     "if",    "in",    "into",  "is",    "it",    "its",   "may",   "me",    "more",
        "most",  "my",    "no",    "not",   "of",    "on",    "or",    "our",   "out",   "she",   "so",
        "some",  "such",  "than",  "that",  "the",   "their", "them",  "then",  "there", "these", "they",
        "this",  "those", "to",    "too",   "under", "up",    "very",  "was",   "we",    "were",  "what",
        "when",  "where", "which", "while", "who",   "whom",  "why",   "will",  "with",  "would", "you",
        "your",
    };
    return words;
}

}  // namespace

std::string_view recall_mode_name(RecallMode m) { return m == RecallMode::kRecall ? "recall" : "precision"; }

std::optional<RecallMode> parse_recall_mode(std::string_view s) {
    if (s == "recall") return RecallMode::kRecall;
    if (s == "precision") return RecallMode::kPrecision;
    return std::nullopt;
}

double context_recall(const std::set<ChunkId>& retrieved, const std::set<ChunkId>& relevant, RecallMode mode) {
    const auto& denom = mode == RecallMode::kRecall ? relevant : retrieved;
    if (denom.empty()) {
        fail(Errc::kEmptyDenominator,
             mode == RecallMode::kRecall ? "context recall with no relevant chunks" : "context precision with nothing retrieved");
    }
    std::size_t hit = 0;
    for (ChunkId id : retrieved) hit += relevant.count(id);
    return static_cast<double>(hit) / static_cast<double>(denom.size());
}

std::vector<std::string> normalized_tokens(std::string_view s) { return text::tokens(s, true); }

bool is_stopword(std::string_view lowercase_token) { return stopwords().count(lowercase_token) != 0; }

double reference_query_accuracy(std::string_view answer, std::string_view expected) {
    const auto exp = normalized_tokens(expected);
    if (exp.empty()) fail(Errc::kInvalidArgument, "expected answer has no tokens");
    const auto ans = normalized_tokens(answer);
    if (exp.size() == 1) return std::find(ans.begin(), ans.end(), exp.front()) != ans.end() ? 1.0 : 0.0;
    if (ans.empty()) return 0.0;

    std::map<std::string, std::size_t> counts;
    for (const auto& t : exp) ++counts[t];
    std::size_t common = 0;
    for (const auto& t : ans) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return 0.0;
    const double precision = static_cast<double>(common) / static_cast<double>(ans.size());
    const double recall = static_cast<double>(common) / static_cast<double>(exp.size());
    return 2.0 * precision * recall / (precision + recall);
}

std::optional<double> reference_factual_consistency(std::string_view answer, std::span<const std::string> contexts) {
    if (text::trim(answer) == ref::kNoContextAnswer) return std::nullopt;
    if (contexts.empty()) return 0.0;
    std::unordered_set<std::string> context_tokens;
    for (const auto& c : contexts) {
        for (auto& t : normalized_tokens(c)) context_tokens.insert(std::move(t));
    }

    std::size_t claims = 0;
    std::size_t supported = 0;
    for (const auto& span : text::sentence_spans(answer)) {
        auto toks = normalized_tokens(answer.substr(span.begin, span.end - span.begin));
        if (toks.empty()) continue;
        std::vector<std::string> content;
        for (const auto& t : toks) {
            if (!is_stopword(t)) content.push_back(t);
        }
        // A claim made only of stopwords is judged on all of its tokens.
        const auto& judged = content.empty() ? toks : content;
        std::size_t present = 0;
        for (const auto& t : judged) present += context_tokens.count(t);
        ++claims;
        if (static_cast<double>(present) >= kClaimSupportThreshold * static_cast<double>(judged.size())) ++supported;
    }
    if (claims == 0) return 0.0;
    return static_cast<double>(supported) / static_cast<double>(claims);
}

}  // namespace ragbench::metrics
