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

#include "refbackends/template_generator.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "common/text.hpp"

namespace ragbench::ref {

namespace {

struct Sentence {
    std::string_view text;
    std::vector<text::TokenSpan> spans;
    std::vector<std::string> lower;
};

Sentence make_sentence(std::string_view s) {
    Sentence out{s, text::word_spans(s), {}};
    for (const auto& sp : out.spans) out.lower.push_back(text::to_lower(s.substr(sp.begin, sp.end - sp.begin)));
    return out;
}

}  // namespace

pipeline::GenerationResult TemplateGenerator::generate(const pipeline::Prompt& prompt, std::size_t max_tokens) {
    pipeline::GenerationResult result;
    const auto prompt_tokens = text::word_spans(prompt.text).size();
    result.ttft_ms = kTtftMsPerPromptToken * static_cast<double>(prompt_tokens);

    std::vector<Sentence> sentences;
    for (const auto& ctx : prompt.contexts) {
        std::string_view c(ctx);
        for (const auto& sp : text::sentence_spans(c)) sentences.push_back(make_sentence(c.substr(sp.begin, sp.end - sp.begin)));
    }

    std::string answer;
    if (sentences.empty()) {
        answer = kNoContextAnswer;
    } else {
        std::string_view frame(prompt.question);
        if (frame.starts_with(kQuestionPrefix)) frame.remove_prefix(kQuestionPrefix.size());
        const auto blank = frame.find(kBlankMarker);
        const auto left = text::tokens(frame.substr(0, blank == std::string_view::npos ? frame.size() : blank), true);
        const auto right = blank == std::string_view::npos
                               ? std::vector<std::string>{}
                               : text::tokens(frame.substr(blank + kBlankMarker.size()), true);
        std::set<std::string> qset(left.begin(), left.end());
        qset.insert(right.begin(), right.end());

        std::size_t best = 0;
        std::size_t best_overlap = 0;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            std::set<std::string> sset(sentences[i].lower.begin(), sentences[i].lower.end());
            std::size_t overlap = 0;
            for (const auto& t : qset) overlap += sset.count(t);
            if (overlap > best_overlap) {
                best_overlap = overlap;
                best = i;
            }
        }
        const Sentence& s = sentences[best];

        std::size_t best_pos = 0;
        std::size_t best_align = 0;
        if (blank != std::string_view::npos) {
            for (std::size_t j = 0; j < s.lower.size(); ++j) {
                std::size_t l = 0;
                while (l < left.size() && l < j && s.lower[j - 1 - l] == left[left.size() - 1 - l]) ++l;
                std::size_t r = 0;
                while (r < right.size() && j + 1 + r < s.lower.size() && s.lower[j + 1 + r] == right[r]) ++r;
                if (l + r > best_align) {
                    best_align = l + r;
                    best_pos = j;
                }
            }
        }
        if (best_align > 0) {
            const auto& sp = s.spans[best_pos];
            answer = std::string(s.text.substr(sp.begin, sp.end - sp.begin));
        } else {
            answer = std::string(s.text);
        }
    }

    auto spans = text::word_spans(answer);
    if (max_tokens > 0 && spans.size() > max_tokens) {
        answer.resize(spans[max_tokens - 1].end);
        spans.resize(max_tokens);
    }
    result.tokens = static_cast<std::uint32_t>(std::max<std::size_t>(spans.size(), 1));
    if (result.tokens > 1) result.tpot_ms = kTpotMsPerAnswerToken;
    result.text = std::move(answer);
    return result;
}

}  // namespace ragbench::ref
