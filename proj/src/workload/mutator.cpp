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

#include "workload/mutator.hpp"

#include <array>

#include "common/error.hpp"
#include "common/text.hpp"

namespace ragbench::workload {

namespace {

constexpr std::array<std::string_view, 32> kSubstitutes = {
    "Avalon",   "Brightwater", "Caldera",  "Dunmore",   "Elmsworth", "Fairhaven", "Glenrock", "Harrowgate",
    "Ironvale", "Juniper",     "Kestrel",  "Lindqvist", "Marlowe",   "Northcote", "Oakhurst", "Pemberton",
    "Quillon",  "Ravensholt",  "Sorrento", "Thornbury", "Umberto",   "Valdris",   "Westmoor", "Xanthe",
    "Yarrow",   "Zephyrine",   "Ashcombe", "Bellamy",   "Corvina",   "Drummond",  "Everly",   "Fenwick",
};

}  // namespace

std::optional<MutableToken> select_mutable_token(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (text::is_digit(static_cast<unsigned char>(s[i]))) {
            std::size_t e = i;
            while (e < s.size() && text::is_digit(static_cast<unsigned char>(s[e]))) ++e;
            return MutableToken{i, e, TokenClass::kNumeric};
        }
    }
    std::optional<MutableToken> best;
    for (const auto& sentence : text::sentence_spans(s)) {
        const auto words = text::word_spans(s.substr(sentence.begin, sentence.end - sentence.begin));
        for (std::size_t w = 1; w < words.size(); ++w) {
            const std::size_t b = sentence.begin + words[w].begin;
            const std::size_t e = sentence.begin + words[w].end;
            if (!text::is_upper(static_cast<unsigned char>(s[b]))) continue;
            if (!best || e - b > best->end - best->begin) best = MutableToken{b, e, TokenClass::kCapitalized};
        }
    }
    return best;
}

MutationResult ReferenceMutator::mutate(std::string_view text, Rng& rng) {
    if (text.empty()) fail(Errc::kNoMutableToken, "empty chunk");
    const auto tok = select_mutable_token(text);
    if (!tok) fail(Errc::kNoMutableToken, "chunk has no numeric or capitalized non-initial token");

    MutationResult r;
    r.span_begin = tok->begin;
    r.span_end = tok->end;
    r.original_token = std::string(text.substr(tok->begin, tok->end - tok->begin));
    if (tok->cls == TokenClass::kNumeric) {
        const std::size_t len = r.original_token.size();
        const bool allow_leading_zero = len == 1 || r.original_token[0] == '0';
        do {
            r.replacement_token.clear();
            for (std::size_t i = 0; i < len; ++i) {
                const bool leading = i == 0 && !allow_leading_zero;
                const auto d = leading ? 1 + rng.below(9) : rng.below(10);
                r.replacement_token.push_back(static_cast<char>('0' + d));
            }
        } while (r.replacement_token == r.original_token);
    } else {
        std::size_t pick = static_cast<std::size_t>(rng.below(kSubstitutes.size()));
        if (kSubstitutes[pick] == r.original_token) pick = (pick + 1) % kSubstitutes.size();
        r.replacement_token = std::string(kSubstitutes[pick]);
    }
    r.mutated_text.reserve(text.size() + r.replacement_token.size());
    r.mutated_text.append(text.substr(0, tok->begin));
    r.mutated_text.append(r.replacement_token);
    r.mutated_text.append(text.substr(tok->end));
    return r;
}

MutationResult mutate_chunk(std::string_view text, Rng& rng) {
    ReferenceMutator m;
    return m.mutate(text, rng);
}

}  // namespace ragbench::workload
