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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "common/rng.hpp"
#include "pipeline/types.hpp"

namespace ragbench::workload {

struct MutationResult {
    std::string mutated_text;
    // Byte range of the replaced token in the original text. In the mutated
    // text the replacement starts at span_begin.
    std::size_t span_begin = 0;
    std::size_t span_end = 0;
    std::string original_token;
    std::string replacement_token;

    friend bool operator==(const MutationResult&, const MutationResult&) = default;
};

class Mutator {
 public:
    virtual ~Mutator() = default;
    // Throws NoMutableToken when the text has nothing to replace.
    virtual MutationResult mutate(std::string_view text, Rng& rng) = 0;
};

enum class TokenClass { kNumeric, kCapitalized };

struct MutableToken {
    std::size_t begin = 0;
    std::size_t end = 0;
    TokenClass cls = TokenClass::kNumeric;
};

// First run of ASCII digits; otherwise the longest (first on ties) token
// that starts with an uppercase letter and does not open a sentence.
std::optional<MutableToken> select_mutable_token(std::string_view text);

// Rule-based stand-in for a masked-language-model rewrite: numbers become a
// different digit string of the same length, capitalized words are swapped
// for an entry of a fixed substitution list.
class ReferenceMutator final : public Mutator {
 public:
    MutationResult mutate(std::string_view text, Rng& rng) override;
};

MutationResult mutate_chunk(std::string_view text, Rng& rng);

}  // namespace ragbench::workload
