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
#include <string>
#include <string_view>
#include <vector>

namespace ragbench::text {

struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
inline bool is_word_byte(unsigned char c) noexcept {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

inline bool is_digit(unsigned char c) noexcept { return c >= '0' && c <= '9'; }
inline bool is_upper(unsigned char c) noexcept { return c >= 'A' && c <= 'Z'; }

// Maximal runs of word bytes.
std::vector<TokenSpan> word_spans(std::string_view s);

std::vector<std::string> tokens(std::string_view s, bool lowercase);

std::string to_lower(std::string_view s);

// Sentence spans: a sentence ends after '.', '!' or '?' that is followed by
// whitespace (or at end of text). Spans exclude surrounding whitespace and
// empty sentences are skipped.
std::vector<TokenSpan> sentence_spans(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace ragbench::text
