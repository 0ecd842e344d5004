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

#include <string_view>

#include "pipeline/interfaces.hpp"

namespace ragbench::ref {

inline constexpr std::string_view kNoContextAnswer = "NO-CONTEXT";
inline constexpr std::string_view kBlankMarker = "____";
inline constexpr std::string_view kQuestionPrefix = "Fill in the blank: ";

// Deterministic generator for fill-in-the-blank questions. Picks the context
// sentence with the largest token overlap with the question and answers
// with the token sitting where the blank sits in the question's frame.
// Falls back to the whole sentence when the frame does not align.
class TemplateGenerator final : public pipeline::Generator {
 public:
    static constexpr double kTtftMsPerPromptToken = 0.02;
    static constexpr double kTpotMsPerAnswerToken = 0.01;

    pipeline::GenerationResult generate(const pipeline::Prompt& prompt, std::size_t max_tokens) override;
};

}  // namespace ragbench::ref
