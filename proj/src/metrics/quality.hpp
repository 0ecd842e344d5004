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

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pipeline/types.hpp"

namespace ragbench::metrics {

enum class RecallMode { kRecall, kPrecision };

std::string_view recall_mode_name(RecallMode m);
std::optional<RecallMode> parse_recall_mode(std::string_view s);

// kRecall: |retrieved ∩ relevant| / |relevant|.
// kPrecision: |retrieved ∩ relevant| / |retrieved|.
// Throws EmptyDenominator.
double context_recall(const std::set<ChunkId>& retrieved, const std::set<ChunkId>& relevant,
                      RecallMode mode = RecallMode::kRecall);

// Lowercased word tokens (punctuation is a separator).
std::vector<std::string> normalized_tokens(std::string_view s);
bool is_stopword(std::string_view lowercase_token);

// Single-token expected answers score 1 when the token occurs in the answer,
// else 0; longer answers score token-level F1. Throws InvalidArgument on an
// empty expected answer.
double reference_query_accuracy(std::string_view answer, std::string_view expected);

// Fraction of answer sentences whose content tokens are at least 75% present
// in the joined contexts. nullopt for the NO-CONTEXT sentinel, which is
// excluded from aggregation.
std::optional<double> reference_factual_consistency(std::string_view answer, std::span<const std::string> contexts);

inline constexpr double kClaimSupportThreshold = 0.75;

class Judge {
 public:
    virtual ~Judge() = default;
    virtual std::string name() const = 0;
    virtual double query_accuracy(std::string_view answer, std::string_view expected) = 0;
    virtual std::optional<double> factual_consistency(std::string_view answer,
                                                      std::span<const std::string> contexts) = 0;
};

class ReferenceJudge final : public Judge {
 public:
    std::string name() const override { return "reference"; }
    double query_accuracy(std::string_view answer, std::string_view expected) override {
        return reference_query_accuracy(answer, expected);
    }
    std::optional<double> factual_consistency(std::string_view answer, std::span<const std::string> contexts) override {
        return reference_factual_consistency(answer, contexts);
    }
};

}  // namespace ragbench::metrics
