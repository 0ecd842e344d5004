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

#include <memory>

#include "connectors/endpoint.hpp"
#include "metrics/quality.hpp"

namespace ragbench::connectors {

// Quality judge served remotely (for example an LLM-backed evaluator):
// POST {metric, answer, expected | contexts} -> {score: number | null}.
class RemoteJudge final : public metrics::Judge {
 public:
    explicit RemoteJudge(std::shared_ptr<HttpEndpoint> endpoint);

    std::string name() const override { return "remote"; }
    double query_accuracy(std::string_view answer, std::string_view expected) override;
    std::optional<double> factual_consistency(std::string_view answer, std::span<const std::string> contexts) override;

 private:
    std::optional<double> score(const std::string& body);

    std::shared_ptr<HttpEndpoint> endpoint_;
};

}  // namespace ragbench::connectors
