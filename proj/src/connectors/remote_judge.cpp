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

#include "connectors/remote_judge.hpp"

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "connectors/wire.hpp"

namespace ragbench::connectors {

RemoteJudge::RemoteJudge(std::shared_ptr<HttpEndpoint> endpoint) : endpoint_(std::move(endpoint)) {
    if (!endpoint_) fail(Errc::kInvalidArgument, "remote judge needs an endpoint");
}

std::optional<double> RemoteJudge::score(const std::string& body) {
    const auto resp = endpoint_->post(std::string(wire::kJudgePath), body, true);
    if (resp.status < 200 || resp.status >= 300) throw_remote(resp, "judge");
    const auto j = nlohmann::json::parse(resp.body, nullptr, false);
    if (j.is_discarded() || !j.contains("score")) fail(Errc::kRemoteError, "judge: response has no score");
    if (j["score"].is_null()) return std::nullopt;
    const double s = j["score"].get<double>();
    if (!(s >= 0.0 && s <= 1.0)) fail(Errc::kRemoteError, "judge: score outside [0, 1]");
    return s;
}

double RemoteJudge::query_accuracy(std::string_view answer, std::string_view expected) {
    nlohmann::json b{{"metric", "query_accuracy"}, {"answer", answer}, {"expected", expected}};
    auto s = score(b.dump());
    if (!s) fail(Errc::kRemoteError, "judge: null query accuracy");
    return *s;
}

std::optional<double> RemoteJudge::factual_consistency(std::string_view answer, std::span<const std::string> contexts) {
    nlohmann::json b{{"metric", "factual_consistency"},
                     {"answer", answer},
                     {"contexts", std::vector<std::string>(contexts.begin(), contexts.end())}};
    return score(b.dump());
}

}  // namespace ragbench::connectors
