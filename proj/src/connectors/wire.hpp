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

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "common/error.hpp"

// JSON shapes shared by the remote clients and the loopback servers.
namespace ragbench::connectors::wire {

inline constexpr std::string_view kEmbeddingsPath = "/v1/embeddings";
inline constexpr std::string_view kCompletionsPath = "/v1/completions";
inline constexpr std::string_view kMetricsPath = "/metrics";
inline constexpr std::string_view kJudgePath = "/v1/judge";
inline constexpr std::string_view kMutatePath = "/v1/mutate";
inline constexpr std::string_view kSseDone = "[DONE]";

inline std::string error_body(Errc code, std::string_view message) {
    nlohmann::json j;
    j["error"] = {{"code", errc_name(code)}, {"message", message}};
    return j.dump();
}

inline int http_status_for(Errc code) {
    switch (code) {
        case Errc::kUnknownFileId: return 404;
        case Errc::kUnsupported: return 501;
        case Errc::kInternal: return 500;
        default: return 400;
    }
}

}  // namespace ragbench::connectors::wire
