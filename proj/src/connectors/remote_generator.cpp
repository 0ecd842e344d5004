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

#include "connectors/remote_generator.hpp"

#include <nlohmann/json.hpp>

#include "common/clock.hpp"
#include "connectors/wire.hpp"

namespace ragbench::connectors {

RemoteGenerator::RemoteGenerator(std::shared_ptr<HttpEndpoint> endpoint) : endpoint_(std::move(endpoint)) {
    if (!endpoint_) fail(Errc::kInvalidArgument, "remote generator needs an endpoint");
}

pipeline::GenerationResult RemoteGenerator::generate(const pipeline::Prompt& prompt, std::size_t max_tokens) {
    nlohmann::json req;
    req["model"] = endpoint_->config().model;
    req["prompt"] = prompt.text;
    req["max_tokens"] = max_tokens;
    req["stream"] = true;

    pipeline::GenerationResult out;
    SseParser parser;
    bool done = false;
    std::string bad_event;
    std::int64_t first_ns = 0;
    const std::int64_t send_ns = monotonic_ns();
    const auto stream = endpoint_->post_stream(std::string(wire::kCompletionsPath), req.dump(), [&](std::string_view bytes) {
        parser.feed(bytes, [&](const std::string& data) {
            if (done) return;
            if (data == wire::kSseDone) {
                done = true;
                return;
            }
            const auto j = nlohmann::json::parse(data, nullptr, false);
            if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
                bad_event = data.substr(0, 120);
                return;
            }
            const auto delta = j["choices"][0].value("text", std::string());
            if (delta.empty()) return;
            if (out.tokens == 0) first_ns = monotonic_ns();
            ++out.tokens;
            out.text += delta;
        });
        return true;
    });
    const std::int64_t end_ns = monotonic_ns();

    if (stream.status != 0 && (stream.status < 200 || stream.status >= 300)) {
        throw_remote({stream.status, stream.error_body}, "completions");
    }
    if (!bad_event.empty()) fail(Errc::kRemoteError, "completions: malformed stream event: " + bad_event);
    if (!done) {
        if (stream.timed_out && out.tokens == 0) fail(Errc::kTimeout, "completions: no response before timeout");
        throw StreamAborted("completions: stream ended after " + std::to_string(out.tokens) + " tokens without [DONE]",
                            out.text);
    }
    if (out.tokens > 0) out.ttft_ms = static_cast<double>(first_ns - send_ns) / 1e6;
    if (out.tokens > 1) {
        out.tpot_ms = static_cast<double>(end_ns - first_ns) / 1e6 / static_cast<double>(out.tokens - 1);
    }
    return out;
}

}  // namespace ragbench::connectors
