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
#include <string>

#include "common/error.hpp"
#include "connectors/endpoint.hpp"
#include "pipeline/interfaces.hpp"

namespace ragbench::connectors {

// Raised when a token stream ends before its terminator; carries the text
// received so far.
class StreamAborted : public Error {
 public:
    StreamAborted(const std::string& message, std::string partial)
        : Error(Errc::kStreamAborted, message), partial_(std::move(partial)) {}
    const std::string& partial_text() const { return partial_; }

 private:
    std::string partial_;
};

// Client for a streaming completions service. TTFT and TPOT are measured on
// the client from the arriving stream; calls are never retried.
class RemoteGenerator final : public pipeline::Generator {
 public:
    explicit RemoteGenerator(std::shared_ptr<HttpEndpoint> endpoint);

    pipeline::GenerationResult generate(const pipeline::Prompt& prompt, std::size_t max_tokens) override;

 private:
    std::shared_ptr<HttpEndpoint> endpoint_;
};

// Incremental parser for "data: <payload>" server-sent events.
class SseParser {
 public:
    // Feeds bytes; invokes `on_event` for each complete data payload. CR is
    // dropped so CRLF and LF framing parse the same.
    template <typename F>
    void feed(std::string_view bytes, F&& on_event) {
        for (char ch : bytes)
            if (ch != '\r') buf_.push_back(ch);
        for (;;) {
            auto end = buf_.find("\n\n");
            if (end == std::string::npos) return;
            std::string event = buf_.substr(0, end);
            buf_.erase(0, end + 2);
            std::string data;
            std::size_t pos = 0;
            while (pos <= event.size()) {
                auto nl = event.find('\n', pos);
                if (nl == std::string::npos) nl = event.size();
                std::string_view line(event.data() + pos, nl - pos);
                if (line.starts_with("data:")) {
                    line.remove_prefix(5);
                    if (!line.empty() && line.front() == ' ') line.remove_prefix(1);
                    if (!data.empty()) data.push_back('\n');
                    data.append(line);
                }
                pos = nl + 1;
            }
            on_event(data);
        }
    }

 private:
    std::string buf_;
};

}  // namespace ragbench::connectors
