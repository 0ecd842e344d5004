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

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "metrics/quality.hpp"
#include "pipeline/interfaces.hpp"
#include "workload/mutator.hpp"

namespace ragbench::connectors {

struct GeneratorServeOptions {
    std::uint32_t first_token_delay_ms = 0;
    std::uint32_t inter_token_delay_ms = 0;
    // Close the connection after this many tokens without the terminator.
    std::optional<std::uint32_t> abort_after_tokens;
};

// In-process HTTP server on 127.0.0.1 exposing local components over the
// same wire contracts the remote clients speak. Used for conformance tests.
class LoopbackServer {
 public:
    LoopbackServer();
    ~LoopbackServer();
    LoopbackServer(const LoopbackServer&) = delete;
    LoopbackServer& operator=(const LoopbackServer&) = delete;

    // Registration must happen before start().
    void serve_embedder(std::shared_ptr<pipeline::Embedder> embedder);
    void serve_generator(std::shared_ptr<pipeline::Generator> generator, GeneratorServeOptions options = {});
    void serve_store(std::shared_ptr<pipeline::VectorStore> store, pipeline::StoreCapabilities declared = {});
    void serve_metrics(std::function<std::string()> exposition);
    void serve_judge(std::shared_ptr<metrics::Judge> judge);
    void serve_mutator(std::shared_ptr<workload::Mutator> mutator);

    // Binds an ephemeral port and serves on a background thread.
    void start();
    void stop();

    int port() const;
    std::string url() const;
    // Highest number of requests handled at once.
    std::size_t peak_concurrency() const;
    std::uint64_t requests() const;

 private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Recovers question and contexts from a prompt's text for the template
// generator: the line holding the fill-in-the-blank question, and the rest
// split on the context delimiter.
pipeline::Prompt prompt_from_text(const std::string& text);

}  // namespace ragbench::connectors
