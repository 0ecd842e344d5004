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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace ragbench::connectors {

struct EndpointConfig {
    std::string base_url;  // scheme://host:port, optional path prefix
    std::uint32_t timeout_ms = 10000;
    std::uint32_t max_retries = 2;
    std::uint32_t backoff_base_ms = 50;
    std::size_t max_in_flight = 8;
    std::optional<std::string> auth_token;
    std::string model = "reference";
};

void validate(const EndpointConfig& cfg);

// Counting semaphore that also records the highest concurrent holder count.
class InFlightGate {
 public:
    explicit InFlightGate(std::size_t limit) : limit_(limit) {}

    void acquire();
    void release();
    std::size_t peak() const { return peak_.load(); }
    std::size_t limit() const { return limit_; }

 private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::size_t limit_;
    std::size_t held_ = 0;
    std::atomic<std::size_t> peak_{0};
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

struct StreamOutcome {
    int status = 0;
    bool transport_error = false;  // connection dropped or timed out mid-body
    bool timed_out = false;
    std::string error_body;        // non-2xx response body
};

// HTTP/1.1 client for one service. Safe to share across threads; each call
// holds one in-flight slot for the duration of each attempt.
class HttpEndpoint {
 public:
    explicit HttpEndpoint(EndpointConfig cfg);
    ~HttpEndpoint();

    // Transient failures (transport errors, 429, 5xx) are retried with
    // exponential backoff only when `idempotent`. Transport failures that
    // exhaust the attempts raise Timeout or RemoteError; HTTP error statuses
    // are returned to the caller.
    HttpResponse post(const std::string& path, const std::string& body, bool idempotent);
    HttpResponse get(const std::string& path, bool idempotent);

    // Single attempt; `on_data` receives body bytes as they arrive and may
    // return false to stop reading.
    StreamOutcome post_stream(const std::string& path, const std::string& body,
                              const std::function<bool(std::string_view)>& on_data);

    const EndpointConfig& config() const { return cfg_; }
    std::size_t peak_in_flight() const { return gate_.peak(); }
    std::uint64_t attempts() const { return attempts_.load(); }

 private:
    struct Impl;
    HttpResponse request(const std::string& method, const std::string& path, const std::string& body, bool idempotent);

    EndpointConfig cfg_;
    InFlightGate gate_;
    std::atomic<std::uint64_t> attempts_{0};
    std::unique_ptr<Impl> impl_;
};

// Raises RemoteError(status, body excerpt), or the error code named in a
// {"error": {"code", "message"}} body when it is a known one.
[[noreturn]] void throw_remote(const HttpResponse& r, std::string_view what);

}  // namespace ragbench::connectors
