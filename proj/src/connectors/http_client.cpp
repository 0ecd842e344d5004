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

#include <httplib.h>

#include <chrono>
#include <thread>

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "connectors/endpoint.hpp"

namespace ragbench::connectors {

namespace {

class SlotGuard {
 public:
    explicit SlotGuard(InFlightGate& g) : g_(g) { g_.acquire(); }
    ~SlotGuard() { g_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

 private:
    InFlightGate& g_;
};

bool transient_status(int status) { return status == 429 || status >= 500; }

}  // namespace

void validate(const EndpointConfig& cfg) {
    if (cfg.base_url.empty()) fail(Errc::kInvalidArgument, "endpoint url is empty");
    if (cfg.max_in_flight < 1) fail(Errc::kInvalidArgument, "endpoint max_in_flight must be >= 1");
    if (cfg.timeout_ms < 1) fail(Errc::kInvalidArgument, "endpoint timeout_ms must be >= 1");
}

void InFlightGate::acquire() {
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return held_ < limit_; });
    ++held_;
    std::size_t prev = peak_.load();
    while (held_ > prev && !peak_.compare_exchange_weak(prev, held_)) {
    }
}

void InFlightGate::release() {
    {
        std::scoped_lock lk(mu_);
        --held_;
    }
    cv_.notify_one();
}

struct HttpEndpoint::Impl {
    std::string scheme_host_port;
    std::string prefix;

    std::unique_ptr<httplib::Client> client(const EndpointConfig& cfg) const {
        auto c = std::make_unique<httplib::Client>(scheme_host_port);
        const auto t = std::chrono::milliseconds(cfg.timeout_ms);
        c->set_connection_timeout(t);
        c->set_read_timeout(t);
        c->set_write_timeout(t);
        if (cfg.auth_token) c->set_bearer_token_auth(*cfg.auth_token);
        return c;
    }
};

HttpEndpoint::HttpEndpoint(EndpointConfig cfg)
    : cfg_(std::move(cfg)), gate_((validate(cfg_), cfg_.max_in_flight)), impl_(std::make_unique<Impl>()) {
    const auto scheme_end = cfg_.base_url.find("://");
    const auto host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_begin = cfg_.base_url.find('/', host_begin);
    if (path_begin == std::string::npos) {
        impl_->scheme_host_port = cfg_.base_url;
    } else {
        impl_->scheme_host_port = cfg_.base_url.substr(0, path_begin);
        impl_->prefix = cfg_.base_url.substr(path_begin);
        while (!impl_->prefix.empty() && impl_->prefix.back() == '/') impl_->prefix.pop_back();
    }
}

HttpEndpoint::~HttpEndpoint() = default;

HttpResponse HttpEndpoint::post(const std::string& path, const std::string& body, bool idempotent) {
    return request("POST", path, body, idempotent);
}

HttpResponse HttpEndpoint::get(const std::string& path, bool idempotent) { return request("GET", path, {}, idempotent); }

HttpResponse HttpEndpoint::request(const std::string& method, const std::string& path, const std::string& body,
                                   bool idempotent) {
    const std::uint32_t max_attempts = idempotent ? cfg_.max_retries + 1 : 1;
    const std::string full = impl_->prefix + path;
    std::string last_error;
    bool last_timeout = false;
    for (std::uint32_t attempt = 0; attempt < max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(std::uint64_t{cfg_.backoff_base_ms} << (attempt - 1)));
        }
        ++attempts_;
        httplib::Result res;
        {
            SlotGuard slot(gate_);
            auto cli = impl_->client(cfg_);
            res = method == "GET" ? cli->Get(full) : cli->Post(full, body, "application/json");
        }
        if (!res) {
            const auto err = res.error();
            last_timeout = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout ||
                           err == httplib::Error::Write;
            last_error = httplib::to_string(err);
            continue;
        }
        if (transient_status(res->status) && attempt + 1 < max_attempts) continue;
        return {res->status, res->body};
    }
    fail(last_timeout ? Errc::kTimeout : Errc::kRemoteError,
         method + " " + cfg_.base_url + path + " failed: " + last_error);
}

StreamOutcome HttpEndpoint::post_stream(const std::string& path, const std::string& body,
                                        const std::function<bool(std::string_view)>& on_data) {
    StreamOutcome out;
    SlotGuard slot(gate_);
    ++attempts_;
    auto cli = impl_->client(cfg_);
    httplib::Request req;
    req.method = "POST";
    req.path = impl_->prefix + path;
    req.body = body;
    req.set_header("Content-Type", "application/json");
    req.set_header("Accept", "text/event-stream");
    int status = 0;
    req.response_handler = [&](const httplib::Response& r) {
        status = r.status;
        return true;
    };
    req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t, std::uint64_t) {
        if (status < 200 || status >= 300) {
            out.error_body.append(data, len);
            return true;
        }
        return on_data(std::string_view(data, len));
    };
    auto res = cli->send(req);
    out.status = status;
    if (!res) {
        const auto err = res.error();
        if (err != httplib::Error::Canceled) {
            out.transport_error = true;
            out.timed_out = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout;
        }
    } else {
        out.status = res->status;
    }
    return out;
}

void throw_remote(const HttpResponse& r, std::string_view what) {
    const auto parsed = nlohmann::json::parse(r.body, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object() && parsed.contains("error") && parsed["error"].is_object()) {
        const auto& e = parsed["error"];
        const auto code = errc_from_name(e.value("code", std::string()));
        const auto message = e.value("message", std::string());
        if (code && *code != Errc::kOk) throw Error(*code, std::string(what) + ": " + message);
    }
    fail(Errc::kRemoteError,
         std::string(what) + ": status " + std::to_string(r.status) + ": " + r.body.substr(0, 200));
}

}  // namespace ragbench::connectors
