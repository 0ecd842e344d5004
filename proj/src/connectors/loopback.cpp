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

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"
#include "connectors/loopback.hpp"
#include "connectors/wire.hpp"
#include "pipeline/pipeline.hpp"
#include "refbackends/template_generator.hpp"

namespace ragbench::connectors {

namespace {

void send_error(httplib::Response& res, const Error& e) {
    res.status = wire::http_status_for(e.code());
    res.set_content(wire::error_body(e.code(), e.what()), "application/json");
}

void send_json(httplib::Response& res, const nlohmann::json& j) { res.set_content(j.dump(), "application/json"); }

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t j = s.find(' ', i);
        if (j == std::string::npos) j = s.size();
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j + 1;
    }
    return out;
}

}  // namespace

pipeline::Prompt prompt_from_text(const std::string& raw) {
    pipeline::Prompt p;
    p.text = raw;
    std::string rest = raw;
    const auto q = raw.find(ref::kQuestionPrefix);
    if (q != std::string::npos) {
        auto e = raw.find('\n', q);
        if (e == std::string::npos) e = raw.size();
        p.question = raw.substr(q, e - q);
        rest = raw.substr(0, q) + raw.substr(e);
    }
    std::size_t pos = 0;
    const std::string delim(pipeline::kContextDelimiter);
    for (;;) {
        const auto d = rest.find(delim, pos);
        std::string piece = rest.substr(pos, d == std::string::npos ? std::string::npos : d - pos);
        if (!text::trim(piece).empty()) p.contexts.push_back(std::move(piece));
        if (d == std::string::npos) break;
        pos = d + delim.size();
    }
    return p;
}

struct LoopbackServer::Impl {
    httplib::Server server;
    std::thread thread;
    int port = -1;
    bool running = false;
    std::atomic<std::size_t> active{0};
    std::atomic<std::size_t> peak{0};
    std::atomic<std::uint64_t> total{0};

    template <typename F>
    httplib::Server::Handler wrap(F f) {
        return [this, f](const httplib::Request& req, httplib::Response& res) {
            const std::size_t now = ++active;
            ++total;
            std::size_t prev = peak.load();
            while (now > prev && !peak.compare_exchange_weak(prev, now)) {
            }
            try {
                const auto body = req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
                f(body, res);
            } catch (const Error& e) {
                send_error(res, e);
            } catch (const nlohmann::json::exception& e) {
                send_error(res, Error(Errc::kInvalidArgument, e.what()));
            } catch (const std::exception& e) {
                send_error(res, Error(Errc::kInternal, e.what()));
            }
            --active;
        };
    }
};

LoopbackServer::LoopbackServer() : impl_(std::make_unique<Impl>()) {}

LoopbackServer::~LoopbackServer() { stop(); }

void LoopbackServer::serve_embedder(std::shared_ptr<pipeline::Embedder> embedder) {
    impl_->server.Post(std::string(wire::kEmbeddingsPath),
                       impl_->wrap([embedder](const nlohmann::json& b, httplib::Response& res) {
                           const auto input = b.at("input").get<std::vector<std::string>>();
                           const auto vecs = embedder->embed(input);
                           nlohmann::json data = nlohmann::json::array();
                           for (std::size_t i = 0; i < vecs.size(); ++i) {
                               data.push_back({{"index", i}, {"embedding", vecs[i]}});
                           }
                           send_json(res, {{"object", "list"}, {"data", std::move(data)}});
                       }));
}

void LoopbackServer::serve_generator(std::shared_ptr<pipeline::Generator> generator, GeneratorServeOptions options) {
    impl_->server.Post(
        std::string(wire::kCompletionsPath),
        impl_->wrap([generator, options](const nlohmann::json& b, httplib::Response& res) {
            const auto prompt = prompt_from_text(b.at("prompt").get<std::string>());
            const auto max_tokens = b.value("max_tokens", std::size_t{64});
            auto words = split_words(generator->generate(prompt, max_tokens).text);
            res.set_chunked_content_provider(
                "text/event-stream",
                [words = std::move(words), options, sent = std::size_t{0}](std::size_t, httplib::DataSink& sink) mutable {
                    if (sent == 0 && options.first_token_delay_ms > 0) {
                        std::this_thread::sleep_for(std::chrono::milliseconds(options.first_token_delay_ms));
                    }
                    for (; sent < words.size(); ++sent) {
                        if (options.abort_after_tokens && sent >= *options.abort_after_tokens) return false;
                        if (sent > 0 && options.inter_token_delay_ms > 0) {
                            std::this_thread::sleep_for(std::chrono::milliseconds(options.inter_token_delay_ms));
                        }
                        const std::string delta = sent == 0 ? words[sent] : " " + words[sent];
                        nlohmann::json ev{{"choices", nlohmann::json::array({{{"index", 0}, {"text", delta}}})}};
                        const std::string frame = "data: " + ev.dump() + "\n\n";
                        if (!sink.write(frame.data(), frame.size())) return false;
                    }
                    const std::string done = "data: " + std::string(wire::kSseDone) + "\n\n";
                    sink.write(done.data(), done.size());
                    sink.done();
                    return true;
                });
        }));
}

void LoopbackServer::serve_store(std::shared_ptr<pipeline::VectorStore> store, pipeline::StoreCapabilities declared) {
    auto& s = impl_->server;
    auto unsupported = [](const char* op) { fail(Errc::kUnsupported, std::string(op) + " is not supported"); };
    s.Get("/capabilities", impl_->wrap([declared](const nlohmann::json&, httplib::Response& res) {
        send_json(res, {{"insert", declared.insert},
                        {"delete", declared.remove},
                        {"search", declared.search},
                        {"build_index", declared.build_index},
                        {"stats", declared.stats}});
    }));
    s.Post("/collections", impl_->wrap([store](const nlohmann::json& b, httplib::Response& res) {
        const auto metric = b.value("metric", std::string("cosine")) == "l2" ? Metric::kL2 : Metric::kCosine;
        store->create_collection(b.at("dim").get<std::size_t>(), metric);
        send_json(res, nlohmann::json::object());
    }));
    s.Post("/insert", impl_->wrap([store, declared, unsupported](const nlohmann::json& b, httplib::Response& res) {
        if (!declared.insert) unsupported("insert");
        const auto ids = b.at("ids").get<std::vector<ChunkId>>();
        const auto vecs = b.at("vectors").get<std::vector<Vector>>();
        const auto out = store->insert(ids, vecs);
        send_json(res, {{"rebuilds", out.rebuilds}, {"rebuild_ns", out.rebuild_ns}});
    }));
    s.Post("/delete", impl_->wrap([store, declared, unsupported](const nlohmann::json& b, httplib::Response& res) {
        if (!declared.remove) unsupported("delete");
        store->remove(b.at("ids").get<std::vector<ChunkId>>());
        send_json(res, nlohmann::json::object());
    }));
    s.Post("/search", impl_->wrap([store, declared, unsupported](const nlohmann::json& b, httplib::Response& res) {
        if (!declared.search) unsupported("search");
        const auto r = store->search(b.at("vector").get<Vector>(), b.at("k").get<std::size_t>());
        nlohmann::json cands = nlohmann::json::array();
        for (const auto& c : r.candidates) cands.push_back({{"id", c.id}, {"score", c.score}});
        send_json(res, {{"candidates", std::move(cands)}, {"scanned_vectors", r.scanned_vectors}});
    }));
    s.Post("/build_index", impl_->wrap([store, declared, unsupported](const nlohmann::json&, httplib::Response& res) {
        if (!declared.build_index) unsupported("build_index");
        store->build_index();
        send_json(res, nlohmann::json::object());
    }));
    s.Get("/stats", impl_->wrap([store, declared, unsupported](const nlohmann::json&, httplib::Response& res) {
        if (!declared.stats) unsupported("stats");
        const auto st = store->stats();
        send_json(res, {{"dim", store->dim()},
                        {"live_vectors", st.live_vectors},
                        {"index_bytes", st.index_bytes},
                        {"raw_vector_bytes", st.raw_vector_bytes},
                        {"rebuild_count", st.rebuild_count},
                        {"buffer_size", st.buffer_size},
                        {"pending_size", st.pending_size},
                        {"scanned_vectors_last_search", st.scanned_vectors_last_search}});
    }));
}

void LoopbackServer::serve_metrics(std::function<std::string()> exposition) {
    impl_->server.Get(std::string(wire::kMetricsPath), [exposition](const httplib::Request&, httplib::Response& res) {
        res.set_content(exposition(), "text/plain; version=0.0.4");
    });
}

void LoopbackServer::serve_judge(std::shared_ptr<metrics::Judge> judge) {
    impl_->server.Post(std::string(wire::kJudgePath), impl_->wrap([judge](const nlohmann::json& b, httplib::Response& res) {
        const auto metric = b.at("metric").get<std::string>();
        const auto answer = b.at("answer").get<std::string>();
        nlohmann::json out;
        if (metric == "query_accuracy") {
            out["score"] = judge->query_accuracy(answer, b.at("expected").get<std::string>());
        } else if (metric == "factual_consistency") {
            const auto ctx = b.at("contexts").get<std::vector<std::string>>();
            const auto s = judge->factual_consistency(answer, ctx);
            out["score"] = s ? nlohmann::json(*s) : nlohmann::json(nullptr);
        } else {
            fail(Errc::kInvalidArgument, "unknown judge metric " + metric);
        }
        send_json(res, out);
    }));
}

void LoopbackServer::serve_mutator(std::shared_ptr<workload::Mutator> mutator) {
    impl_->server.Post(std::string(wire::kMutatePath), impl_->wrap([mutator](const nlohmann::json& b, httplib::Response& res) {
        Rng rng(b.at("seed").get<std::uint64_t>());
        const auto m = mutator->mutate(b.at("text").get<std::string>(), rng);
        send_json(res, {{"mutated_text", m.mutated_text},
                        {"span_begin", m.span_begin},
                        {"span_end", m.span_end},
                        {"original_token", m.original_token},
                        {"replacement_token", m.replacement_token}});
    }));
}

void LoopbackServer::start() {
    if (impl_->running) return;
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    if (impl_->port <= 0) fail(Errc::kIo, "loopback server could not bind");
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    impl_->running = true;
}

void LoopbackServer::stop() {
    if (!impl_ || !impl_->running) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
    impl_->running = false;
}

int LoopbackServer::port() const { return impl_->port; }

std::string LoopbackServer::url() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }

std::size_t LoopbackServer::peak_concurrency() const { return impl_->peak.load(); }

std::uint64_t LoopbackServer::requests() const { return impl_->total.load(); }

}  // namespace ragbench::connectors
