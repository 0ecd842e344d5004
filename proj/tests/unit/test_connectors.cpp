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

#include <cstring>
#include <thread>

#include "common/clock.hpp"
#include "connectors/endpoint.hpp"
#include "connectors/loopback.hpp"
#include "connectors/remote_embedder.hpp"
#include "connectors/remote_generator.hpp"
#include "connectors/remote_judge.hpp"
#include "connectors/remote_mutator.hpp"
#include "connectors/remote_store.hpp"
#include "connectors/serving_metrics.hpp"
#include "connectors/wire.hpp"
#include "metrics/quality.hpp"
#include "refbackends/hash_embedder.hpp"
#include "refbackends/reference_store.hpp"
#include "refbackends/template_generator.hpp"
#include "test_support.hpp"
#include "workload/mutator.hpp"

using namespace ragbench;
using namespace ragbench::connectors;

namespace {

std::shared_ptr<HttpEndpoint> endpoint_for(const std::string& url, std::size_t max_in_flight = 8) {
    EndpointConfig cfg;
    cfg.base_url = url;
    cfg.timeout_ms = 5000;
    cfg.max_retries = 1;
    cfg.backoff_base_ms = 5;
    cfg.max_in_flight = max_in_flight;
    return std::make_shared<HttpEndpoint>(cfg);
}

class FixedGenerator final : public pipeline::Generator {
 public:
    explicit FixedGenerator(std::string text) : text_(std::move(text)) {}
    pipeline::GenerationResult generate(const pipeline::Prompt&, std::size_t) override { return {text_, {}, {}, 0}; }

 private:
    std::string text_;
};

pipeline::Prompt bridge_prompt() {
    std::vector<std::string> ctx{"The bridge was built in 1942."};
    pipeline::Prompt p;
    p.question = "Fill in the blank: The bridge was built in ____.";
    p.contexts = ctx;
    p.text = "Context:\n" + ctx[0] + "\nQuestion: " + p.question + "\nAnswer:";
    return p;
}

// Plain httplib server on an ephemeral port for contract-violation cases.
struct RawServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
    ~RawServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
};

}  // namespace

TEST(RemoteEmbed, LoopbackByteIdentical) {
    auto local = std::make_shared<ref::HashEmbedder>(ref::HashEmbedderConfig{384, 42, true});
    LoopbackServer srv;
    srv.serve_embedder(local);
    srv.start();
    RemoteEmbedder remote(endpoint_for(srv.url()), 384);
    std::vector<std::string> texts{"alpha beta", "The bridge was built in 1937.", "x", "naïve café 0.5e-3"};
    const auto got = remote.embed(texts);
    const auto want = local->embed(texts);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        ASSERT_EQ(got[i].size(), want[i].size());
        EXPECT_EQ(std::memcmp(got[i].data(), want[i].data(), got[i].size() * sizeof(double)), 0) << i;
    }
}

TEST(RemoteEmbed, EmptyInputMakesNoCall) {
    auto ep = endpoint_for("http://127.0.0.1:1");
    RemoteEmbedder remote(ep, 16);
    std::vector<std::string> none;
    EXPECT_TRUE(remote.embed(none).empty());
    EXPECT_EQ(ep->attempts(), 0u);
}

TEST(RemoteEmbed, WrongCountIsRemoteError) {
    RawServer raw;
    raw.server.Post(std::string(wire::kEmbeddingsPath), [](const httplib::Request&, httplib::Response& res) {
        nlohmann::json j;
        j["data"] = nlohmann::json::array({{{"index", 0}, {"embedding", std::vector<double>(4, 0.5)}}});
        res.set_content(j.dump(), "application/json");
    });
    raw.start();
    RemoteEmbedder remote(endpoint_for(raw.url()), 4);
    std::vector<std::string> texts{"a", "b"};
    EXPECT_ERRC(remote.embed(texts), Errc::kRemoteError);
}

TEST(RemoteEmbed, ConnectionRefused) {
    RemoteEmbedder remote(endpoint_for("http://127.0.0.1:1"), 4);
    std::vector<std::string> texts{"a"};
    try {
        remote.embed(texts);
        ADD_FAILURE() << "expected an error";
    } catch (const Error& e) {
        EXPECT_TRUE(e.code() == Errc::kRemoteError || e.code() == Errc::kTimeout) << e.what();
    }
}

TEST(RemoteGenerate, TtftWithInjectedDelay) {
    LoopbackServer srv;
    srv.serve_generator(std::make_shared<ref::TemplateGenerator>(), {50, 0, std::nullopt});
    srv.start();
    RemoteGenerator gen(endpoint_for(srv.url()));
    // Warm the connection path once.
    gen.generate(bridge_prompt(), 16);
    for (int i = 0; i < 5; ++i) {
        const auto r = gen.generate(bridge_prompt(), 16);
        EXPECT_EQ(r.text, "1942");
        ASSERT_TRUE(r.ttft_ms.has_value());
        EXPECT_GE(*r.ttft_ms, 50.0);
        EXPECT_LE(*r.ttft_ms, 60.0);
        EXPECT_FALSE(r.tpot_ms.has_value());
        EXPECT_EQ(r.tokens, 1u);
    }
}

TEST(RemoteGenerate, MultiTokenReportsTpot) {
    LoopbackServer srv;
    srv.serve_generator(std::make_shared<FixedGenerator>("one two three four"), {0, 5, std::nullopt});
    srv.start();
    RemoteGenerator gen(endpoint_for(srv.url()));
    const auto r = gen.generate(bridge_prompt(), 16);
    EXPECT_EQ(r.text, "one two three four");
    EXPECT_EQ(r.tokens, 4u);
    ASSERT_TRUE(r.tpot_ms.has_value());
    EXPECT_GE(*r.tpot_ms, 4.0);
}

TEST(RemoteGenerate, MidStreamDisconnect) {
    LoopbackServer srv;
    srv.serve_generator(std::make_shared<FixedGenerator>("one two three four"), {0, 0, 2u});
    srv.start();
    RemoteGenerator gen(endpoint_for(srv.url()));
    try {
        gen.generate(bridge_prompt(), 16);
        ADD_FAILURE() << "expected StreamAborted";
    } catch (const StreamAborted& e) {
        EXPECT_EQ(e.code(), Errc::kStreamAborted);
        EXPECT_EQ(e.partial_text(), "one two");
    }
}

TEST(SseParser, SplitFrames) {
    SseParser p;
    std::vector<std::string> events;
    auto on = [&](const std::string& d) { events.push_back(d); };
    p.feed("data: a\n", on);
    p.feed("\ndata: b", on);
    p.feed("\r\n\r\n", on);
    EXPECT_EQ(events, (std::vector<std::string>{"a", "b"}));
    p.feed("data: c\n", on);
    EXPECT_EQ(events.size(), 2u);
    p.feed("\n", on);
    ASSERT_EQ(events.size(), 3u);
    EXPECT_EQ(events[2], "c");
}

TEST(RemoteStore, ConformanceAgainstLocal) {
    IndexSpec spec;
    spec.kind = IndexKind::kHybridIvf;
    spec.nlist = 4;
    spec.nprobe = 2;
    spec.buffer_threshold = 10;
    spec.seed = 5;
    auto served = std::make_shared<ref::ReferenceStore>(spec);
    ref::ReferenceStore local(spec);
    LoopbackServer srv;
    srv.serve_store(served);
    srv.start();
    RemoteStore remote(endpoint_for(srv.url()));
    const auto caps = remote.capabilities();
    EXPECT_TRUE(caps.insert && caps.remove && caps.search && caps.build_index && caps.stats);

    remote.create_collection(8, Metric::kCosine);
    local.create_collection(8, Metric::kCosine);
    EXPECT_EQ(remote.dim(), 8u);
    Rng rng(3);
    std::vector<ChunkId> ids;
    std::vector<Vector> vs;
    for (ChunkId i = 1; i <= 120; ++i) {
        ids.push_back(i);
        Vector v(8);
        for (auto& x : v) x = rng.gaussian();
        vs.push_back(v);
    }
    remote.insert(ids, vs);
    local.insert(ids, vs);
    remote.build_index();
    local.build_index();
    std::vector<ChunkId> more_ids;
    std::vector<Vector> more;
    for (ChunkId i = 500; i < 515; ++i) {
        more_ids.push_back(i);
        Vector v(8);
        for (auto& x : v) x = rng.gaussian();
        more.push_back(v);
    }
    const auto ro = remote.insert(more_ids, more);
    const auto lo = local.insert(more_ids, more);
    EXPECT_EQ(ro.rebuilds, lo.rebuilds);
    std::vector<ChunkId> gone{4, 9};
    remote.remove(gone);
    local.remove(gone);
    for (int i = 0; i < 10; ++i) {
        const auto r = remote.search(vs[i], 5);
        const auto l = local.search(vs[i], 5);
        EXPECT_EQ(r.candidates, l.candidates);
        EXPECT_EQ(r.scanned_vectors, l.scanned_vectors);
    }
    const auto rs = remote.stats();
    const auto ls = local.stats();
    EXPECT_EQ(rs.live_vectors, ls.live_vectors);
    EXPECT_EQ(rs.rebuild_count, ls.rebuild_count);
    EXPECT_EQ(rs.buffer_size, ls.buffer_size);
}

TEST(RemoteStore, UnknownIdMapped) {
    auto served = std::make_shared<ref::ReferenceStore>(IndexSpec{});
    LoopbackServer srv;
    srv.serve_store(served);
    srv.start();
    RemoteStore remote(endpoint_for(srv.url()));
    remote.create_collection(4, Metric::kCosine);
    std::vector<ChunkId> unknown{42};
    EXPECT_ERRC(remote.remove(unknown), Errc::kUnknownFileId);
}

TEST(RemoteStore, ZeroKRejectedLocally) {
    auto served = std::make_shared<ref::ReferenceStore>(IndexSpec{});
    LoopbackServer srv;
    srv.serve_store(served);
    srv.start();
    auto ep = endpoint_for(srv.url());
    RemoteStore remote(ep);
    remote.create_collection(4, Metric::kCosine);
    const auto before = srv.requests();
    EXPECT_ERRC(remote.search(Vector(4, 1.0), 0), Errc::kInvalidArgument);
    EXPECT_EQ(srv.requests(), before);
}

TEST(RemoteStore, UndeclaredOperationUnsupported) {
    auto served = std::make_shared<ref::ReferenceStore>(IndexSpec{});
    LoopbackServer srv;
    pipeline::StoreCapabilities caps;
    caps.build_index = false;
    srv.serve_store(served, caps);
    srv.start();
    RemoteStore remote(endpoint_for(srv.url()));
    EXPECT_FALSE(remote.capabilities().build_index);
    EXPECT_ERRC(remote.build_index(), Errc::kUnsupported);
}

TEST(ServingMetrics, KvUtilization) {
    const auto s = parse_exposition(
        "# HELP vllm:gpu_cache_usage_perc GPU KV-cache usage.\n"
        "# TYPE vllm:gpu_cache_usage_perc gauge\n"
        "vllm:gpu_cache_usage_perc{model_name=\"m\"} 0.37\n");
    ASSERT_TRUE(s.kv_cache_utilization.has_value());
    EXPECT_DOUBLE_EQ(*s.kv_cache_utilization, 0.37);
    EXPECT_FALSE(s.tpot_ms.has_value());
    EXPECT_FALSE(s.ttft_ms.has_value());
}

TEST(ServingMetrics, HistogramMeansAndMissingTpot) {
    const auto s = parse_exposition(
        "vllm:time_to_first_token_seconds_bucket{le=\"0.1\"} 3\n"
        "vllm:time_to_first_token_seconds_sum{model_name=\"a\"} 0.5\n"
        "vllm:time_to_first_token_seconds_sum{model_name=\"b\"} 0.3\n"
        "vllm:time_to_first_token_seconds_count{model_name=\"a\"} 3\n"
        "vllm:time_to_first_token_seconds_count{model_name=\"b\"} 1\n");
    ASSERT_TRUE(s.ttft_ms.has_value());
    EXPECT_DOUBLE_EQ(*s.ttft_ms, 200.0);
    EXPECT_FALSE(s.tpot_ms.has_value());
}

TEST(ServingMetrics, MalformedLineNamesLine) {
    try {
        parse_exposition("vllm:gpu_cache_usage_perc 0.1\n\nthis line is broken{\n");
        ADD_FAILURE() << "expected ParseError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::kParseError);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(ServingMetrics, ScrapeOverHttp) {
    LoopbackServer srv;
    srv.serve_metrics([] { return std::string("vllm:kv_cache_usage_perc 0.25\n"); });
    srv.start();
    auto ep = endpoint_for(srv.url());
    const auto s = scrape_metrics(*ep);
    ASSERT_TRUE(s.kv_cache_utilization.has_value());
    EXPECT_DOUBLE_EQ(*s.kv_cache_utilization, 0.25);
    EXPECT_GT(s.timestamp_ns, 0);
}

TEST(Endpoint, MaxInFlightRespected) {
    LoopbackServer srv;
    srv.serve_generator(std::make_shared<ref::TemplateGenerator>(), {30, 0, std::nullopt});
    srv.start();
    auto ep = endpoint_for(srv.url(), 2);
    RemoteGenerator gen(ep);
    std::vector<std::thread> threads;
    for (int i = 0; i < 6; ++i) {
        threads.emplace_back([&] {
            for (int j = 0; j < 2; ++j) gen.generate(bridge_prompt(), 8);
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_LE(ep->peak_in_flight(), 2u);
    EXPECT_LE(srv.peak_concurrency(), 2u);
    EXPECT_GE(ep->peak_in_flight(), 1u);
}

TEST(Endpoint, RetriesTransientStatus) {
    RawServer raw;
    std::atomic<int> calls{0};
    raw.server.Post("/x", [&](const httplib::Request&, httplib::Response& res) {
        if (calls++ == 0) {
            res.status = 503;
            return;
        }
        res.set_content("{}", "application/json");
    });
    raw.start();
    auto ep = endpoint_for(raw.url());
    EXPECT_EQ(ep->post("/x", "{}", true).status, 200);
    EXPECT_EQ(calls.load(), 2);
    calls = 0;
    EXPECT_EQ(ep->post("/x", "{}", false).status, 503);
    EXPECT_EQ(calls.load(), 1);
}

TEST(Endpoint, InvalidConfig) {
    EndpointConfig cfg;
    EXPECT_ERRC(validate(cfg), Errc::kInvalidArgument);
    cfg.base_url = "http://127.0.0.1:9";
    cfg.max_in_flight = 0;
    EXPECT_ERRC(validate(cfg), Errc::kInvalidArgument);
}

TEST(RemoteJudge, MatchesReference) {
    LoopbackServer srv;
    srv.serve_judge(std::make_shared<metrics::ReferenceJudge>());
    srv.start();
    RemoteJudge judge(endpoint_for(srv.url()));
    metrics::ReferenceJudge local;
    EXPECT_DOUBLE_EQ(judge.query_accuracy("a b c", "b c d"), local.query_accuracy("a b c", "b c d"));
    std::vector<std::string> ctx{"The bridge was built in 1942."};
    EXPECT_EQ(judge.factual_consistency("The bridge was built in 1942.", ctx), 1.0);
    EXPECT_FALSE(judge.factual_consistency("NO-CONTEXT", ctx).has_value());
}

TEST(RemoteMutator, MatchesReferenceAndChecksContract) {
    LoopbackServer srv;
    srv.serve_mutator(std::make_shared<workload::ReferenceMutator>());
    srv.start();
    RemoteMutator remote(endpoint_for(srv.url()));
    Rng a(7), b(7);
    const auto m = remote.mutate("The bridge was built in 1937.", a);
    EXPECT_EQ(m.original_token, "1937");
    EXPECT_EQ(m.span_begin, 24u);
    EXPECT_NO_THROW(check_mutation("The bridge was built in 1937.", m));
    workload::MutationResult bad = m;
    bad.mutated_text = "Something else entirely.";
    EXPECT_ERRC(check_mutation("The bridge was built in 1937.", bad), Errc::kRemoteError);
    EXPECT_ERRC(remote.mutate("the and of it", b), Errc::kNoMutableToken);
}
