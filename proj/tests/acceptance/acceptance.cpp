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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Reference backends only, no network
// beyond loopback.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "app/config.hpp"
#include "app/ingest.hpp"
#include "app/runner.hpp"
#include "common/rng.hpp"
#include "connectors/loopback.hpp"
#include "connectors/remote_embedder.hpp"
#include "connectors/remote_generator.hpp"
#include "metrics/report.hpp"
#include "monitor/monitor.hpp"
#include "monitor/signal_flush.hpp"
#include "monitor/trace_format.hpp"
#include "pipeline/chunker.hpp"
#include "pipeline/pipeline.hpp"
#include "refbackends/hash_embedder.hpp"
#include "refbackends/lexical_reranker.hpp"
#include "refbackends/reference_store.hpp"
#include "refbackends/template_generator.hpp"
#include "workload/workload.hpp"

namespace fs = std::filesystem;
using namespace ragbench;
using ragbench::IndexKind;
using ragbench::IndexSpec;
using workload::OperationKind;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "] ";
        }
    }
};

class TempDir {
 public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("rgb_accept_" + std::to_string(::getpid()) + "_" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string str() const { return path_.string(); }

 private:
    fs::path path_;
};

std::vector<Vector> gaussian_vectors(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vector> out(n, Vector(dim));
    for (auto& v : out)
        for (auto& x : v) x = rng.gaussian();
    return out;
}

std::vector<ChunkId> iota_ids(std::size_t n, ChunkId base = 1) {
    std::vector<ChunkId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = base + i;
    return ids;
}

IndexSpec index_spec(IndexKind kind, std::uint32_t nlist, std::uint32_t nprobe, std::uint32_t threshold) {
    IndexSpec s;
    s.kind = kind;
    s.nlist = nlist;
    s.nprobe = nprobe;
    s.buffer_threshold = threshold;
    s.seed = 5;
    return s;
}

std::shared_ptr<pipeline::Chunker> sentence_chunker() {
    return std::make_shared<pipeline::SeparatorChunker>(std::vector<std::string>{"\n\n", ". "}, 512, 0);
}

struct Rig {
    Corpus corpus;
    std::shared_ptr<pipeline::Chunker> chunker = sentence_chunker();
    std::shared_ptr<ref::ReferenceStore> store;
    std::unique_ptr<pipeline::Pipeline> pipe;

    Rig(std::size_t documents, std::uint64_t seed, IndexSpec spec)
        : corpus(Corpus::from_documents(app::synthetic_documents(documents, seed))) {
        pipeline::Components c;
        c.chunker = chunker;
        c.embedder = std::make_shared<ref::HashEmbedder>(ref::HashEmbedderConfig{256, 42, true});
        store = std::make_shared<ref::ReferenceStore>(spec);
        store->create_collection(256, spec.metric);
        c.store = store;
        c.reranker = std::make_shared<ref::LexicalReranker>();
        c.generator = std::make_shared<ref::TemplateGenerator>();
        pipe = std::make_unique<pipeline::Pipeline>(c, QuerySpec{}, corpus);
        pipe->index();
    }
};

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------

Verdict workload_fidelity() {
    Verdict v;
    const auto t0 = Clock::now();

    // Operation mix through the full generator.
    const auto corpus = Corpus::from_documents(app::synthetic_documents(200, 21));
    const auto chunker = sentence_chunker();
    workload::WorkloadSpec spec;
    spec.mix = {0.9, 0.0, 0.1, 0.0};
    spec.total_requests = 100000;
    spec.seed = 2024;
    workload::WorkloadGenerator gen(spec, corpus, *chunker);
    std::uint64_t queries = 0, updates = 0;
    while (auto r = gen.next()) (r->kind == OperationKind::kQuery ? queries : updates)++;
    const double n = static_cast<double>(queries + updates);
    const double eq = 0.9 * n, eu = 0.1 * n;
    const double chi2 = (queries - eq) * (queries - eq) / eq + (updates - eu) * (updates - eu) / eu;
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(1.0), chi2));
    v.require(queries + updates == 100000, "request count");
    v.require(p > 0.001, "chi-square p");

    // Zipf over 100 ids against the analytic pmf, by rank.
    workload::AccessDistribution access{workload::AccessKind::kZipfian, 1.0, 77};
    workload::TargetSelector sel(access);
    for (int i = 0; i < 100; ++i) sel.add("file-" + std::to_string(i));
    std::map<std::string, std::size_t> rank;
    const auto order = sel.rank_order();
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
    std::vector<double> hits(100, 0.0);
    Rng rng(99);
    constexpr int kDraws = 1000000;
    for (int i = 0; i < kDraws; ++i) hits[rank.at(sel.sample(rng))] += 1.0;
    double harmonic = 0.0;
    for (int r = 1; r <= 100; ++r) harmonic += 1.0 / r;
    double l1 = 0.0;
    for (int r = 1; r <= 100; ++r) l1 += std::abs(hits[r - 1] / kDraws - (1.0 / r) / harmonic);
    v.require(l1 < 0.02, "zipf L1");

    const double elapsed = seconds_since(t0);
    v.require(elapsed < 10.0, "runtime");
    v.detail << "mix q=" << queries << " u=" << updates << " chi2=" << fmt6(chi2) << " p=" << fmt6(p)
             << "; zipf L1=" << fmt6(l1) << "; " << fmt6(elapsed) << " s";
    return v;
}

Verdict oracle_exactness() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto vs = gaussian_vectors(10000, 32, 11);
    const auto ids = iota_ids(10000);
    const auto qs = gaussian_vectors(100, 32, 12);
    std::size_t mismatches = 0;
    for (IndexKind kind : {IndexKind::kHybridIvf, IndexKind::kIvf}) {
        ref::ReferenceStore store(index_spec(kind, 64, 64, 1024));
        store.create_collection(32, Metric::kCosine);
        store.insert(ids, vs);
        store.build_index();
        if (store.stats().buffer_size != 0 || store.stats().pending_size != 0) ++mismatches;
        for (const auto& q : qs) {
            const auto got = store.search(q, 10).candidates;
            const auto want = store.flat_search(q, 10);
            bool same = got.size() == want.size();
            for (std::size_t i = 0; same && i < got.size(); ++i) same = got[i].id == want[i].id;
            mismatches += same ? 0 : 1;
        }
    }
    const double elapsed = seconds_since(t0);
    v.require(mismatches == 0, "mismatches");
    v.require(elapsed < 30.0, "runtime");
    v.detail << "10000 vectors, 100 queries x {hybrid_ivf, ivf}, nprobe=nlist=64: " << mismatches << " mismatches; "
             << fmt6(elapsed) << " s";
    return v;
}

struct FreshnessCounts {
    std::size_t update_questions = 0;
    std::size_t update_hits = 0;
    std::size_t stale_questions = 0;  // target not yet rebuilt into a searchable list
    std::size_t stale_hits = 0;
    std::uint64_t rebuilds = 0;
};

FreshnessCounts run_freshness(IndexKind kind) {
    Rig rig(40, 8, index_spec(kind, 4, 4, 64));
    workload::WorkloadSpec spec;
    spec.mix = {0.5, 0.0, 0.5, 0.0};
    spec.total_requests = 2000;
    spec.seed = 31;
    workload::WorkloadGenerator gen(spec, rig.corpus, *rig.chunker);
    FreshnessCounts c;
    while (auto r = gen.next()) {
        if (r->kind == OperationKind::kUpdate) {
            rig.pipe->apply_update(*r);
            continue;
        }
        const auto& qa = *r->qa;
        if (qa.version == 0) {
            rig.pipe->handle_query(qa);
            continue;
        }
        const auto pending = rig.store->pending_ids();
        const bool stale = std::binary_search(pending.begin(), pending.end(), qa.target_chunk_id);
        const auto out = rig.pipe->handle_query(qa);
        const std::set<ChunkId> retrieved(out.retrieved_ids.begin(), out.retrieved_ids.end());
        const bool hit = metrics::context_recall(retrieved, {qa.target_chunk_id}) == 1.0;
        ++c.update_questions;
        c.update_hits += hit;
        if (stale) {
            ++c.stale_questions;
            c.stale_hits += hit;
        }
    }
    c.rebuilds = rig.store->stats().rebuild_count;
    return c;
}

Verdict update_freshness() {
    Verdict v;
    const auto with_buffer = run_freshness(IndexKind::kHybridIvf);
    const auto without = run_freshness(IndexKind::kIvf);
    v.require(with_buffer.update_questions > 0, "no update questions");
    v.require(with_buffer.update_hits == with_buffer.update_questions, "buffered recall != 1.0");
    v.require(with_buffer.stale_questions == 0, "hybrid left updates unsearchable");
    v.require(without.stale_questions > 0, "no questions on unrebuilt updates");
    v.require(without.stale_hits == 0, "unbuffered recall on unrebuilt updates != 0.0");
    v.detail << "buffer: " << with_buffer.update_hits << "/" << with_buffer.update_questions
             << " update questions hit (" << with_buffer.rebuilds << " rebuilds); no buffer: " << without.stale_hits
             << "/" << without.stale_questions << " hit on not-yet-rebuilt updates";
    return v;
}

std::uint64_t rebuilds_for(workload::AccessKind access) {
    Rig rig(200, 6, index_spec(IndexKind::kHybridIvf, 8, 8, 64));
    workload::WorkloadSpec spec;
    spec.mix = {0.0, 0.0, 1.0, 0.0};
    spec.access = {access, 1.0, 17};
    spec.total_requests = 3000;
    spec.seed = 13;
    workload::WorkloadGenerator gen(spec, rig.corpus, *rig.chunker);
    while (auto r = gen.next()) rig.pipe->apply_update(*r);
    return rig.store->stats().rebuild_count;
}

Verdict latency_dynamics() {
    Verdict v;
    // Update stream against a fully probed index: every step replaces one
    // indexed vector with a new buffered version.
    ref::ReferenceStore store(index_spec(IndexKind::kHybridIvf, 8, 8, 50));
    store.create_collection(16, Metric::kCosine);
    store.insert(iota_ids(2000), gaussian_vectors(2000, 16, 1));
    store.build_index();
    const auto q = gaussian_vectors(1, 16, 2)[0];
    const auto fresh = gaussian_vectors(400, 16, 3);
    const auto fresh_ids = iota_ids(400, 100000);
    store.search(q, 10);
    std::uint64_t prev = store.stats().scanned_vectors_last_search;
    std::size_t increases = 0, rebuild_drops = 0, violations = 0;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        std::vector<ChunkId> old{static_cast<ChunkId>(1 + i)};
        store.remove(old);
        const auto buffered = store.stats().buffer_size;
        const auto out = store.insert(std::span(&fresh_ids[i], 1), std::span(&fresh[i], 1));
        store.search(q, 10);
        const auto now = store.stats().scanned_vectors_last_search;
        if (out.rebuilds == 0) {
            now > prev ? ++increases : ++violations;
        } else {
            now + buffered <= prev ? ++rebuild_drops : ++violations;
        }
        prev = now;
    }
    v.require(violations == 0, "scanned_vectors pattern");
    v.require(rebuild_drops == store.stats().rebuild_count && rebuild_drops > 0, "rebuild count");

    const auto zipf = rebuilds_for(workload::AccessKind::kZipfian);
    const auto uniform = rebuilds_for(workload::AccessKind::kUniform);
    v.require(zipf <= uniform, "zipfian rebuilds > uniform");
    v.detail << increases << " strict increases, " << rebuild_drops << " drops at rebuild, " << violations
             << " violations; rebuilds over 3000 updates: zipfian " << zipf << ", uniform " << uniform;
    return v;
}

std::uint64_t rss_bytes() {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("VmRSS:", 0) == 0) return std::stoull(line.substr(6)) * 1024;
    }
    return 0;
}

Verdict monitor_overhead() {
    Verdict v;
    TempDir dir;
    Rig rig(120, 4, index_spec(IndexKind::kHybridIvf, 8, 4, 1024));
    workload::WorkloadSpec ws;
    ws.total_requests = 1;
    workload::WorkloadGenerator gen(ws, rig.corpus, *rig.chunker);
    const auto& pool = gen.pool().entries();
    std::size_t cursor = 0;
    auto run_block = [&](std::size_t n) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto out = rig.pipe->handle_query(pool[cursor++ % pool.size()]);
            sum += static_cast<double>(out.end_ns - out.start_ns);
        }
        return sum;
    };
    monitor::MonitorConfig mc;
    mc.interval_ms = 100;
    mc.output_path = dir.file("overhead.rgbt");

    run_block(500);  // warm-up
    // One trial: ABBA phases, 5000 queries per condition. The monitor is
    // started ahead of its phase, as in a run where it starts before indexing.
    // The verdict uses the median trial so scheduler bursts on a shared host
    // do not decide it.
    constexpr std::size_t kPhase = 2500, kTrials = 7;
    auto trial = [&] {
        double off = 0.0, on = 0.0;
        for (int phase = 0; phase < 4; ++phase) {
            if (phase == 1 || phase == 2) {
                auto m = monitor::Monitor::start(mc);
                std::this_thread::sleep_for(std::chrono::milliseconds(150));
                on += run_block(kPhase);
                m->stop();
            } else {
                off += run_block(kPhase);
            }
        }
        return (on - off) / off;
    };
    std::vector<double> changes;
    for (std::size_t t = 0; t < kTrials; ++t) changes.push_back(trial());
    std::sort(changes.begin(), changes.end());
    const double change = changes[kTrials / 2];
    v.require(std::abs(change) <= 0.01, "latency change > 1%");

    // Output rate and buffer memory with the default probe set.
    const auto rss0 = rss_bytes();
    mc.output_path = dir.file("rate.rgbt");
    auto m = monitor::Monitor::start(mc);
    const auto t0 = Clock::now();
    std::this_thread::sleep_for(std::chrono::seconds(3));
    const auto metrics_count = m->metrics().size();
    const auto allocated = m->buffer_bytes_allocated();
    const auto configured = m->buffer_bytes_configured();
    const auto rss1 = rss_bytes();
    const auto rep = m->stop();
    const double per_min = static_cast<double>(rep.trace_bytes) / seconds_since(t0) * 60.0;
    v.require(metrics_count <= 32, "more than 32 metrics");
    v.require(per_min <= 5.0 * 1024 * 1024, "trace output > 5 MB/min");
    v.require(allocated <= configured, "ring allocation above configured");
    const double growth = rss1 > rss0 ? static_cast<double>(rss1 - rss0) : 0.0;
    v.require(growth <= static_cast<double>(configured) + 16.0 * 1024 * 1024, "resident growth");

    v.detail << "median mean-latency change " << fmt6(change * 100) << "% over " << kTrials << " trials (range "
             << fmt6(changes.front() * 100) << " to " << fmt6(changes.back() * 100) << "%); " << metrics_count << " metrics, " << fmt6(per_min / 1024) << " KiB/min; rings "
             << allocated << "/" << configured << " B, rss growth " << fmt6(growth / 1024) << " KiB";
    return v;
}

// Smoke runs are shared by the attribution and reproducibility criteria.
struct SmokeRuns {
    TempDir dir;
    app::RunConfig cfg;
    app::RunOutcome a, b;
    bool ok = false;
    std::string error;
};

SmokeRuns& smoke_runs() {
    static SmokeRuns runs;
    return runs;
}

void execute_smoke(SmokeRuns& s) {
    const char* data = std::getenv("RAGBENCH_TEST_DATA");
    const std::string path = std::string(data ? data : "tests/data") + "/smoke.yaml";
    try {
        s.cfg = app::load_config(path);
        auto first = s.cfg;
        first.output_dir = s.dir.file("a");
        auto second = s.cfg;
        second.output_dir = s.dir.file("b");
        s.a = app::run_benchmark(first);
        s.b = app::run_benchmark(second);
        s.ok = true;
    } catch (const std::exception& e) {
        s.error = e.what();
    }
}

std::vector<nlohmann::json> log_lines(const std::string& path) {
    std::ifstream in(path);
    std::vector<nlohmann::json> out;
    std::string line;
    while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
    return out;
}

Verdict timing_attribution() {
    Verdict v;
    // Per-query attribution, direct pipeline calls.
    Rig rig(80, 12, index_spec(IndexKind::kHybridIvf, 4, 4, 1024));
    workload::WorkloadSpec ws;
    ws.total_requests = 1;
    workload::WorkloadGenerator gen(ws, rig.corpus, *rig.chunker);
    std::size_t checked = 0, outside = 0;
    double worst = 1.0;
    auto check = [&](std::int64_t stage_sum, std::int64_t e2e) {
        ++checked;
        const double ratio = static_cast<double>(stage_sum) / static_cast<double>(e2e);
        worst = std::min(worst, ratio);
        if (ratio < 0.95 || ratio > 1.0) ++outside;
    };
    for (const auto& qa : gen.pool().entries()) {
        const auto out = rig.pipe->handle_query(qa);
        std::int64_t sum = 0;
        for (const auto& t : out.timings) sum += t.duration_ns();
        check(sum, out.end_ns - out.start_ns);
    }

    // Same property on the smoke run's logged queries, then the aggregates.
    auto& s = smoke_runs();
    v.require(s.ok, "smoke run: " + s.error);
    std::size_t compared = 0, differing = 0;
    if (s.ok) {
        std::map<std::string, std::vector<double>> samples;
        for (const auto& j : log_lines(s.a.paths.request_log)) {
            if (j.value("record", "") != "request" || j.contains("error")) continue;
            const std::string kind = j.at("kind");
            const auto& t = j.at("timing");
            const auto ns = [](double us) { return static_cast<std::int64_t>(std::llround(us * 1000.0)); };
            std::int64_t sum = 0;
            for (const auto& st : t.at("stages")) {
                const auto d = ns(st.at("end_us").get<double>()) - ns(st.at("start_us").get<double>());
                sum += d;
                samples[kind + "." + st.at("stage").get<std::string>()].push_back(static_cast<double>(d) / 1e6);
            }
            const auto e2e = ns(t.at("e2e_us").get<double>());
            samples[kind + ".e2e"].push_back(static_cast<double>(e2e) / 1e6);
            if (kind == "query") check(sum, e2e);
        }
        const auto report = nlohmann::json::parse(std::ifstream(s.a.paths.report_json));
        for (const auto& row : report.at("latency")) {
            const std::string stage = row.at("stage");
            auto it = samples.find(stage);
            if (it == samples.end()) continue;
            auto xs = it->second;
            std::sort(xs.begin(), xs.end());
            const std::size_t n = xs.size();
            double total = 0.0;
            for (double x : xs) total += x;
            // Nearest rank with integer arithmetic: index ceil(P*n/100) - 1.
            auto rank = [&](std::size_t pct) { return xs[(pct * n + 99) / 100 - 1]; };
            const std::pair<const char*, double> want[] = {{"mean_ms", total / static_cast<double>(n)},
                                                           {"p50_ms", rank(50)},
                                                           {"p95_ms", rank(95)},
                                                           {"p99_ms", rank(99)},
                                                           {"max_ms", xs.back()}};
            differing += row.at("count").get<std::size_t>() != n;
            for (const auto& [key, value] : want) {
                ++compared;
                if (fmt6(row.at(key).get<double>()) != fmt6(value)) {
                    ++differing;
                    v.detail << " " << stage << "." << key << " " << row.at(key) << " vs " << fmt6(value);
                }
            }
        }
    }
    v.require(outside == 0, "stage sum outside [0.95, 1.0] x e2e");
    v.require(compared > 0 && differing == 0, "aggregate recomputation");
    v.detail << checked << " queries, min stage/e2e " << fmt6(worst) << ", " << outside << " outside; " << compared
             << " aggregates recomputed, " << differing << " differ";
    return v;
}

std::string random_document(Rng& rng) {
    static const std::vector<std::string> pieces = {". ", "\n\n", " ", "a", "Z", "7", "é", "\t", ".", "\n", "xyz"};
    const std::size_t len = rng.below(2500);
    std::string out;
    while (out.size() < len) out += pieces[rng.below(pieces.size())];
    return out;
}

Verdict chunking_losslessness() {
    Verdict v;
    Rng rng(1000);
    std::size_t docs = 0, configurations = 0, failures = 0;
    auto fail = [&](const std::string& what) {
        if (failures++ < 3) v.detail << " [" << what << "]";
    };
    const std::vector<std::pair<std::size_t, std::size_t>> fixed_grid = {{1, 0}, {7, 3}, {64, 0}, {64, 16}, {64, 63},
                                                                         {256, 128}, {1000, 1}};
    const std::vector<std::vector<std::string>> separator_sets = {{". "}, {"\n\n", ". "}, {"\n", ".", " "}};
    for (int d = 0; d < 1000; ++d, ++docs) {
        Document doc{"doc-" + std::to_string(d), "t", random_document(rng)};
        const std::size_t len = doc.body.size();
        for (const auto& [size, overlap] : fixed_grid) {
            ++configurations;
            const auto cs = pipeline::chunk_fixed(doc, size, overlap);
            if (pipeline::reconstruct_body(cs) != doc.body) fail("fixed reconstruct");
            const std::size_t stride = size - overlap;
            const std::size_t expected = len == 0 ? 0 : len <= size ? 1 : 1 + (len - size + stride - 1) / stride;
            if (cs.size() != expected) fail("fixed count");
            for (std::size_t i = 0; i < cs.size(); ++i) {
                if (cs[i].start != i * stride || cs[i].end != std::min(i * stride + size, len)) fail("fixed offsets");
                if (cs[i].text != doc.body.substr(cs[i].start, cs[i].end - cs[i].start)) fail("fixed text");
            }
        }
        for (const auto& seps : separator_sets) {
            for (std::size_t max_len : {8u, 100u, 4096u}) {
                for (std::size_t overlap : {0u, 2u}) {
                    ++configurations;
                    const auto cs = pipeline::chunk_separator(doc, seps, max_len, overlap);
                    if (pipeline::reconstruct_body(cs) != doc.body) fail("separator reconstruct");
                    std::size_t pos = 0;
                    for (const auto& c : cs) {
                        if (c.start != pos || c.end - c.start > max_len) fail("separator offsets");
                        if (c.text != doc.body.substr(c.start, c.end - c.start)) fail("separator text");
                        pos = c.end;
                    }
                    if (pos != len) fail("separator coverage");
                }
            }
        }
    }
    v.require(failures == 0, "losslessness");
    v.detail << docs << " documents x " << configurations / docs << " configurations, " << failures << " failures";
    return v;
}

monitor::MonitorConfig trace_config(const std::string& path) {
    monitor::MonitorConfig cfg;
    cfg.output_path = path;
    cfg.interval_ms = 1000;
    cfg.per_metric_buffer_bytes = monitor::kMinBufferBytes;
    cfg.probes = {monitor::ProbeKind::kSystemCpu};
    cfg.external_metrics = {"ext.a", "ext.b"};
    cfg.drain_interval_ms = 600000;  // nothing drains until stop
    cfg.nice_increment = 0;
    return cfg;
}

Verdict trace_round_trip() {
    Verdict v;
    TempDir dir;
    const std::size_t cap = monitor::kMinBufferBytes / monitor::kRecordBytes;
    constexpr std::size_t kExtra = 1000;

    // In-process run with a wrap-around.
    auto m = monitor::Monitor::start(trace_config(dir.file("wrap.rgbt")));
    const auto a = *m->metric_id("ext.a");
    const auto b = *m->metric_id("ext.b");
    for (std::size_t i = 0; i < cap + kExtra; ++i) m->record(a, static_cast<double>(i));
    for (int i = 0; i < 10; ++i) m->record(b, i);
    const auto rep = m->stop();
    const auto tf = monitor::read_trace(dir.file("wrap.rgbt"));
    v.require(tf.complete(), "footer missing");
    v.require(tf.records.size() == rep.samples_written, "record count");
    v.require(tf.footer && tf.footer->samples_written == rep.samples_written &&
                  tf.footer->samples_dropped == rep.samples_dropped,
              "footer totals");
    bool conserved = true;
    std::uint64_t dropped_sum = 0;
    for (const auto& pm : rep.per_metric) {
        conserved &= pm.emitted == pm.written + pm.dropped;
        dropped_sum += pm.dropped;
        std::uint64_t in_file = 0;
        for (const auto& r : tf.records) in_file += r.metric_id == pm.id;
        conserved &= in_file == pm.written;
        if (pm.name == "ext.a") conserved &= pm.emitted == cap + kExtra && pm.dropped == kExtra;
    }
    v.require(conserved && dropped_sum == rep.samples_dropped, "conservation");

    // Signal-interrupted process with a wrap-around.
    const auto path = dir.file("signal.rgbt");
    const pid_t child = ::fork();
    if (child == 0) {
        auto cfg = trace_config(path);
        cfg.flush_on_signal = true;
        auto cm = monitor::Monitor::start(cfg);
        monitor::add_signal_callback([](int) { return true; });  // re-raise after the flush
        const auto id = *cm->metric_id("ext.a");
        for (std::size_t i = 0; i < cap + kExtra; ++i) cm->record(id, static_cast<double>(i));
        ::kill(::getpid(), SIGTERM);
        std::this_thread::sleep_for(std::chrono::seconds(10));
        ::_exit(3);
    }
    int status = 0;
    ::waitpid(child, &status, 0);
    v.require(WIFSIGNALED(status) && WTERMSIG(status) == SIGTERM, "child not terminated by SIGTERM");
    try {
        const auto sf = monitor::read_trace(path);
        v.require(sf.complete(), "interrupted trace footer");
        const auto id = sf.id_of("ext.a");
        std::uint64_t ext = 0;
        for (const auto& r : sf.records) ext += id && r.metric_id == *id;
        v.require(sf.footer && sf.records.size() == sf.footer->samples_written, "interrupted record count");
        v.require(sf.footer && ext + sf.footer->samples_dropped == cap + kExtra && sf.footer->samples_dropped == kExtra,
                  "interrupted conservation");
        v.detail << "wrap: " << rep.samples_written << " written, " << rep.samples_dropped << " dropped; signal: "
                 << sf.records.size() << " records, " << (sf.footer ? sf.footer->samples_dropped : 0) << " dropped";
    } catch (const std::exception& e) {
        v.require(false, std::string("interrupted trace: ") + e.what());
    }
    return v;
}

Verdict reproducibility() {
    Verdict v;
    auto& s = smoke_runs();
    v.require(s.ok, "smoke run: " + s.error);
    if (!s.ok) return v;
    auto strip = [](std::vector<nlohmann::json> lines) {
        for (auto& j : lines) j.erase("timing");
        return lines;
    };
    const auto la = strip(log_lines(s.a.paths.request_log));
    const auto lb = strip(log_lines(s.b.paths.request_log));
    v.require(la.size() > 2 && la == lb, "request logs differ");
    const auto qa = s.a.quality, qb = s.b.quality;
    const bool same_quality = qa && qb && qa->evaluated == qb->evaluated && qa->context_recall == qb->context_recall &&
                              qa->query_accuracy == qb->query_accuracy &&
                              qa->factual_consistency == qb->factual_consistency &&
                              qa->update_question_recall == qb->update_question_recall;
    v.require(same_quality, "quality aggregates differ");
    const auto ra = metrics::strip_timing(nlohmann::ordered_json::parse(std::ifstream(s.a.paths.report_json)));
    const auto rb = metrics::strip_timing(nlohmann::ordered_json::parse(std::ifstream(s.b.paths.report_json)));
    v.require(ra == rb, "stripped reports differ");
    v.detail << la.size() << " log lines, context_recall "
             << (qa && qa->context_recall ? fmt6(*qa->context_recall) : std::string("n/a")) << ", reports "
             << (ra == rb ? "identical" : "differ") << " modulo timing";
    return v;
}

std::shared_ptr<connectors::HttpEndpoint> loopback_endpoint(const std::string& url) {
    connectors::EndpointConfig cfg;
    cfg.base_url = url;
    cfg.timeout_ms = 5000;
    cfg.max_retries = 0;
    return std::make_shared<connectors::HttpEndpoint>(cfg);
}

Verdict connector_conformance() {
    Verdict v;
    auto local = std::make_shared<ref::HashEmbedder>(ref::HashEmbedderConfig{384, 42, true});
    connectors::LoopbackServer emb;
    emb.serve_embedder(local);
    emb.start();
    connectors::RemoteEmbedder remote(loopback_endpoint(emb.url()), 384);
    const auto docs = app::synthetic_documents(20, 3);
    std::vector<std::string> texts{"alpha beta", "The bridge was built in 1937.", "naïve café 0.5e-3"};
    for (const auto& d : docs) texts.push_back(d.body);
    const auto got = remote.embed(texts);
    const auto want = local->embed(texts);
    bool identical = got.size() == want.size();
    for (std::size_t i = 0; identical && i < got.size(); ++i) {
        identical = got[i].size() == want[i].size() &&
                    std::memcmp(got[i].data(), want[i].data(), got[i].size() * sizeof(double)) == 0;
    }
    v.require(identical, "remote embedding differs");
    emb.stop();

    connectors::LoopbackServer gen_srv;
    gen_srv.serve_generator(std::make_shared<ref::TemplateGenerator>(), {50, 0, std::nullopt});
    gen_srv.start();
    connectors::RemoteGenerator gen(loopback_endpoint(gen_srv.url()));
    pipeline::Prompt prompt;
    prompt.question = "Fill in the blank: The bridge was built in ____.";
    prompt.contexts = {"The bridge was built in 1942."};
    prompt.text = pipeline::assemble_prompt(prompt.question, prompt.contexts, QuerySpec{}.prompt_template).text;
    gen.generate(prompt, 16);  // connection warm-up
    double lo = 1e9, hi = 0.0;
    for (int i = 0; i < 10; ++i) {
        const auto r = gen.generate(prompt, 16);
        const double t = r.ttft_ms.value_or(-1.0);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    gen_srv.stop();
    v.require(lo >= 50.0 && hi <= 60.0, "TTFT outside [50, 60] ms");
    v.detail << texts.size() << " texts byte-identical=" << (identical ? "yes" : "no") << "; TTFT over 10 calls in ["
             << fmt6(lo) << ", " << fmt6(hi) << "] ms";
    return v;
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
    struct Criterion {
        const char* name;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria = {
        {"workload fidelity", workload_fidelity},
        {"oracle exactness", oracle_exactness},
        {"update freshness", update_freshness},
        {"latency dynamics", latency_dynamics},
        {"monitor overhead", monitor_overhead},
        {"timing attribution", timing_attribution},
        {"chunking losslessness", chunking_losslessness},
        {"trace round-trip", trace_round_trip},
        {"reproducibility", reproducibility},
        {"connector conformance", connector_conformance},
    };
    std::set<std::size_t> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::strtoul(argv[i], nullptr, 10));
    auto wanted = [&](std::size_t n) { return selected.empty() || selected.contains(n); };

    // The trace criterion forks; run it before any long-lived threads exist.
    std::map<std::string, Verdict> done;
    if (wanted(8)) done.emplace("trace round-trip", trace_round_trip());
    if (wanted(6) || wanted(9)) execute_smoke(smoke_runs());

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        if (!wanted(i + 1)) continue;
        Verdict v;
        const auto t0 = Clock::now();
        if (auto it = done.find(c.name); it != done.end()) {
            v.pass = it->second.pass;
            v.detail << it->second.detail.str();
        } else {
            try {
                v = c.run();
            } catch (const std::exception& e) {
                v.pass = false;
                v.detail << "exception: " << e.what();
            }
        }
        failed += v.pass ? 0 : 1;
        std::printf("%s %2zu %-22s %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", i + 1, c.name, v.detail.str().c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, selected.empty() ? criteria.size() : selected.size());
    return failed == 0 ? 0 : 1;
}
