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

#include "app/runner.hpp"

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "app/ingest.hpp"
#include "common/clock.hpp"
#include "common/hash.hpp"
#include "connectors/remote_embedder.hpp"
#include "connectors/remote_generator.hpp"
#include "connectors/remote_judge.hpp"
#include "connectors/remote_mutator.hpp"
#include "connectors/remote_store.hpp"
#include "connectors/serving_metrics.hpp"
#include "refbackends/hash_embedder.hpp"
#include "refbackends/lexical_reranker.hpp"
#include "refbackends/template_generator.hpp"

namespace ragbench::app {

namespace fs = std::filesystem;

namespace {

template <typename F>
auto in_phase(Phase phase, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const PhaseError&) {
        throw;
    } catch (const Error& e) {
        throw PhaseError(phase, e);
    } catch (const std::exception& e) {
        throw PhaseError(phase, Error(Errc::kInternal, e.what()));
    }
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) fail(Errc::kOutputUnwritable, "cannot create directory " + dir);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::kOutputUnwritable, "cannot write " + path);
    out << text;
    out.flush();
    if (!out) fail(Errc::kOutputUnwritable, "write failed for " + path);
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::kIo, "cannot read " + path);
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) fail(Errc::kParseError, "invalid JSON in " + path);
    return j;
}

std::shared_ptr<connectors::HttpEndpoint> endpoint_for(const BackendChoice& b) {
    return std::make_shared<connectors::HttpEndpoint>(*b.endpoint);
}

nlohmann::ordered_json index_stats_json(const pipeline::IndexStats& s, std::size_t documents) {
    return {{"documents", documents},       {"chunk_count", s.chunk_count},
            {"chunk_s", s.chunk_s},         {"embed_s", s.embed_s},
            {"insert_s", s.insert_s},       {"build_s", s.build_s},
            {"index_bytes", s.index_bytes}, {"raw_vector_bytes", s.raw_vector_bytes}};
}

std::size_t indexed_count(const RunConfig& cfg, const Corpus& corpus) {
    if (cfg.corpus.holdout > corpus.size()) {
        fail(Errc::kExhaustedCorpus, "corpus.holdout (" + std::to_string(cfg.corpus.holdout) + ") exceeds the " +
                                         std::to_string(corpus.size()) + " available documents");
    }
    return corpus.size() - cfg.corpus.holdout;
}

// Periodically scrapes the serving endpoint into the monitor's trace.
class ServingScraper {
 public:
    ServingScraper(monitor::Monitor& mon, connectors::EndpointConfig ep, std::uint32_t interval_ms)
        : mon_(mon), endpoint_(std::move(ep)), interval_(interval_ms) {
        for (std::size_t i = 0; i < 3; ++i) ids_[i] = mon_.metric_id(monitor::kServingMetricNames[i]);
        thread_ = std::thread([this] { loop(); });
    }
    ~ServingScraper() {
        {
            std::scoped_lock lk(mu_);
            done_ = true;
        }
        cv_.notify_all();
        thread_.join();
    }

 private:
    void loop() {
        std::unique_lock lk(mu_);
        while (!done_) {
            lk.unlock();
            try {
                const auto snap = connectors::scrape_metrics(endpoint_);
                const std::optional<double> vals[3] = {snap.ttft_ms, snap.tpot_ms, snap.kv_cache_utilization};
                for (std::size_t i = 0; i < 3; ++i) {
                    if (ids_[i] && vals[i]) mon_.record_at(*ids_[i], snap.timestamp_ns, *vals[i]);
                }
            } catch (const std::exception&) {
                // A failed scrape leaves a gap in the serving series.
            }
            lk.lock();
            cv_.wait_for(lk, std::chrono::milliseconds(interval_), [this] { return done_; });
        }
    }

    monitor::Monitor& mon_;
    connectors::HttpEndpoint endpoint_;
    std::uint32_t interval_;
    std::optional<std::uint16_t> ids_[3];
    std::mutex mu_;
    std::condition_variable cv_;
    bool done_ = false;
    std::thread thread_;
};

}  // namespace

std::shared_ptr<pipeline::Chunker> make_chunker(const ChunkingConfig& cfg) {
    if (cfg.mode == "separator") {
        return std::make_shared<pipeline::SeparatorChunker>(cfg.separators, cfg.max_len, cfg.context_overlap);
    }
    return std::make_shared<pipeline::FixedChunker>(cfg.size, cfg.overlap);
}

Backends make_backends(const RunConfig& cfg) {
    Backends b;
    auto& c = b.components;
    c.chunker = make_chunker(cfg.chunking);
    if (cfg.embedding.remote()) {
        c.embedder = std::make_shared<connectors::RemoteEmbedder>(endpoint_for(cfg.embedding), cfg.embedding.dim);
    } else {
        c.embedder = std::make_shared<ref::HashEmbedder>(ref::HashEmbedderConfig{cfg.embedding.dim, cfg.embedding.seed, true});
    }
    if (cfg.store.remote()) {
        c.store = std::make_shared<connectors::RemoteStore>(endpoint_for(cfg.store));
    } else {
        b.reference_store = std::make_shared<ref::ReferenceStore>(cfg.store.index);
        c.store = b.reference_store;
    }
    c.reranker = std::make_shared<ref::LexicalReranker>();
    if (cfg.generation.remote()) {
        c.generator = std::make_shared<connectors::RemoteGenerator>(endpoint_for(cfg.generation));
    } else {
        c.generator = std::make_shared<ref::TemplateGenerator>();
    }
    if (cfg.mutator.remote()) {
        b.mutator = std::make_shared<connectors::RemoteMutator>(endpoint_for(cfg.mutator));
    } else {
        b.mutator = std::make_shared<workload::ReferenceMutator>();
    }
    if (cfg.evaluation.remote()) {
        b.judge = std::make_shared<connectors::RemoteJudge>(endpoint_for(cfg.evaluation));
    } else {
        b.judge = std::make_shared<metrics::ReferenceJudge>();
    }
    return b;
}

void check_backend_capabilities(const RunConfig& cfg) {
    if (!cfg.store.remote()) return;
    connectors::RemoteStore store(endpoint_for(cfg.store));
    auto diags = check_capabilities(cfg, store.capabilities());
    if (!diags.empty()) throw ConfigError(Errc::kUnsupported, std::move(diags));
}

RunPaths run_paths(const RunConfig& cfg) {
    RunPaths p;
    p.run_dir = (fs::path(cfg.output_dir) / cfg.run_id).string();
    auto at = [&](const char* name) { return (fs::path(p.run_dir) / name).string(); };
    p.request_log = at("requests.jsonl");
    p.trace = at("trace.rgbt");
    p.quality = at("quality.jsonl");
    p.index_stats = at("index_stats.json");
    p.manifest = at("corpus_manifest.json");
    p.report_json = at("report.json");
    p.report_csv = at("report.csv");
    p.report_svg = at("report.svg");
    return p;
}

SnapshotPaths snapshot_paths(const RunConfig& cfg) {
    SnapshotPaths p;
    p.dir = (fs::path(cfg.output_dir) / "index").string();
    p.meta = (fs::path(p.dir) / "index.json").string();
    p.store = (fs::path(p.dir) / "store.rgbs").string();
    return p;
}

std::string index_digest(const RunConfig& cfg, const CorpusManifest& manifest) {
    const auto& ch = cfg.chunking;
    const auto& ix = cfg.store.index;
    nlohmann::json j{
        {"corpus", manifest.digest},
        {"holdout", cfg.corpus.holdout},
        {"chunking", {ch.mode, ch.size, ch.overlap, ch.separators, ch.max_len, ch.context_overlap}},
        {"embedding", {cfg.embedding.backend, cfg.embedding.dim, cfg.embedding.seed}},
        {"store", {cfg.store.backend, index_kind_name(ix.kind), ix.nlist, ix.nprobe, metric_name(ix.metric),
                   ix.buffer_threshold, ix.seed}},
    };
    return hex64(fnv1a64(j.dump()));
}

IndexSummary build_index_snapshot(const RunConfig& cfg) {
    IndexSummary out;
    auto corpus = in_phase(Phase::kIndex, [&] { return load_corpus(cfg.corpus); });
    in_phase(Phase::kIndex, [&] {
        const std::size_t n = indexed_count(cfg, corpus);
        auto backends = make_backends(cfg);
        auto& c = backends.components;
        c.store->create_collection(cfg.embedding.dim, cfg.store.index.metric);
        out.stats = pipeline::index_corpus(corpus, *c.chunker, *c.embedder, *c.store, cfg.embedding.batch_size, nullptr, n);
        out.documents_indexed = n;
        out.index_digest = index_digest(cfg, manifest_of(corpus));
        out.paths = snapshot_paths(cfg);
        ensure_dir(out.paths.dir);
        if (backends.reference_store) backends.reference_store->save(out.paths.store);
        nlohmann::ordered_json meta;
        meta["index_digest"] = out.index_digest;
        meta["config_digest"] = cfg.digest;
        meta["store_backend"] = cfg.store.backend;
        meta["stats"] = index_stats_json(out.stats, n);
        write_text(out.paths.meta, meta.dump(2) + "\n");
    });
    return out;
}

nlohmann::ordered_json write_report(const ReportRequest& req, metrics::QualityAggregate* quality_out) {
    metrics::ReportInputs in;
    in.log = metrics::load_request_log(req.request_log);
    std::optional<metrics::LoadedQuality> quality_file;
    if (req.quality) quality_file = metrics::load_quality_records(*req.quality);
    if (req.trace) {
        in.trace_expected = true;
        try {
            in.trace = monitor::read_trace(*req.trace);
        } catch (const Error& e) {
            if (e.code() == Errc::kSchemaVersionMismatch) throw;
            // Unreadable or truncated before the first record: reported as incomplete.
        }
    }
    if (req.index_stats) in.index_stats = read_json(*req.index_stats);
    metrics::check_digests(in, quality_file);
    if (quality_file) {
        auto judge = req.judge ? req.judge : std::make_shared<metrics::ReferenceJudge>();
        in.quality = metrics::evaluate_quality(quality_file->records, *judge, req.recall_mode);
        if (quality_out != nullptr) *quality_out = *in.quality;
    }
    const auto report = metrics::build_report(in);

    ensure_dir(req.out_dir);
    for (const auto& f : req.formats) {
        const auto base = fs::path(req.out_dir) / "report";
        if (f == "json") write_text(base.string() + ".json", metrics::render_json(report));
        else if (f == "csv") write_text(base.string() + ".csv", metrics::render_csv(report));
        else if (f == "svg") write_text(base.string() + ".svg", metrics::render_svg(report, in.log.records));
        else fail(Errc::kInvalidArgument, "unknown report format '" + f + "' (json, csv, svg)");
    }
    return report;
}

RunOutcome run_benchmark(const RunConfig& cfg, const RunOptions& options) {
    RunOutcome outcome;
    outcome.paths = run_paths(cfg);
    const auto& paths = outcome.paths;
    auto corpus = in_phase(Phase::kRun, [&] {
        ensure_dir(paths.run_dir);
        return load_corpus(cfg.corpus);
    });
    const auto manifest = manifest_of(corpus);
    in_phase(Phase::kRun, [&] { write_text(paths.manifest, manifest_json(manifest).dump(2) + "\n"); });

    std::unique_ptr<monitor::Monitor> mon;
    std::unique_ptr<ServingScraper> scraper;
    auto stop_monitor = [&] {
        scraper.reset();
        if (mon) {
            outcome.monitor = mon->stop();
            outcome.trace_written = true;
            mon.reset();
        }
    };
    if (cfg.monitor.enabled) {
        in_phase(Phase::kRun, [&] {
            auto mc = cfg.monitor.config;
            mc.output_path = paths.trace;
            mc.run_id = cfg.run_id;
            mc.config_digest = cfg.digest;
            mon = monitor::Monitor::start(std::move(mc));
            if (cfg.monitor.serving_endpoint) {
                scraper = std::make_unique<ServingScraper>(*mon, *cfg.monitor.serving_endpoint, cfg.monitor.serving_interval_ms);
            }
        });
    }

    try {
        auto backends = in_phase(Phase::kIndex, [&] { return make_backends(cfg); });
        std::unique_ptr<pipeline::Pipeline> pipe_ptr;
        auto make_pipeline = [&] {
            pipe_ptr = std::make_unique<pipeline::Pipeline>(backends.components, cfg.query, corpus,
                                                             cfg.embedding.batch_size, cfg.generation.max_tokens);
            return pipe_ptr.get();
        };

        in_phase(Phase::kIndex, [&] {
            const std::size_t n = indexed_count(cfg, corpus);
            nlohmann::ordered_json stats;
            if (options.skip_index) {
                const auto sp = snapshot_paths(cfg);
                if (!fs::exists(sp.meta)) fail(Errc::kMissingSnapshot, "no index snapshot at " + sp.dir + " (run 'index' first)");
                const auto meta = read_json(sp.meta);
                if (meta.value("index_digest", std::string()) != index_digest(cfg, manifest)) {
                    fail(Errc::kMissingSnapshot, "snapshot at " + sp.dir + " was built for a different corpus or index configuration");
                }
                if (backends.reference_store) {
                    if (!fs::exists(sp.store)) fail(Errc::kMissingSnapshot, "store snapshot missing: " + sp.store);
                    backends.reference_store = std::make_shared<ref::ReferenceStore>(ref::ReferenceStore::load(sp.store));
                    backends.components.store = backends.reference_store;
                }
                make_pipeline()->register_chunks(n);
                stats = meta.at("stats");
            } else {
                backends.components.store->create_collection(cfg.embedding.dim, cfg.store.index.metric);
                stats = index_stats_json(make_pipeline()->index(n), n);
            }
            write_text(paths.index_stats, stats.dump(2) + "\n");
        });

        auto& pipe = *pipe_ptr;
        auto result = in_phase(Phase::kRun, [&] {
            auto chunker = backends.components.chunker;
            workload::WorkloadGenerator gen(cfg.workload, corpus, *chunker, cfg.corpus.holdout, backends.mutator);
            std::optional<std::ofstream> trace_out;
            if (options.emit_trace) {
                trace_out.emplace(*options.emit_trace, std::ios::binary | std::ios::trunc);
                if (!*trace_out) fail(Errc::kOutputUnwritable, "cannot write " + *options.emit_trace);
            }
            pipeline::RequestSource source = [&]() -> std::optional<workload::Request> {
                auto r = gen.next();
                if (r && trace_out) *trace_out << workload::trace_line(*r) << '\n';
                return r;
            };
            pipeline::DriverOptions dopt;
            dopt.workers = cfg.driver_workers();
            dopt.batch_size = cfg.workload.query_batch_size;
            dopt.open_loop = cfg.open_loop();
            dopt.duration_s = cfg.workload.duration_s;
            dopt.stop = options.stop;

            pipeline::RequestLogWriter log(paths.request_log, {cfg.run_id, cfg.digest, pipeline::kRequestLogVersion});
            try {
                auto res = pipeline::run_requests(pipe, source, dopt, &log);
                log.close(pipeline::LogFooter{res.wall_ns, res.completed, res.interrupted});
                return res;
            } catch (...) {
                log.close();  // no footer: the report marks the run partial
                throw;
            }
        });
        outcome.completed = result.completed;
        outcome.completed_queries = result.completed_queries;
        outcome.wall_s = static_cast<double>(result.wall_ns) / 1e9;
        outcome.partial = result.interrupted;

        in_phase(Phase::kRun, stop_monitor);

        in_phase(Phase::kReport, [&] {
            std::vector<metrics::QualityRecord> quality;
            for (const auto& r : result.records) {
                if (r.kind != workload::OperationKind::kQuery || !r.qa || !r.error.empty()) continue;
                metrics::QualityRecord q;
                q.sequence_no = r.sequence_no;
                q.retrieved_ids = r.retrieved_ids;
                q.reranked_ids = r.reranked_ids;
                q.answer_text = r.answer_text;
                q.qa = *r.qa;
                q.relevant_ids = {r.qa->target_chunk_id};
                q.context_texts = pipe.registry().retrieval_texts(q.reranked_ids);
                quality.push_back(std::move(q));
            }
            metrics::write_quality_records(paths.quality, {cfg.run_id, cfg.digest, pipeline::kRequestLogVersion}, quality);

            ReportRequest rr;
            rr.request_log = paths.request_log;
            if (cfg.monitor.enabled) rr.trace = paths.trace;
            rr.quality = paths.quality;
            rr.index_stats = paths.index_stats;
            rr.out_dir = paths.run_dir;
            rr.formats = {"json", "csv", "svg"};
            rr.recall_mode = cfg.evaluation.recall_mode;
            rr.judge = backends.judge;
            metrics::QualityAggregate agg;
            outcome.report = write_report(rr, &agg);
            outcome.quality = agg;
        });
    } catch (...) {
        try {
            stop_monitor();
        } catch (...) {
        }
        throw;
    }
    return outcome;
}

}  // namespace ragbench::app
