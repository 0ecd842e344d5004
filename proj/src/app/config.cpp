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

#include "app/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "common/hash.hpp"
#include "pipeline/chunker.hpp"

namespace ragbench::app {

namespace fs = std::filesystem;

std::string format_diagnostic(const Diagnostic& d) {
    std::string out;
    if (d.line > 0) out += "line " + std::to_string(d.line) + ": ";
    if (!d.key_path.empty()) out += d.key_path + ": ";
    return out + d.message;
}

namespace {

std::string join_diags(const std::vector<Diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
        if (!out.empty()) out += "\n";
        out += format_diagnostic(d);
    }
    return out;
}

}  // namespace

ConfigError::ConfigError(Errc code, std::vector<Diagnostic> diags)
    : Error(code, join_diags(diags)), diags_(std::move(diags)) {}

std::size_t RunConfig::driver_workers() const {
    if (const auto* c = std::get_if<workload::ClosedLoop>(&workload.arrival)) return c->concurrency;
    return dispatchers;
}

bool RunConfig::open_loop() const { return !std::holds_alternative<workload::ClosedLoop>(workload.arrival); }

namespace {

std::string child_path(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

template <typename T>
constexpr const char* type_label() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else if constexpr (std::is_unsigned_v<T>) return "a non-negative integer";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else return "a string";
}

class Walker {
 public:
    std::vector<Diagnostic> diags;

    static int line(const YAML::Node& n) {
        if (!n.IsDefined()) return 0;
        const auto m = n.Mark();
        return m.line >= 0 ? m.line + 1 : 0;
    }

    void error(const std::string& path, const YAML::Node& at, std::string message) {
        diags.push_back({path, line(at), std::move(message)});
    }

    // True when `n` is a usable mapping (null counts as empty). Reports keys
    // outside `allowed`.
    bool map(const YAML::Node& n, const std::string& path, std::initializer_list<std::string_view> allowed) {
        if (!n.IsDefined() || n.IsNull()) return false;
        if (!n.IsMap()) {
            error(path, n, "expected a mapping");
            return false;
        }
        for (const auto& kv : n) {
            const auto key = kv.first.Scalar();
            bool ok = false;
            for (auto a : allowed) ok = ok || a == key;
            if (!ok) {
                std::string list;
                for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
                error(child_path(path, key), kv.first, "unknown key (allowed: " + list + ")");
            }
        }
        return true;
    }

    template <typename T>
    bool get(const YAML::Node& parent, const std::string& path, const char* key, T& out) {
        if (!parent.IsDefined() || !parent.IsMap()) return false;
        const YAML::Node n = parent[key];
        if (!n.IsDefined() || n.IsNull()) return false;
        const auto p = child_path(path, key);
        if (!n.IsScalar()) {
            error(p, n, std::string("expected ") + type_label<T>());
            return false;
        }
        try {
            if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
                if (!n.Scalar().empty() && n.Scalar().front() == '-') throw YAML::BadConversion(n.Mark());
            }
            out = n.as<T>();
            if constexpr (std::is_floating_point_v<T>) {
                if (!std::isfinite(out)) throw YAML::BadConversion(n.Mark());
            }
            return true;
        } catch (const YAML::Exception&) {
            error(p, n, std::string("expected ") + type_label<T>() + ", got '" + n.Scalar() + "'");
            return false;
        }
    }

    template <typename T>
    void get_opt(const YAML::Node& parent, const std::string& path, const char* key, std::optional<T>& out) {
        T v{};
        if (get(parent, path, key, v)) out = v;
    }

    bool strings(const YAML::Node& parent, const std::string& path, const char* key, std::vector<std::string>& out) {
        if (!parent.IsDefined() || !parent.IsMap()) return false;
        const YAML::Node n = parent[key];
        if (!n.IsDefined() || n.IsNull()) return false;
        const auto p = child_path(path, key);
        if (!n.IsSequence()) {
            error(p, n, "expected a list");
            return false;
        }
        out.clear();
        for (const auto& item : n) {
            if (!item.IsScalar()) {
                error(p, item, "expected a list of strings");
                return false;
            }
            out.push_back(item.Scalar());
        }
        return true;
    }

    void positive(const YAML::Node& parent, const std::string& path, const char* key, double v) {
        if (!(v > 0.0)) error(child_path(path, key), parent[key], "must be > 0");
    }
};

nlohmann::json to_canonical(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Map: {
            nlohmann::json j = nlohmann::json::object();
            for (const auto& kv : n) j[kv.first.Scalar()] = to_canonical(kv.second);
            return j;
        }
        case YAML::NodeType::Sequence: {
            nlohmann::json j = nlohmann::json::array();
            for (const auto& item : n) j.push_back(to_canonical(item));
            return j;
        }
        case YAML::NodeType::Scalar:
            return n.Scalar();
        default:
            return nullptr;
    }
}

void parse_endpoint(Walker& w, const YAML::Node& parent, const std::string& path,
                    std::optional<connectors::EndpointConfig>& out) {
    const YAML::Node n = parent.IsMap() ? parent["endpoint"] : YAML::Node();
    const auto p = child_path(path, "endpoint");
    if (!w.map(n, p, {"url", "timeout_ms", "max_retries", "backoff_ms", "max_in_flight", "auth_token", "model"})) return;
    connectors::EndpointConfig e;
    w.get(n, p, "url", e.base_url);
    w.get(n, p, "timeout_ms", e.timeout_ms);
    w.get(n, p, "max_retries", e.max_retries);
    w.get(n, p, "backoff_ms", e.backoff_base_ms);
    w.get(n, p, "max_in_flight", e.max_in_flight);
    std::string token;
    if (w.get(n, p, "auth_token", token)) e.auth_token = token;
    w.get(n, p, "model", e.model);
    try {
        connectors::validate(e);
    } catch (const Error& err) {
        w.error(p, n, err.what());
    }
    out = e;
}

void parse_backend(Walker& w, const YAML::Node& n, const std::string& path, BackendChoice& out,
                   std::initializer_list<std::string_view> registered) {
    if (!n.IsDefined() || !n.IsMap()) return;
    w.get(n, path, "backend", out.backend);
    bool ok = false;
    std::string list;
    for (auto r : registered) {
        ok = ok || r == out.backend;
        list += (list.empty() ? "" : ", ") + std::string(r);
    }
    if (!ok) w.error(child_path(path, "backend"), n["backend"], "unknown backend '" + out.backend + "' (registered: " + list + ")");
    parse_endpoint(w, n, path, out.endpoint);
    if (out.remote() && !out.endpoint) w.error(child_path(path, "endpoint"), n, "remote backend requires an endpoint");
}

void parse_corpus(Walker& w, const YAML::Node& root, RunConfig& cfg, const std::string& base_dir) {
    const YAML::Node n = root["corpus"];
    const std::string p = "corpus";
    if (!w.map(n, p, {"path", "format", "limit", "holdout", "documents", "seed"})) {
        w.error(p, root, "corpus section is required");
        return;
    }
    std::string format = "jsonl";
    w.get(n, p, "format", format);
    if (format == "jsonl") cfg.corpus.format = CorpusFormat::kJsonl;
    else if (format == "plain_dir") cfg.corpus.format = CorpusFormat::kPlainDir;
    else if (format == "synthetic") cfg.corpus.format = CorpusFormat::kSynthetic;
    else w.error("corpus.format", n["format"], "expected one of jsonl, plain_dir, synthetic");
    if (w.get(n, p, "path", cfg.corpus.path)) {
        fs::path cp(cfg.corpus.path);
        if (cp.is_relative()) cfg.corpus.path = (fs::path(base_dir) / cp).lexically_normal().string();
    } else if (cfg.corpus.format != CorpusFormat::kSynthetic) {
        w.error("corpus.path", n, "required for format " + format);
    }
    w.get_opt(n, p, "limit", cfg.corpus.limit);
    w.get(n, p, "holdout", cfg.corpus.holdout);
    w.get(n, p, "documents", cfg.corpus.synthetic_documents);
    w.get(n, p, "seed", cfg.corpus.synthetic_seed);
    if (cfg.corpus.format == CorpusFormat::kSynthetic && cfg.corpus.synthetic_documents == 0) {
        w.error("corpus.documents", n["documents"], "must be >= 1");
    }
}

void parse_workload(Walker& w, const YAML::Node& root, RunConfig& cfg) {
    const YAML::Node n = root["workload"];
    const std::string p = "workload";
    auto& spec = cfg.workload;
    if (!w.map(n, p, {"mix", "access", "arrival", "duration_s", "total_requests", "seed", "batch_size", "mutator"})) {
        w.error(p, root, "workload section is required");
        return;
    }
    const YAML::Node mix = n["mix"];
    if (w.map(mix, "workload.mix", {"query", "insert", "update", "removal"})) {
        spec.mix = {0.0, 0.0, 0.0, 0.0};
        w.get(mix, "workload.mix", "query", spec.mix.query);
        w.get(mix, "workload.mix", "insert", spec.mix.insert);
        w.get(mix, "workload.mix", "update", spec.mix.update);
        w.get(mix, "workload.mix", "removal", spec.mix.removal);
        const double parts[] = {spec.mix.query, spec.mix.insert, spec.mix.update, spec.mix.removal};
        double sum = 0.0;
        bool negative = false;
        for (double x : parts) {
            sum += x;
            negative = negative || x < 0.0;
        }
        if (negative) w.error("workload.mix", mix, "probabilities must be non-negative");
        if (std::abs(sum - 1.0) > 1e-9) {
            std::ostringstream ss;
            ss << "operation mix sums to " << sum << ", expected 1";
            w.error("workload.mix", mix, ss.str());
        }
    }

    const YAML::Node access = n["access"];
    if (w.map(access, "workload.access", {"kind", "exponent", "seed"})) {
        std::string kind = "uniform";
        w.get(access, "workload.access", "kind", kind);
        if (kind == "uniform") spec.access.kind = workload::AccessKind::kUniform;
        else if (kind == "zipfian") spec.access.kind = workload::AccessKind::kZipfian;
        else w.error("workload.access.kind", access["kind"], "expected uniform or zipfian");
        if (w.get(access, "workload.access", "exponent", spec.access.exponent)) {
            w.positive(access, "workload.access", "exponent", spec.access.exponent);
        }
        w.get(access, "workload.access", "seed", spec.access.rank_permutation_seed);
    }

    const YAML::Node arrival = n["arrival"];
    if (w.map(arrival, "workload.arrival", {"kind", "rate", "concurrency", "dispatchers"})) {
        const std::string ap = "workload.arrival";
        std::string kind = "closed";
        w.get(arrival, ap, "kind", kind);
        double rate = 1.0;
        const bool has_rate = w.get(arrival, ap, "rate", rate);
        std::uint32_t concurrency = 1;
        w.get(arrival, ap, "concurrency", concurrency);
        w.get(arrival, ap, "dispatchers", cfg.dispatchers);
        if (kind == "closed") {
            if (concurrency < 1) w.error("workload.arrival.concurrency", arrival["concurrency"], "must be >= 1");
            spec.arrival = workload::ClosedLoop{concurrency};
        } else if (kind == "fixed" || kind == "poisson") {
            if (!has_rate) w.error("workload.arrival.rate", arrival, "required for open-loop arrival");
            else w.positive(arrival, ap, "rate", rate);
            if (kind == "fixed") spec.arrival = workload::OpenLoopFixed{rate};
            else spec.arrival = workload::OpenLoopPoisson{rate};
            if (cfg.dispatchers < 1) w.error("workload.arrival.dispatchers", arrival["dispatchers"], "must be >= 1");
        } else {
            w.error("workload.arrival.kind", arrival["kind"], "expected closed, fixed or poisson");
        }
    }

    w.get_opt(n, p, "duration_s", spec.duration_s);
    w.get_opt(n, p, "total_requests", spec.total_requests);
    if (spec.duration_s && !(*spec.duration_s > 0.0)) w.error("workload.duration_s", n["duration_s"], "must be > 0");
    if (spec.duration_s.has_value() == spec.total_requests.has_value()) {
        w.error("workload", n, "exactly one of workload.duration_s or workload.total_requests must be set");
    }
    w.get(n, p, "seed", spec.seed);
    w.get(n, p, "batch_size", spec.query_batch_size);
    if (spec.query_batch_size < 1) w.error("workload.batch_size", n["batch_size"], "must be >= 1");

    const YAML::Node mut = n["mutator"];
    if (w.map(mut, "workload.mutator", {"backend", "endpoint"})) {
        parse_backend(w, mut, "workload.mutator", cfg.mutator, {kReferenceBackend, kRemoteBackend});
    }
}

void parse_pipeline(Walker& w, const YAML::Node& root, RunConfig& cfg) {
    const YAML::Node n = root["pipeline"];
    if (!w.map(n, "pipeline", {"chunking", "embedding", "store", "retrieval", "rerank", "generation"})) return;

    const YAML::Node ch = n["chunking"];
    const std::string cp = "pipeline.chunking";
    if (w.map(ch, cp, {"mode", "size", "overlap", "separators", "max_len", "context_overlap"})) {
        auto& c = cfg.chunking;
        w.get(ch, cp, "mode", c.mode);
        w.get(ch, cp, "size", c.size);
        w.get(ch, cp, "overlap", c.overlap);
        w.strings(ch, cp, "separators", c.separators);
        w.get(ch, cp, "max_len", c.max_len);
        w.get(ch, cp, "context_overlap", c.context_overlap);
        try {
            if (c.mode == "fixed") pipeline::FixedChunker(c.size, c.overlap);
            else if (c.mode == "separator") pipeline::SeparatorChunker(c.separators, c.max_len, c.context_overlap);
            else w.error(cp + ".mode", ch["mode"], "expected fixed or separator");
        } catch (const Error& e) {
            w.error(cp, ch, e.what());
        }
    }

    const YAML::Node em = n["embedding"];
    const std::string ep = "pipeline.embedding";
    if (w.map(em, ep, {"backend", "dim", "batch_size", "seed", "endpoint"})) {
        parse_backend(w, em, ep, cfg.embedding, {kReferenceBackend, kRemoteBackend});
        w.get(em, ep, "dim", cfg.embedding.dim);
        w.get(em, ep, "batch_size", cfg.embedding.batch_size);
        w.get(em, ep, "seed", cfg.embedding.seed);
        if (cfg.embedding.dim < 1) w.error(ep + ".dim", em["dim"], "must be >= 1");
        if (cfg.embedding.batch_size < 1) w.error(ep + ".batch_size", em["batch_size"], "must be >= 1");
    }

    const YAML::Node st = n["store"];
    const std::string sp = "pipeline.store";
    if (w.map(st, sp, {"backend", "index", "nlist", "nprobe", "metric", "buffer_threshold", "seed", "graph_m",
                       "ef_construction", "endpoint"})) {
        auto& spec = cfg.store.index;
        parse_backend(w, st, sp, cfg.store, {kReferenceBackend, kRemoteBackend});
        const YAML::Node idx = st["index"];
        if (w.map(idx, sp + ".index", {"kind"})) {
            std::string kind = "hybrid_ivf";
            w.get(idx, sp + ".index", "kind", kind);
            if (kind == "flat") spec.kind = IndexKind::kFlat;
            else if (kind == "ivf") spec.kind = IndexKind::kIvf;
            else if (kind == "hybrid_ivf") spec.kind = IndexKind::kHybridIvf;
            else w.error(sp + ".index.kind", idx["kind"], "expected flat, ivf or hybrid_ivf");
        }
        w.get(st, sp, "nlist", spec.nlist);
        w.get(st, sp, "nprobe", spec.nprobe);
        std::string metric = "cosine";
        if (w.get(st, sp, "metric", metric)) {
            if (metric == "cosine") spec.metric = Metric::kCosine;
            else if (metric == "l2") spec.metric = Metric::kL2;
            else w.error(sp + ".metric", st["metric"], "expected cosine or l2");
        }
        w.get(st, sp, "buffer_threshold", spec.buffer_threshold);
        w.get(st, sp, "seed", spec.seed);
        w.get(st, sp, "graph_m", spec.graph_m);
        w.get(st, sp, "ef_construction", spec.ef_construction);
        if (spec.nlist < 1) w.error(sp + ".nlist", st["nlist"], "must be >= 1");
        if (spec.nprobe < 1) w.error(sp + ".nprobe", st["nprobe"], "must be >= 1");
        if (spec.nprobe > spec.nlist) {
            w.error(sp + ".nprobe", st["nprobe"].IsDefined() ? st["nprobe"] : st,
                    "nprobe (" + std::to_string(spec.nprobe) + ") exceeds pipeline.store.nlist (" +
                        std::to_string(spec.nlist) + ")");
        }
        if (spec.buffer_threshold < 1) w.error(sp + ".buffer_threshold", st["buffer_threshold"], "must be >= 1");
    }

    const YAML::Node rt = n["retrieval"];
    if (w.map(rt, "pipeline.retrieval", {"k"})) w.get(rt, "pipeline.retrieval", "k", cfg.query.k);
    if (cfg.query.k < 1) w.error("pipeline.retrieval.k", rt, "must be >= 1");

    const YAML::Node rr = n["rerank"];
    if (w.map(rr, "pipeline.rerank", {"backend", "out_depth"})) {
        parse_backend(w, rr, "pipeline.rerank", cfg.rerank, {kReferenceBackend});
        w.get(rr, "pipeline.rerank", "out_depth", cfg.query.rerank_out);
    }
    if (cfg.query.rerank_out < 1) w.error("pipeline.rerank.out_depth", rr, "must be >= 1");
    if (cfg.query.rerank_out > cfg.query.k) {
        const YAML::Node at = rr.IsDefined() && rr.IsMap() && rr["out_depth"].IsDefined() ? rr["out_depth"] : n;
        w.error("pipeline.rerank.out_depth", at,
                "pipeline.rerank.out_depth (" + std::to_string(cfg.query.rerank_out) +
                    ") exceeds pipeline.retrieval.k (" + std::to_string(cfg.query.k) + ")");
    }

    const YAML::Node gen = n["generation"];
    const std::string gp = "pipeline.generation";
    if (w.map(gen, gp, {"backend", "template", "max_tokens", "endpoint"})) {
        parse_backend(w, gen, gp, cfg.generation, {kReferenceBackend, kRemoteBackend});
        if (w.get(gen, gp, "template", cfg.query.prompt_template)) {
            for (const char* ph : {"{question}", "{contexts}"}) {
                const auto& t = cfg.query.prompt_template;
                const auto first = t.find(ph);
                if (first == std::string::npos || t.find(ph, first + 1) != std::string::npos) {
                    w.error(gp + ".template", gen["template"], std::string("placeholder ") + ph + " must appear exactly once");
                }
            }
        }
        w.get(gen, gp, "max_tokens", cfg.generation.max_tokens);
        if (cfg.generation.max_tokens < 1) w.error(gp + ".max_tokens", gen["max_tokens"], "must be >= 1");
    }
}

void parse_monitor(Walker& w, const YAML::Node& root, RunConfig& cfg) {
    const YAML::Node n = root["monitor"];
    const std::string p = "monitor";
    if (!w.map(n, p, {"enabled", "interval_ms", "buffer_bytes", "probes", "pids", "cgroups", "budget_fraction",
                      "adaptive", "drain_interval_ms", "serving"})) {
        return;
    }
    auto& m = cfg.monitor;
    auto& mc = m.config;
    w.get(n, p, "enabled", m.enabled);
    w.get(n, p, "interval_ms", mc.interval_ms);
    w.get(n, p, "buffer_bytes", mc.per_metric_buffer_bytes);
    std::vector<std::string> probes;
    if (w.strings(n, p, "probes", probes)) {
        mc.probes.clear();
        for (const auto& name : probes) {
            if (auto k = monitor::parse_probe_kind(name)) mc.probes.insert(*k);
            else w.error("monitor.probes", n["probes"], "unknown probe '" + name + "'");
        }
    }
    const YAML::Node pids = n["pids"];
    if (pids.IsDefined() && !pids.IsNull()) {
        if (!pids.IsSequence()) {
            w.error("monitor.pids", pids, "expected a list");
        } else {
            for (const auto& item : pids) {
                try {
                    mc.watched_pids.push_back(item.as<int>());
                } catch (const YAML::Exception&) {
                    w.error("monitor.pids", item, "expected an integer");
                }
            }
        }
    }
    w.strings(n, p, "cgroups", mc.watched_cgroups);
    w.get(n, p, "budget_fraction", mc.budget_fraction);
    w.get(n, p, "adaptive", mc.adaptive);
    w.get(n, p, "drain_interval_ms", mc.drain_interval_ms);
    try {
        auto probe = mc;
        probe.output_path = "trace.rgbt";  // assigned per run
        monitor::validate(probe);
    } catch (const Error& e) {
        w.error(p, n, e.what());
    }
    const YAML::Node sv = n["serving"];
    if (w.map(sv, "monitor.serving", {"endpoint", "interval_ms"})) {
        parse_endpoint(w, sv, "monitor.serving", m.serving_endpoint);
        w.get(sv, "monitor.serving", "interval_ms", m.serving_interval_ms);
        if (!m.serving_endpoint) w.error("monitor.serving.endpoint", sv, "required");
        if (m.serving_interval_ms < 1) w.error("monitor.serving.interval_ms", sv["interval_ms"], "must be >= 1");
        mc.serving_metrics = m.serving_endpoint.has_value();
    }
}

void parse_evaluation(Walker& w, const YAML::Node& root, RunConfig& cfg) {
    const YAML::Node n = root["evaluation"];
    if (!w.map(n, "evaluation", {"backend", "recall_mode", "endpoint"})) return;
    parse_backend(w, n, "evaluation", cfg.evaluation, {kReferenceBackend, kRemoteBackend});
    std::string mode;
    if (w.get(n, "evaluation", "recall_mode", mode)) {
        if (auto m = metrics::parse_recall_mode(mode)) cfg.evaluation.recall_mode = *m;
        else w.error("evaluation.recall_mode", n["recall_mode"], "expected recall or precision");
    }
}

}  // namespace

RunConfig parse_config(const std::string& yaml_text, const std::string& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(Errc::kParseError, {{"", e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg}});
    }
    Walker w;
    RunConfig cfg;
    if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError(Errc::kSchemaError, {{"", Walker::line(root), "expected a mapping at top level"}});
    w.map(root, "", {"run_id", "output_dir", "corpus", "workload", "pipeline", "monitor", "evaluation"});
    w.get(root, "", "run_id", cfg.run_id);
    if (cfg.run_id.empty() || cfg.run_id.find_first_of("/\\") != std::string::npos) {
        w.error("run_id", root["run_id"], "must be a non-empty name without path separators");
    }
    w.get(root, "", "output_dir", cfg.output_dir);
    parse_corpus(w, root, cfg, base_dir);
    parse_workload(w, root, cfg);
    parse_pipeline(w, root, cfg);
    parse_monitor(w, root, cfg);
    parse_evaluation(w, root, cfg);

    if (w.diags.empty()) {
        const auto caps = check_capabilities(cfg, pipeline::StoreCapabilities{});
        w.diags.insert(w.diags.end(), caps.begin(), caps.end());
    }
    if (!w.diags.empty()) throw ConfigError(Errc::kSchemaError, std::move(w.diags));

    auto canonical = to_canonical(root);
    canonical.erase("output_dir");
    cfg.digest = hex64(fnv1a64(canonical.dump()));

    if (const char* out = std::getenv("RAGBENCH_OUT"); out != nullptr && *out != '\0') cfg.output_dir = out;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(Errc::kIo, {{"", 0, "cannot read config file " + path}});
    std::ostringstream ss;
    ss << in.rdbuf();
    auto base = fs::path(path).parent_path();
    auto cfg = parse_config(ss.str(), base.empty() ? "." : base.string());
    cfg.source_path = path;
    return cfg;
}

std::vector<Diagnostic> check_capabilities(const RunConfig& cfg, const pipeline::StoreCapabilities& caps) {
    std::vector<Diagnostic> out;
    auto need = [&](bool have, const char* op, const std::string& why) {
        if (!have) out.push_back({"pipeline.store.backend", 0, "backend '" + cfg.store.backend + "' does not support " + op + " (" + why + ")"});
    };
    need(caps.insert, "insert", "indexing");
    need(caps.search, "search", "queries");
    if (cfg.store.index.kind != IndexKind::kFlat) need(caps.build_index, "build_index", "index kind requires training");
    const auto& mix = cfg.workload.mix;
    if (mix.update > 0.0) need(caps.remove, "delete", "workload.mix.update > 0");
    if (mix.removal > 0.0) need(caps.remove, "delete", "workload.mix.removal > 0");
    if (mix.insert > 0.0 && cfg.corpus.holdout == 0) {
        out.push_back({"corpus.holdout", 0, "workload.mix.insert > 0 needs held-out documents to insert"});
    }
    return out;
}

}  // namespace ragbench::app
