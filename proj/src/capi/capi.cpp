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

#include "ragbench/ragbench.h"

#include <atomic>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "app/config.hpp"
#include "app/ingest.hpp"
#include "app/runner.hpp"
#include "monitor/monitor.hpp"
#include "monitor/signal_flush.hpp"

struct rgb_config {
    ragbench::app::RunConfig cfg;
};

struct rgb_run {
    ragbench::app::RunOutcome outcome;
    std::map<std::string, std::string> artifacts;
    std::string report_text;
};

struct rgb_monitor {
    std::unique_ptr<ragbench::monitor::Monitor> mon;
};

namespace {

using ragbench::Errc;
using ragbench::Error;
using ragbench::app::Phase;

thread_local std::string t_last_error;
thread_local int t_last_exit = 0;

std::atomic<bool> g_stop{false};
std::atomic<int> g_signal_token{0};

rgb_status set_error(Errc code, const std::string& message, int exit_code) {
    t_last_error = message;
    t_last_exit = exit_code;
    return static_cast<rgb_status>(code);
}

// Runs `f` and converts exceptions to a status. `phase` gives the exit code
// for errors not already attributed to a phase.
template <typename F>
rgb_status guarded(Phase phase, F&& f) {
    try {
        f();
        t_last_error.clear();
        t_last_exit = 0;
        return RGB_OK;
    } catch (const ragbench::app::PhaseError& e) {
        std::string msg = e.what();
        if (!e.stage().empty() && msg.rfind(e.stage(), 0) != 0) msg = e.stage() + ": " + msg;
        return set_error(e.code(), msg, static_cast<int>(e.phase()));
    } catch (const Error& e) {
        return set_error(e.code(), e.what(), static_cast<int>(phase));
    } catch (const std::exception& e) {
        return set_error(Errc::kInternal, e.what(), static_cast<int>(phase));
    } catch (...) {
        return set_error(Errc::kInternal, "unknown error", static_cast<int>(phase));
    }
}

rgb_status null_arg(const char* what) {
    return set_error(Errc::kInvalidArgument, std::string(what) + " must not be NULL", 1);
}

std::vector<std::string> split_csv(const char* s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(' ');
        const auto e = item.find_last_not_of(' ');
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace

extern "C" {

RGB_API const char* rgb_version(void) { return "0.1.0"; }

RGB_API const char* rgb_status_name(int status) {
    static thread_local std::string name;
    name = std::string(ragbench::errc_name(static_cast<Errc>(status)));
    return name.c_str();
}

RGB_API const char* rgb_last_error(void) { return t_last_error.c_str(); }
RGB_API int rgb_last_exit_code(void) { return t_last_exit; }

RGB_API rgb_status rgb_install_signal_handlers(void) {
    return guarded(Phase::kRun, [] {
        if (g_signal_token.load() != 0) return;
        g_signal_token = ragbench::monitor::add_signal_callback([](int) {
            // First signal stops gracefully; a second one falls through to the default action.
            return g_stop.exchange(true);
        });
    });
}

RGB_API void rgb_request_stop(void) { g_stop = true; }
RGB_API int rgb_stop_requested(void) { return g_stop.load() ? 1 : 0; }

RGB_API rgb_status rgb_config_load(const char* path, rgb_config** out) {
    if (path == nullptr) return null_arg("path");
    if (out == nullptr) return null_arg("out");
    *out = nullptr;
    return guarded(Phase::kConfig, [&] {
        auto c = std::make_unique<rgb_config>();
        c->cfg = ragbench::app::load_config(path);
        *out = c.release();
    });
}

RGB_API void rgb_config_free(rgb_config* cfg) { delete cfg; }
RGB_API const char* rgb_config_digest(const rgb_config* cfg) { return cfg ? cfg->cfg.digest.c_str() : nullptr; }
RGB_API const char* rgb_config_run_id(const rgb_config* cfg) { return cfg ? cfg->cfg.run_id.c_str() : nullptr; }
RGB_API const char* rgb_config_output_dir(const rgb_config* cfg) { return cfg ? cfg->cfg.output_dir.c_str() : nullptr; }

RGB_API rgb_status rgb_config_check_backends(const rgb_config* cfg) {
    if (cfg == nullptr) return null_arg("cfg");
    return guarded(Phase::kConfig, [&] { ragbench::app::check_backend_capabilities(cfg->cfg); });
}

RGB_API rgb_status rgb_index(const rgb_config* cfg, rgb_index_summary* summary) {
    if (cfg == nullptr) return null_arg("cfg");
    return guarded(Phase::kIndex, [&] {
        const auto s = ragbench::app::build_index_snapshot(cfg->cfg);
        if (summary != nullptr) {
            summary->documents_indexed = s.documents_indexed;
            summary->chunk_count = s.stats.chunk_count;
            summary->index_bytes = s.stats.index_bytes;
            summary->build_seconds = s.stats.build_s;
        }
    });
}

RGB_API rgb_status rgb_run_benchmark(const rgb_config* cfg, const rgb_run_options* options, rgb_run** out) {
    if (cfg == nullptr) return null_arg("cfg");
    if (out == nullptr) return null_arg("out");
    *out = nullptr;
    return guarded(Phase::kRun, [&] {
        ragbench::app::RunOptions ro;
        if (options != nullptr) {
            ro.skip_index = options->skip_index != 0;
            if (options->emit_trace != nullptr) ro.emit_trace = options->emit_trace;
        }
        ro.stop = &g_stop;
        auto run = std::make_unique<rgb_run>();
        run->outcome = ragbench::app::run_benchmark(cfg->cfg, ro);
        const auto& p = run->outcome.paths;
        run->artifacts = {{"run_dir", p.run_dir},         {"request_log", p.request_log}, {"quality", p.quality},
                          {"index_stats", p.index_stats}, {"manifest", p.manifest},       {"report_json", p.report_json},
                          {"report_csv", p.report_csv},   {"report_svg", p.report_svg}};
        if (run->outcome.trace_written) run->artifacts["trace"] = p.trace;
        run->report_text = run->outcome.report.dump();
        *out = run.release();
    });
}

RGB_API void rgb_run_free(rgb_run* run) { delete run; }
RGB_API int rgb_run_partial(const rgb_run* run) { return run && run->outcome.partial ? 1 : 0; }
RGB_API uint64_t rgb_run_completed(const rgb_run* run) { return run ? run->outcome.completed : 0; }
RGB_API double rgb_run_wall_seconds(const rgb_run* run) { return run ? run->outcome.wall_s : 0.0; }

RGB_API const char* rgb_run_artifact(const rgb_run* run, const char* name) {
    if (run == nullptr || name == nullptr) return nullptr;
    auto it = run->artifacts.find(name);
    return it == run->artifacts.end() ? nullptr : it->second.c_str();
}

RGB_API const char* rgb_run_report(const rgb_run* run) { return run ? run->report_text.c_str() : nullptr; }

RGB_API rgb_status rgb_report(const rgb_report_options* options) {
    if (options == nullptr) return null_arg("options");
    if (options->request_log == nullptr) return null_arg("request_log");
    if (options->out_dir == nullptr) return null_arg("out_dir");
    return guarded(Phase::kReport, [&] {
        ragbench::app::ReportRequest rr;
        rr.request_log = options->request_log;
        if (options->trace != nullptr) rr.trace = options->trace;
        if (options->quality != nullptr) rr.quality = options->quality;
        if (options->index_stats != nullptr) rr.index_stats = options->index_stats;
        rr.out_dir = options->out_dir;
        if (options->formats != nullptr) rr.formats = split_csv(options->formats);
        if (options->recall_mode != nullptr) {
            auto m = ragbench::metrics::parse_recall_mode(options->recall_mode);
            if (!m) ragbench::fail(Errc::kInvalidArgument, "recall mode must be recall or precision");
            rr.recall_mode = *m;
        }
        ragbench::app::write_report(rr);
    });
}

RGB_API rgb_status rgb_monitor_start(const rgb_monitor_options* options, rgb_monitor** out) {
    if (options == nullptr) return null_arg("options");
    if (options->output == nullptr) return null_arg("output");
    if (out == nullptr) return null_arg("out");
    *out = nullptr;
    return guarded(Phase::kRun, [&] {
        ragbench::monitor::MonitorConfig mc;
        if (options->interval_ms != 0) mc.interval_ms = options->interval_ms;
        if (options->buffer_bytes != 0) mc.per_metric_buffer_bytes = options->buffer_bytes;
        mc.output_path = options->output;
        for (size_t i = 0; i < options->pid_count; ++i) mc.watched_pids.push_back(options->pids[i]);
        for (size_t i = 0; i < options->cgroup_count; ++i) mc.watched_cgroups.emplace_back(options->cgroups[i]);
        if (options->probes != nullptr) {
            mc.probes.clear();
            for (const auto& name : split_csv(options->probes)) {
                auto k = ragbench::monitor::parse_probe_kind(name);
                if (!k) ragbench::fail(Errc::kInvalidArgument, "unknown probe '" + name + "'");
                mc.probes.insert(*k);
            }
        }
        mc.run_id = "standalone";
        auto m = std::make_unique<rgb_monitor>();
        m->mon = ragbench::monitor::Monitor::start(std::move(mc));
        *out = m.release();
    });
}

RGB_API rgb_status rgb_monitor_stop(rgb_monitor* mon, rgb_monitor_summary* summary) {
    if (mon == nullptr) return null_arg("mon");
    return guarded(Phase::kRun, [&] {
        const auto r = mon->mon->stop();
        if (summary != nullptr) {
            summary->samples_written = r.samples_written;
            summary->samples_dropped = r.samples_dropped;
            summary->trace_bytes = r.trace_bytes;
            summary->partial = r.partial ? 1 : 0;
        }
        if (!r.error.empty()) ragbench::fail(Errc::kPartialFlush, r.error);
    });
}

RGB_API void rgb_monitor_free(rgb_monitor* mon) { delete mon; }

RGB_API rgb_status rgb_synth_corpus(const char* path, uint64_t count, uint64_t seed) {
    if (path == nullptr) return null_arg("path");
    return guarded(Phase::kConfig, [&] {
        ragbench::app::write_jsonl_corpus(path, ragbench::app::synthetic_documents(count, seed));
    });
}

}  // extern "C"
