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

#include <chrono>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ragbench/ragbench.h"

namespace {

int report_failure(const char* what, rgb_status st) {
    std::fprintf(stderr, "ragbench %s: %s: %s\n", what, rgb_status_name(st), rgb_last_error());
    const int code = rgb_last_exit_code();
    return code == 0 ? 1 : code;
}

struct ConfigHandle {
    rgb_config* cfg = nullptr;
    ~ConfigHandle() { rgb_config_free(cfg); }
};

int cmd_validate(const std::string& path, bool check_backends) {
    ConfigHandle h;
    if (const rgb_status st = rgb_config_load(path.c_str(), &h.cfg); st != RGB_OK) return report_failure("validate", st);
    if (check_backends) {
        if (const rgb_status st = rgb_config_check_backends(h.cfg); st != RGB_OK) return report_failure("validate", st);
    }
    std::printf("config ok: run_id=%s digest=%s\n", rgb_config_run_id(h.cfg), rgb_config_digest(h.cfg));
    return 0;
}

int cmd_index(const std::string& path) {
    ConfigHandle h;
    if (const rgb_status st = rgb_config_load(path.c_str(), &h.cfg); st != RGB_OK) return report_failure("index", st);
    rgb_index_summary s{};
    if (const rgb_status st = rgb_index(h.cfg, &s); st != RGB_OK) return report_failure("index", st);
    std::printf("indexed %llu documents, %llu chunks, %llu index bytes, build %.3f s\n",
                static_cast<unsigned long long>(s.documents_indexed), static_cast<unsigned long long>(s.chunk_count),
                static_cast<unsigned long long>(s.index_bytes), s.build_seconds);
    return 0;
}

int cmd_run(const std::string& path, bool skip_index, const std::string& emit_trace) {
    ConfigHandle h;
    if (const rgb_status st = rgb_config_load(path.c_str(), &h.cfg); st != RGB_OK) return report_failure("run", st);
    if (const rgb_status st = rgb_install_signal_handlers(); st != RGB_OK) return report_failure("run", st);
    rgb_run_options opts{};
    opts.skip_index = skip_index ? 1 : 0;
    opts.emit_trace = emit_trace.empty() ? nullptr : emit_trace.c_str();
    rgb_run* run = nullptr;
    if (const rgb_status st = rgb_run_benchmark(h.cfg, &opts, &run); st != RGB_OK) return report_failure("run", st);
    std::printf("completed %llu requests in %.3f s%s\n", static_cast<unsigned long long>(rgb_run_completed(run)),
                rgb_run_wall_seconds(run), rgb_run_partial(run) ? " (interrupted, partial)" : "");
    for (const char* name : {"request_log", "trace", "quality", "report_json", "report_csv", "report_svg"}) {
        if (const char* p = rgb_run_artifact(run, name)) std::printf("  %-12s %s\n", name, p);
    }
    const bool partial = rgb_run_partial(run) != 0;
    rgb_run_free(run);
    return partial ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RAG pipeline benchmarking harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(rgb_version()));

    std::string config_path;
    bool check_backends = false;
    auto* validate = app.add_subcommand("validate", "Validate a run config");
    validate->add_option("config", config_path, "Config file")->required();
    validate->add_flag("--check-backends", check_backends, "Contact remote stores to check declared capabilities");

    auto* index = app.add_subcommand("index", "Build the index snapshot for a config");
    index->add_option("config", config_path, "Config file")->required();

    bool skip_index = false;
    std::string emit_trace;
    auto* run = app.add_subcommand("run", "Execute a benchmark run");
    run->add_option("config", config_path, "Config file")->required();
    run->add_flag("--skip-index", skip_index, "Reuse the snapshot written by 'index'");
    run->add_option("--emit-trace", emit_trace, "Write the generated request stream (jsonl) to this path");

    std::string request_log, trace, quality, index_stats, out_dir, formats = "json", recall_mode = "recall";
    auto* report = app.add_subcommand("report", "Build a report from run artifacts");
    report->add_option("--request-log", request_log, "Request log (jsonl)")->required();
    report->add_option("--trace", trace, "Monitor trace file");
    report->add_option("--quality", quality, "Quality records (jsonl)");
    report->add_option("--index-stats", index_stats, "Index stats (json)");
    report->add_option("--out-dir", out_dir, "Output directory")->required();
    report->add_option("--format", formats, "Comma separated: json,csv,svg")->capture_default_str();
    report->add_option("--recall-mode", recall_mode, "recall or precision")->capture_default_str();

    std::uint32_t interval_ms = 100;
    std::string output, probes;
    std::vector<int> pids;
    std::vector<std::string> cgroups;
    double duration_s = 0.0;
    std::size_t buffer_bytes = 0;
    auto* mon = app.add_subcommand("monitor", "Run the resource monitor standalone until interrupted");
    mon->add_option("--interval-ms", interval_ms, "Sampling interval")->capture_default_str();
    mon->add_option("--output", output, "Trace file")->required();
    mon->add_option("--pid", pids, "Process to watch (repeatable)");
    mon->add_option("--cgroup", cgroups, "Cgroup path to watch (repeatable)");
    mon->add_option("--probes", probes, "Comma separated probe names");
    mon->add_option("--duration-s", duration_s, "Stop after this many seconds (0 = until signalled)");
    mon->add_option("--buffer-bytes", buffer_bytes, "Per-metric ring buffer size");

    std::string synth_out;
    std::uint64_t synth_count = 200, synth_seed = 7;
    auto* synth = app.add_subcommand("synth-corpus", "Write a synthetic jsonl corpus");
    synth->add_option("--out", synth_out, "Output path")->required();
    synth->add_option("--count", synth_count, "Number of documents")->capture_default_str();
    synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*validate) return cmd_validate(config_path, check_backends);
    if (*index) return cmd_index(config_path);
    if (*run) return cmd_run(config_path, skip_index, emit_trace);
    if (*report) {
        rgb_report_options ro{};
        ro.request_log = request_log.c_str();
        ro.trace = trace.empty() ? nullptr : trace.c_str();
        ro.quality = quality.empty() ? nullptr : quality.c_str();
        ro.index_stats = index_stats.empty() ? nullptr : index_stats.c_str();
        ro.out_dir = out_dir.c_str();
        ro.formats = formats.c_str();
        ro.recall_mode = recall_mode.c_str();
        if (const rgb_status st = rgb_report(&ro); st != RGB_OK) return report_failure("report", st);
        std::printf("report written to %s\n", out_dir.c_str());
        return 0;
    }
    if (*mon) {
        rgb_monitor_options mo{};
        mo.interval_ms = interval_ms;
        mo.output = output.c_str();
        mo.pids = pids.data();
        mo.pid_count = pids.size();
        std::vector<const char*> cg;
        for (const auto& c : cgroups) cg.push_back(c.c_str());
        mo.cgroups = cg.data();
        mo.cgroup_count = cg.size();
        mo.probes = probes.empty() ? nullptr : probes.c_str();
        mo.buffer_bytes = buffer_bytes;
        if (const rgb_status st = rgb_install_signal_handlers(); st != RGB_OK) return report_failure("monitor", st);
        rgb_monitor* m = nullptr;
        if (const rgb_status st = rgb_monitor_start(&mo, &m); st != RGB_OK) return report_failure("monitor", st);
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(duration_s);
        while (!rgb_stop_requested() && (duration_s <= 0.0 || std::chrono::steady_clock::now() < deadline)) {
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
        rgb_monitor_summary s{};
        const rgb_status st = rgb_monitor_stop(m, &s);
        rgb_monitor_free(m);
        std::printf("samples written %llu, dropped %llu, %llu bytes\n", static_cast<unsigned long long>(s.samples_written),
                    static_cast<unsigned long long>(s.samples_dropped), static_cast<unsigned long long>(s.trace_bytes));
        return st == RGB_OK ? 0 : report_failure("monitor", st);
    }
    if (*synth) {
        if (const rgb_status st = rgb_synth_corpus(synth_out.c_str(), synth_count, synth_seed); st != RGB_OK) {
            return report_failure("synth-corpus", st);
        }
        std::printf("wrote %llu documents to %s\n", static_cast<unsigned long long>(synth_count), synth_out.c_str());
        return 0;
    }
    return 2;
}
