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
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "monitor/probes.hpp"
#include "monitor/ring_buffer.hpp"
#include "monitor/trace_format.hpp"

namespace ragbench::monitor {

inline constexpr std::size_t kMinBufferBytes = 64 * 1024;

struct MonitorConfig {
    std::uint32_t interval_ms = 100;
    std::size_t per_metric_buffer_bytes = 2 * 1024 * 1024;
    std::string output_path;
    std::set<ProbeKind> probes = default_probe_kinds();
    std::vector<int> watched_pids;                // empty: this process
    std::vector<std::string> watched_cgroups;     // empty: this process's cgroup
    double budget_fraction = 0.5;
    bool adaptive = true;
    std::uint32_t drain_interval_ms = 1000;
    ProbeEnvironment env;
    std::shared_ptr<AcceleratorProbe> accelerator;  // absent by default
    std::vector<std::string> external_metrics;      // fed through record()
    bool serving_metrics = false;                   // reserve the serving metric ids
    std::string run_id;
    std::string config_digest;
    bool flush_on_signal = false;
    int nice_increment = 10;
};

void validate(const MonitorConfig& cfg);

// Names of the scraped serving metrics, at kServingIdBase + index.
inline constexpr const char* kServingMetricNames[] = {"serving.ttft_ms", "serving.tpot_ms",
                                                       "serving.kv_cache_utilization"};
inline constexpr const char* kIntervalMetric = "monitor.interval_ms";
inline constexpr const char* kProbeErrorMetric = "monitor.probe_errors";

struct IntervalState {
    std::uint32_t configured_ms = 100;
    std::uint32_t current_ms = 100;
    std::uint32_t low_streak = 0;
};

inline constexpr std::uint32_t kIntervalCapFactor = 64;
inline constexpr std::uint32_t kLowCyclesBeforeHalving = 16;

// Doubles the interval when a collection exceeded budget_fraction of it
// (capped at 64x the configured value); halves it after 16 consecutive
// collections under budget_fraction/4 (floored at the configured value).
// Returns true when the interval changed.
bool adapt_interval(IntervalState& s, double budget_fraction, double last_collection_ms);

struct MetricCounts {
    std::uint16_t id = 0;
    std::string name;
    std::uint64_t emitted = 0;
    std::uint64_t written = 0;
    std::uint64_t dropped = 0;
};

struct FlushReport {
    std::uint64_t samples_written = 0;
    std::uint64_t samples_dropped = 0;
    std::uint64_t trace_bytes = 0;
    std::vector<MetricCounts> per_metric;
    bool partial = false;  // some buffered samples could not be persisted
    std::string error;
};

class Monitor {
 public:
    // Throws OutputUnwritable, AllProbesUnavailable, SecondStartRejected.
    static std::unique_ptr<Monitor> start(MonitorConfig cfg);
    ~Monitor();
    Monitor(const Monitor&) = delete;
    Monitor& operator=(const Monitor&) = delete;

    // Drains, writes the footer and closes the file. Later calls return the
    // same report.
    FlushReport stop();

    std::optional<std::uint16_t> metric_id(const std::string& name) const;
    // Appends an externally produced sample (monotonic timestamp now).
    void record(std::uint16_t id, double value);
    void record_at(std::uint16_t id, std::int64_t timestamp_ns, double value);

    std::uint32_t current_interval_ms() const { return interval_ms_.load(); }
    const std::vector<std::string>& unavailable_probes() const { return unavailable_; }
    const std::vector<MetricName>& metrics() const { return header_.metrics; }
    std::uint64_t cycles() const { return cycles_.load(); }
    std::uint64_t probe_errors() const { return probe_errors_.load(); }
    std::size_t buffer_bytes_allocated() const;
    std::size_t buffer_bytes_configured() const;
    const std::string& output_path() const { return cfg_.output_path; }

 private:
    struct ProbeSlot {
        std::unique_ptr<Probe> probe;
        std::vector<std::uint16_t> ids;
    };

    explicit Monitor(MonitorConfig cfg);
    void open_and_register();
    void sample_loop();
    void drain_loop();
    void drain_once();
    RecordRing* ring_for(std::uint16_t id);

    MonitorConfig cfg_;
    std::string registered_path_;
    TraceHeader header_;
    std::vector<ProbeSlot> probes_;
    std::vector<std::string> unavailable_;
    std::vector<std::unique_ptr<RecordRing>> rings_;  // indexed by dense metric index
    std::vector<std::uint16_t> ring_ids_;
    std::vector<std::uint64_t> written_;
    std::uint16_t interval_id_ = 0;
    std::uint16_t error_id_ = 0;

    std::ofstream out_;
    std::uint64_t trace_bytes_ = 0;
    bool write_failed_ = false;
    std::mutex file_mu_;

    std::atomic<std::uint32_t> interval_ms_{100};
    std::atomic<std::uint64_t> cycles_{0};
    std::atomic<std::uint64_t> probe_errors_{0};

    std::mutex stop_mu_;
    std::condition_variable stop_cv_;
    bool stopping_ = false;
    std::optional<FlushReport> report_;
    std::mutex report_mu_;
    std::thread sampler_;
    std::thread drainer_;
    std::atomic<int> signal_token_{0};
};

}  // namespace ragbench::monitor
