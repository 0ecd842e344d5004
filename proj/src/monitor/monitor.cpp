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

#include "monitor/monitor.hpp"

#include <sys/resource.h>
#include <sys/syscall.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <unordered_map>

#include "common/clock.hpp"
#include "common/error.hpp"
#include "monitor/signal_flush.hpp"

namespace ragbench::monitor {

namespace {

std::mutex g_paths_mu;
std::set<std::string>& active_paths() {
    static std::set<std::string> paths;
    return paths;
}

std::string path_key(const std::string& p) {
    std::error_code ec;
    auto abs = std::filesystem::absolute(p, ec);
    if (ec) return p;
    auto canon = std::filesystem::weakly_canonical(abs, ec);
    return ec ? abs.string() : canon.string();
}

void lower_priority(int increment) {
    if (increment <= 0) return;
    const auto tid = static_cast<id_t>(::syscall(SYS_gettid));
    const int cur = ::getpriority(PRIO_PROCESS, tid);
    ::setpriority(PRIO_PROCESS, tid, std::min(19, cur + increment));
}

}  // namespace

void validate(const MonitorConfig& cfg) {
    if (cfg.interval_ms < 1) fail(Errc::kInvalidArgument, "monitor interval_ms must be >= 1");
    if (cfg.per_metric_buffer_bytes < kMinBufferBytes) {
        fail(Errc::kInvalidArgument, "monitor per_metric_buffer_bytes must be >= 64 KiB");
    }
    if (!(cfg.budget_fraction > 0.0 && cfg.budget_fraction <= 1.0)) {
        fail(Errc::kInvalidArgument, "monitor budget_fraction must be in (0, 1]");
    }
    if (cfg.output_path.empty()) fail(Errc::kOutputUnwritable, "monitor output path is empty");
    if (cfg.drain_interval_ms < 1) fail(Errc::kInvalidArgument, "monitor drain_interval_ms must be >= 1");
}

bool adapt_interval(IntervalState& s, double budget_fraction, double last_collection_ms) {
    const double interval = static_cast<double>(s.current_ms);
    const std::uint32_t cap = s.configured_ms * kIntervalCapFactor;
    if (last_collection_ms > budget_fraction * interval) {
        s.low_streak = 0;
        const std::uint32_t next = std::min(cap, s.current_ms * 2);
        if (next == s.current_ms) return false;
        s.current_ms = next;
        return true;
    }
    if (last_collection_ms < budget_fraction / 4.0 * interval) {
        if (++s.low_streak < kLowCyclesBeforeHalving) return false;
        s.low_streak = 0;
        const std::uint32_t next = std::max(s.configured_ms, s.current_ms / 2);
        if (next == s.current_ms) return false;
        s.current_ms = next;
        return true;
    }
    s.low_streak = 0;
    return false;
}

Monitor::Monitor(MonitorConfig cfg) : cfg_(std::move(cfg)) {}

std::unique_ptr<Monitor> Monitor::start(MonitorConfig cfg) {
    validate(cfg);
    std::unique_ptr<Monitor> m(new Monitor(std::move(cfg)));
    m->open_and_register();
    m->interval_ms_ = m->cfg_.interval_ms;
    m->sampler_ = std::thread([p = m.get()] { p->sample_loop(); });
    m->drainer_ = std::thread([p = m.get()] { p->drain_loop(); });
    if (m->cfg_.flush_on_signal) {
        m->signal_token_ = add_signal_callback([p = m.get()](int) {
            p->stop();
            return false;
        });
    }
    return m;
}

void Monitor::open_and_register() {
    // Probes first: a config with nothing to sample never touches the file.
    std::vector<std::unique_ptr<Probe>> built;
    auto attempt = [&](const std::string& label, auto&& make) {
        try {
            built.push_back(make());
        } catch (const Error& e) {
            unavailable_.push_back(label + ": " + e.what());
        }
    };
    const auto& env = cfg_.env;
    std::vector<int> pids = cfg_.watched_pids;
    if (pids.empty()) pids.push_back(static_cast<int>(::getpid()));
    std::vector<std::string> cgroups = cfg_.watched_cgroups;
    if (cgroups.empty()) cgroups.emplace_back();
    for (ProbeKind k : cfg_.probes) {
        switch (k) {
            case ProbeKind::kSystemCpu: attempt("system_cpu", [&] { return make_system_cpu_probe(env); }); break;
            case ProbeKind::kSystemMem: attempt("system_mem", [&] { return make_system_mem_probe(env); }); break;
            case ProbeKind::kSystemIo: attempt("system_io", [&] { return make_system_io_probe(env); }); break;
            case ProbeKind::kProcessCpuMem:
                for (int pid : pids) {
                    attempt("process_cpu_mem:" + std::to_string(pid), [&] { return make_process_cpu_mem_probe(env, pid); });
                }
                break;
            case ProbeKind::kProcessIo:
                for (int pid : pids) {
                    attempt("process_io:" + std::to_string(pid), [&] { return make_process_io_probe(env, pid); });
                }
                break;
            case ProbeKind::kCgroup:
                for (const auto& cg : cgroups) {
                    attempt("cgroup:" + (cg.empty() ? std::string("self") : cg), [&] { return make_cgroup_probe(env, cg); });
                }
                break;
            case ProbeKind::kAccelerator:
                if (cfg_.accelerator) {
                    // Shared with the caller; wrap without taking ownership.
                    struct Borrowed final : Probe {
                        std::shared_ptr<AcceleratorProbe> p;
                        ProbeKind kind() const override { return p->kind(); }
                        const std::vector<std::string>& metric_names() const override { return p->metric_names(); }
                        ProbeValues collect(std::int64_t now) override { return p->collect(now); }
                        void reset_baseline() override { p->reset_baseline(); }
                    };
                    auto b = std::make_unique<Borrowed>();
                    b->p = cfg_.accelerator;
                    built.push_back(std::move(b));
                } else {
                    unavailable_.push_back("accelerator: no accelerator probe configured");
                }
                break;
        }
    }
    if (built.empty()) {
        std::string why = "no probe is available";
        for (const auto& u : unavailable_) why += "; " + u;
        fail(Errc::kAllProbesUnavailable, why);
    }

    // Name table.
    std::uint16_t next_id = 0;
    std::set<std::string> seen;
    auto add_metric = [&](const std::string& name) -> std::uint16_t {
        if (!seen.insert(name).second) fail(Errc::kInvalidArgument, "duplicate monitor metric " + name);
        if (next_id == kFooterAliasId) ++next_id;
        if (next_id >= kServingIdBase) fail(Errc::kInvalidArgument, "too many monitor metrics");
        const std::uint16_t id = next_id++;
        header_.metrics.push_back({id, name});
        ring_ids_.push_back(id);
        return id;
    };
    for (auto& p : built) {
        ProbeSlot slot;
        for (const auto& n : p->metric_names()) slot.ids.push_back(add_metric(n));
        slot.probe = std::move(p);
        probes_.push_back(std::move(slot));
    }
    interval_id_ = add_metric(kIntervalMetric);
    error_id_ = add_metric(kProbeErrorMetric);
    for (const auto& n : cfg_.external_metrics) add_metric(n);
    if (cfg_.serving_metrics) {
        for (std::size_t i = 0; i < std::size(kServingMetricNames); ++i) {
            const auto id = static_cast<std::uint16_t>(kServingIdBase + i);
            header_.metrics.push_back({id, kServingMetricNames[i]});
            ring_ids_.push_back(id);
        }
    }
    if (!cfg_.run_id.empty()) header_.metrics.push_back({kRunIdId, "run:" + cfg_.run_id});
    if (!cfg_.config_digest.empty()) header_.metrics.push_back({kConfigDigestId, "config:" + cfg_.config_digest});
    header_.epoch_ns = static_cast<std::uint64_t>(wall_epoch_ns());

    for (std::size_t i = 0; i < ring_ids_.size(); ++i) rings_.push_back(std::make_unique<RecordRing>(cfg_.per_metric_buffer_bytes));
    written_.assign(ring_ids_.size(), 0);

    const std::string key = path_key(cfg_.output_path);
    {
        std::scoped_lock lk(g_paths_mu);
        if (active_paths().count(key)) {
            fail(Errc::kSecondStartRejected, "a monitor is already writing " + cfg_.output_path);
        }
        out_.open(cfg_.output_path, std::ios::binary | std::ios::trunc);
        if (!out_) fail(Errc::kOutputUnwritable, "cannot open trace output " + cfg_.output_path);
        active_paths().insert(key);
        registered_path_ = key;
    }
    const auto hdr = encode_header(header_);
    out_.write(reinterpret_cast<const char*>(hdr.data()), static_cast<std::streamsize>(hdr.size()));
    out_.flush();
    if (!out_) {
        std::scoped_lock lk(g_paths_mu);
        active_paths().erase(registered_path_);
        fail(Errc::kOutputUnwritable, "cannot write trace header to " + cfg_.output_path);
    }
    trace_bytes_ = hdr.size();
}

Monitor::~Monitor() { stop(); }

RecordRing* Monitor::ring_for(std::uint16_t id) {
    if (id < kServingIdBase) {
        // Dense ids with the footer alias skipped.
        const std::size_t idx = id < kFooterAliasId ? id : static_cast<std::size_t>(id) - 1;
        if (idx < rings_.size() && ring_ids_[idx] == id) return rings_[idx].get();
        return nullptr;
    }
    for (std::size_t i = 0; i < ring_ids_.size(); ++i) {
        if (ring_ids_[i] == id) return rings_[i].get();
    }
    return nullptr;
}

std::optional<std::uint16_t> Monitor::metric_id(const std::string& name) const {
    for (const auto& m : header_.metrics) {
        if (m.name == name && m.id != kRunIdId && m.id != kConfigDigestId) return m.id;
    }
    return std::nullopt;
}

void Monitor::record(std::uint16_t id, double value) { record_at(id, monotonic_ns(), value); }

void Monitor::record_at(std::uint16_t id, std::int64_t timestamp_ns, double value) {
    RecordRing* ring = ring_for(id);
    if (ring == nullptr) fail(Errc::kInvalidArgument, "unregistered monitor metric id " + std::to_string(id));
    ring->push({id, static_cast<std::uint64_t>(timestamp_ns), value});
}

void Monitor::sample_loop() {
    lower_priority(cfg_.nice_increment);
    IntervalState st{cfg_.interval_ms, cfg_.interval_ms, 0};
    auto next = Clock::now();
    std::unique_lock lk(stop_mu_);
    while (!stopping_) {
        lk.unlock();
        const std::int64_t t0 = monotonic_ns();
        for (auto& slot : probes_) {
            try {
                const auto values = slot.probe->collect(t0);
                for (std::size_t i = 0; i < values.size() && i < slot.ids.size(); ++i) {
                    if (values[i]) ring_for(slot.ids[i])->push({slot.ids[i], static_cast<std::uint64_t>(t0), *values[i]});
                }
            } catch (const Error&) {
                const auto n = ++probe_errors_;
                ring_for(error_id_)->push({error_id_, static_cast<std::uint64_t>(t0), static_cast<double>(n)});
            }
        }
        const std::int64_t t1 = monotonic_ns();
        ++cycles_;
        if (cfg_.adaptive && adapt_interval(st, cfg_.budget_fraction, static_cast<double>(t1 - t0) / 1e6)) {
            interval_ms_ = st.current_ms;
            ring_for(interval_id_)->push({interval_id_, static_cast<std::uint64_t>(t1), static_cast<double>(st.current_ms)});
        }
        const auto period = std::chrono::milliseconds(st.current_ms);
        next += period;
        const auto now = Clock::now();
        if (next + period < now) next = now + period;  // fell far behind: resynchronize
        lk.lock();
        stop_cv_.wait_until(lk, next, [&] { return stopping_; });
    }
}

void Monitor::drain_once() {
    std::scoped_lock lk(file_mu_);
    std::vector<std::uint8_t> buf;
    for (std::size_t i = 0; i < rings_.size(); ++i) {
        const std::size_t before = buf.size();
        const std::size_t n = rings_[i]->drain(buf);
        if (n == 0) continue;
        if (!write_failed_) {
            out_.write(reinterpret_cast<const char*>(buf.data() + before), static_cast<std::streamsize>(buf.size() - before));
            if (out_) {
                written_[i] += n;
                trace_bytes_ += buf.size() - before;
            } else {
                write_failed_ = true;
            }
        }
    }
    if (!write_failed_) {
        out_.flush();
        if (!out_) write_failed_ = true;
    }
}

void Monitor::drain_loop() {
    lower_priority(cfg_.nice_increment);
    std::unique_lock lk(stop_mu_);
    while (!stopping_) {
        stop_cv_.wait_for(lk, std::chrono::milliseconds(cfg_.drain_interval_ms), [&] { return stopping_; });
        if (stopping_) break;
        lk.unlock();
        drain_once();
        lk.lock();
    }
}

FlushReport Monitor::stop() {
    // Unregister before taking the report lock: removal waits for a running
    // signal callback, which itself calls stop().
    if (const int token = signal_token_.exchange(0); token != 0) remove_signal_callback(token);
    std::scoped_lock rl(report_mu_);
    if (report_) return *report_;
    {
        std::scoped_lock lk(stop_mu_);
        stopping_ = true;
    }
    stop_cv_.notify_all();
    if (sampler_.joinable()) sampler_.join();
    if (drainer_.joinable()) drainer_.join();
    drain_once();

    FlushReport rep;
    {
        std::scoped_lock lk(file_mu_);
        for (std::size_t i = 0; i < rings_.size(); ++i) {
            MetricCounts c;
            c.id = ring_ids_[i];
            for (const auto& m : header_.metrics) {
                if (m.id == c.id) c.name = m.name;
            }
            c.emitted = rings_[i]->pushed();
            c.dropped = rings_[i]->dropped();
            c.written = written_[i];
            rep.samples_written += c.written;
            rep.samples_dropped += c.dropped;
            rep.per_metric.push_back(std::move(c));
        }
        if (!write_failed_) {
            const auto footer = encode_footer({rep.samples_written, rep.samples_dropped});
            out_.write(reinterpret_cast<const char*>(footer.data()), static_cast<std::streamsize>(footer.size()));
            out_.flush();
            if (out_) {
                trace_bytes_ += footer.size();
            } else {
                write_failed_ = true;
            }
        }
        out_.close();
        rep.trace_bytes = trace_bytes_;
        if (write_failed_) {
            rep.partial = true;
            rep.error = "trace write failed; report counts what reached the file";
        }
    }
    {
        std::scoped_lock lk(g_paths_mu);
        active_paths().erase(registered_path_);
    }
    report_ = rep;
    return rep;
}

std::size_t Monitor::buffer_bytes_allocated() const {
    std::size_t n = 0;
    for (const auto& r : rings_) n += r->allocated_bytes();
    return n;
}

std::size_t Monitor::buffer_bytes_configured() const { return rings_.size() * cfg_.per_metric_buffer_bytes; }

}  // namespace ragbench::monitor
