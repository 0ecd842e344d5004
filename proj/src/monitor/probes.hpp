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

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ragbench::monitor {

enum class ProbeKind { kSystemCpu, kSystemMem, kSystemIo, kProcessCpuMem, kProcessIo, kCgroup, kAccelerator };

std::string_view probe_kind_name(ProbeKind k);
std::optional<ProbeKind> parse_probe_kind(std::string_view s);
std::set<ProbeKind> default_probe_kinds();

// Aggregate "cpu" line of /proc/stat, in jiffies.
struct CpuTimes {
    std::uint64_t user = 0, nice = 0, system = 0, idle = 0, iowait = 0, irq = 0, softirq = 0, steal = 0;

    std::uint64_t idle_all() const { return idle + iowait; }
    std::uint64_t total() const { return user + nice + system + idle + iowait + irq + softirq + steal; }
    std::uint64_t busy() const { return total() - idle_all(); }
};

CpuTimes parse_proc_stat(std::string_view text);
// Busy share of the jiffy delta, in percent. nullopt when no time elapsed.
std::optional<double> cpu_utilization_pct(const CpuTimes& prev, const CpuTimes& cur);

// Counter delta per second. nullopt when dt is not positive or the counter
// went backwards.
std::optional<double> counter_rate(double prev, double cur, std::int64_t dt_ns);

// Values in kB keyed by field name.
std::map<std::string, std::uint64_t> parse_meminfo(std::string_view text);

struct DiskCounters {
    std::uint64_t read_bytes = 0;
    std::uint64_t write_bytes = 0;
};
// Per device; sector counts converted at 512 bytes.
std::map<std::string, DiskCounters> parse_diskstats(std::string_view text);

struct ProcStat {
    std::uint64_t utime = 0;
    std::uint64_t stime = 0;
};
ProcStat parse_pid_stat(std::string_view text);
// "key: value" lines (/proc/<pid>/io, cgroup cpu.stat uses "key value").
std::map<std::string, std::uint64_t> parse_key_values(std::string_view text);
// Sums rbytes/wbytes over all devices of a cgroup io.stat.
DiskCounters parse_cgroup_io_stat(std::string_view text);

// One reading of a probe: value per declared metric, nullopt when the metric
// has no value this cycle (counter rates on the first cycle).
using ProbeValues = std::vector<std::optional<double>>;

class Probe {
 public:
    virtual ~Probe() = default;
    virtual ProbeKind kind() const = 0;
    virtual const std::vector<std::string>& metric_names() const = 0;
    // Throws ProbeReadError.
    virtual ProbeValues collect(std::int64_t now_ns) = 0;
    // Forgets the counter baseline so the next cycle emits gauges only.
    virtual void reset_baseline() {}
};

// Pluggable accelerator statistics; none ship with the harness.
class AcceleratorProbe : public Probe {
 public:
    ProbeKind kind() const override { return ProbeKind::kAccelerator; }
};

struct ProbeEnvironment {
    std::string proc_root = "/proc";
    std::string sys_block_root = "/sys/block";
    std::string cgroup_root = "/sys/fs/cgroup";
};

// Builds a probe after checking its sources with one discarded reading;
// throws ProbeReadError when they are unreadable. `pid` applies to the process probes.
std::unique_ptr<Probe> make_system_cpu_probe(const ProbeEnvironment& env);
std::unique_ptr<Probe> make_system_mem_probe(const ProbeEnvironment& env);
std::unique_ptr<Probe> make_system_io_probe(const ProbeEnvironment& env);
std::unique_ptr<Probe> make_process_cpu_mem_probe(const ProbeEnvironment& env, int pid);
std::unique_ptr<Probe> make_process_io_probe(const ProbeEnvironment& env, int pid);
// `path` is a cgroup v2 directory; empty means the caller's own cgroup.
std::unique_ptr<Probe> make_cgroup_probe(const ProbeEnvironment& env, const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace ragbench::monitor
