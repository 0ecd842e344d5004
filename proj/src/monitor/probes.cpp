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

#include "monitor/probes.hpp"

#include <unistd.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "common/error.hpp"

namespace ragbench::monitor {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename F>
void for_each_line(std::string_view text, F&& f) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        f(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
}

std::uint64_t to_u64(std::string_view s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail(Errc::kProbeReadError, "not a number: " + std::string(s));
    return v;
}

double ticks_per_second() {
    static const double hz = [] {
        const long v = sysconf(_SC_CLK_TCK);
        return v > 0 ? static_cast<double>(v) : 100.0;
    }();
    return hz;
}

double page_size() {
    static const double ps = [] {
        const long v = sysconf(_SC_PAGESIZE);
        return v > 0 ? static_cast<double>(v) : 4096.0;
    }();
    return ps;
}

// Shared bookkeeping: names plus the previous counter snapshot.
class ProbeBase : public Probe {
 public:
    ProbeBase(ProbeKind kind, std::vector<std::string> names) : kind_(kind), names_(std::move(names)) {}
    ProbeKind kind() const override { return kind_; }
    const std::vector<std::string>& metric_names() const override { return names_; }

 protected:
    ProbeKind kind_;
    std::vector<std::string> names_;
    std::optional<std::int64_t> prev_ns_;
};

class SystemCpuProbe final : public ProbeBase {
 public:
    explicit SystemCpuProbe(std::string path) : ProbeBase(ProbeKind::kSystemCpu, {"sys.cpu.util_pct", "sys.cpu.iowait_pct"}), path_(std::move(path)) {}

    ProbeValues collect(std::int64_t) override {
        const auto cur = parse_proc_stat(read_text_file(path_));
        ProbeValues v(2);
        if (prev_) {
            v[0] = cpu_utilization_pct(*prev_, cur);
            const auto dt = cur.total() - prev_->total();
            if (dt > 0 && cur.iowait >= prev_->iowait) {
                v[1] = 100.0 * static_cast<double>(cur.iowait - prev_->iowait) / static_cast<double>(dt);
            }
        }
        prev_ = cur;
        return v;
    }

    void reset_baseline() override { prev_.reset(); }

 private:
    std::string path_;
    std::optional<CpuTimes> prev_;
};

class SystemMemProbe final : public ProbeBase {
 public:
    explicit SystemMemProbe(std::string path)
        : ProbeBase(ProbeKind::kSystemMem, {"sys.mem.used_bytes", "sys.mem.available_bytes", "sys.mem.used_pct"}),
          path_(std::move(path)) {}

    ProbeValues collect(std::int64_t) override {
        const auto m = parse_meminfo(read_text_file(path_));
        auto total = m.find("MemTotal");
        auto avail = m.find("MemAvailable");
        if (total == m.end() || avail == m.end() || total->second == 0) {
            fail(Errc::kProbeReadError, "meminfo lacks MemTotal/MemAvailable");
        }
        const double t = static_cast<double>(total->second) * 1024.0;
        const double a = static_cast<double>(avail->second) * 1024.0;
        return {t - a, a, 100.0 * (t - a) / t};
    }

 private:
    std::string path_;
};

// Reads a vector of raw values per cycle. Gauges pass through; counters
// become per-second rates (times `scale`) against the previous reading.
class SnapshotProbe final : public ProbeBase {
 public:
    struct Field {
        std::string name;
        bool counter = false;
        double scale = 1.0;
    };
    using Reader = std::function<std::vector<double>()>;

    SnapshotProbe(ProbeKind kind, std::vector<Field> fields, Reader reader)
        : ProbeBase(kind, names_of(fields)), fields_(std::move(fields)), reader_(std::move(reader)) {}

    ProbeValues collect(std::int64_t now_ns) override {
        auto cur = reader_();
        if (cur.size() != fields_.size()) fail(Errc::kProbeReadError, "probe reader returned wrong field count");
        ProbeValues v(cur.size());
        for (std::size_t i = 0; i < cur.size(); ++i) {
            if (!fields_[i].counter) {
                v[i] = cur[i];
            } else if (prev_ns_ && !prev_.empty()) {
                auto r = counter_rate(prev_[i], cur[i], now_ns - *prev_ns_);
                if (r) v[i] = *r * fields_[i].scale;
            }
        }
        prev_ = std::move(cur);
        prev_ns_ = now_ns;
        return v;
    }

    void reset_baseline() override {
        prev_.clear();
        prev_ns_.reset();
    }

 private:
    static std::vector<std::string> names_of(const std::vector<Field>& fields) {
        std::vector<std::string> out;
        for (const auto& f : fields) out.push_back(f.name);
        return out;
    }

    std::vector<Field> fields_;
    Reader reader_;
    std::vector<double> prev_;
};

using Field = SnapshotProbe::Field;

std::string own_cgroup_path(const ProbeEnvironment& env) {
    const auto text = read_text_file(env.proc_root + "/self/cgroup");
    std::string rel;
    for_each_line(text, [&](std::string_view line) {
        if (line.rfind("0::", 0) == 0) rel = std::string(line.substr(3));
    });
    if (rel.empty()) fail(Errc::kProbeReadError, "no cgroup v2 entry in /proc/self/cgroup");
    return env.cgroup_root + (rel == "/" ? "" : rel);
}

}  // namespace

std::string_view probe_kind_name(ProbeKind k) {
    switch (k) {
        case ProbeKind::kSystemCpu: return "system_cpu";
        case ProbeKind::kSystemMem: return "system_mem";
        case ProbeKind::kSystemIo: return "system_io";
        case ProbeKind::kProcessCpuMem: return "process_cpu_mem";
        case ProbeKind::kProcessIo: return "process_io";
        case ProbeKind::kCgroup: return "cgroup";
        case ProbeKind::kAccelerator: return "accelerator";
    }
    return "unknown";
}

std::optional<ProbeKind> parse_probe_kind(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(ProbeKind::kAccelerator); ++i) {
        if (probe_kind_name(static_cast<ProbeKind>(i)) == s) return static_cast<ProbeKind>(i);
    }
    return std::nullopt;
}

std::set<ProbeKind> default_probe_kinds() {
    return {ProbeKind::kSystemCpu,   ProbeKind::kSystemMem, ProbeKind::kSystemIo,   ProbeKind::kProcessCpuMem,
            ProbeKind::kProcessIo, ProbeKind::kCgroup,    ProbeKind::kAccelerator};
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::kProbeReadError, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) fail(Errc::kProbeReadError, "read error on " + path);
    return ss.str();
}

CpuTimes parse_proc_stat(std::string_view text) {
    std::optional<CpuTimes> out;
    for_each_line(text, [&](std::string_view line) {
        if (out) return;
        const auto f = split_ws(line);
        if (f.empty() || f[0] != "cpu") return;
        if (f.size() < 5) fail(Errc::kProbeReadError, "short cpu line in /proc/stat");
        CpuTimes t;
        std::uint64_t* fields[] = {&t.user, &t.nice, &t.system, &t.idle, &t.iowait, &t.irq, &t.softirq, &t.steal};
        for (std::size_t i = 0; i < 8 && i + 1 < f.size(); ++i) *fields[i] = to_u64(f[i + 1]);
        out = t;
    });
    if (!out) fail(Errc::kProbeReadError, "no aggregate cpu line in /proc/stat");
    return *out;
}

std::optional<double> cpu_utilization_pct(const CpuTimes& prev, const CpuTimes& cur) {
    if (cur.total() <= prev.total() || cur.busy() < prev.busy()) return std::nullopt;
    return 100.0 * static_cast<double>(cur.busy() - prev.busy()) / static_cast<double>(cur.total() - prev.total());
}

std::optional<double> counter_rate(double prev, double cur, std::int64_t dt_ns) {
    if (dt_ns <= 0 || cur < prev) return std::nullopt;
    return (cur - prev) / (static_cast<double>(dt_ns) * 1e-9);
}

std::map<std::string, std::uint64_t> parse_meminfo(std::string_view text) {
    std::map<std::string, std::uint64_t> out;
    for_each_line(text, [&](std::string_view line) {
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) return;
        const auto f = split_ws(line.substr(colon + 1));
        if (f.empty()) return;
        out[std::string(line.substr(0, colon))] = to_u64(f[0]);
    });
    return out;
}

std::map<std::string, DiskCounters> parse_diskstats(std::string_view text) {
    std::map<std::string, DiskCounters> out;
    for_each_line(text, [&](std::string_view line) {
        const auto f = split_ws(line);
        if (f.size() < 10) return;
        DiskCounters d;
        d.read_bytes = to_u64(f[5]) * 512;
        d.write_bytes = to_u64(f[9]) * 512;
        out[std::string(f[2])] = d;
    });
    return out;
}

ProcStat parse_pid_stat(std::string_view text) {
    // The command name may contain spaces; fields resume after the last ')'.
    const auto close = text.rfind(')');
    if (close == std::string_view::npos) fail(Errc::kProbeReadError, "malformed pid stat");
    const auto f = split_ws(text.substr(close + 1));
    // f[0] is field 3 (state); utime and stime are fields 14 and 15.
    if (f.size() < 13) fail(Errc::kProbeReadError, "short pid stat");
    return {to_u64(f[11]), to_u64(f[12])};
}

std::map<std::string, std::uint64_t> parse_key_values(std::string_view text) {
    std::map<std::string, std::uint64_t> out;
    for_each_line(text, [&](std::string_view line) {
        auto f = split_ws(line);
        if (f.size() < 2) return;
        std::string key(f[0]);
        if (!key.empty() && key.back() == ':') key.pop_back();
        out[key] = to_u64(f[1]);
    });
    return out;
}

DiskCounters parse_cgroup_io_stat(std::string_view text) {
    DiskCounters d;
    for_each_line(text, [&](std::string_view line) {
        for (auto field : split_ws(line)) {
            if (field.rfind("rbytes=", 0) == 0) d.read_bytes += to_u64(field.substr(7));
            if (field.rfind("wbytes=", 0) == 0) d.write_bytes += to_u64(field.substr(7));
        }
    });
    return d;
}

std::unique_ptr<Probe> make_system_cpu_probe(const ProbeEnvironment& env) {
    auto p = std::make_unique<SystemCpuProbe>(env.proc_root + "/stat");
    p->collect(0);
    p->reset_baseline();
    return p;
}

std::unique_ptr<Probe> make_system_mem_probe(const ProbeEnvironment& env) {
    auto p = std::make_unique<SystemMemProbe>(env.proc_root + "/meminfo");
    p->collect(0);
    p->reset_baseline();
    return p;
}

std::unique_ptr<Probe> make_system_io_probe(const ProbeEnvironment& env) {
    const std::string path = env.proc_root + "/diskstats";
    const std::string sys_block = env.sys_block_root;
    auto reader = [path, sys_block] {
        DiskCounters total;
        for (const auto& [name, d] : parse_diskstats(read_text_file(path))) {
            if (name.rfind("loop", 0) == 0 || name.rfind("ram", 0) == 0) continue;
            // Whole devices only; partitions would double count.
            std::error_code ec;
            if (!std::filesystem::exists(sys_block + "/" + name, ec)) continue;
            total.read_bytes += d.read_bytes;
            total.write_bytes += d.write_bytes;
        }
        return std::vector<double>{static_cast<double>(total.read_bytes), static_cast<double>(total.write_bytes)};
    };
    auto p = std::make_unique<SnapshotProbe>(
        ProbeKind::kSystemIo, std::vector<Field>{{"sys.io.read_Bps", true, 1.0}, {"sys.io.write_Bps", true, 1.0}}, reader);
    p->collect(0);
    p->reset_baseline();
    return p;
}

std::unique_ptr<Probe> make_process_cpu_mem_probe(const ProbeEnvironment& env, int pid) {
    const std::string base = env.proc_root + "/" + std::to_string(pid);
    const std::string prefix = "proc." + std::to_string(pid);
    auto reader = [base] {
        const auto st = parse_pid_stat(read_text_file(base + "/stat"));
        const auto text = read_text_file(base + "/statm");
        std::istringstream in(text);
        std::uint64_t size = 0, resident = 0;
        if (!(in >> size >> resident)) fail(Errc::kProbeReadError, "malformed statm");
        return std::vector<double>{static_cast<double>(st.utime + st.stime) / ticks_per_second(),
                                   static_cast<double>(resident) * page_size()};
    };
    auto p = std::make_unique<SnapshotProbe>(
        ProbeKind::kProcessCpuMem,
        std::vector<Field>{{prefix + ".cpu_pct", true, 100.0}, {prefix + ".rss_bytes", false, 1.0}}, reader);
    p->collect(0);
    p->reset_baseline();
    return p;
}

std::unique_ptr<Probe> make_process_io_probe(const ProbeEnvironment& env, int pid) {
    const std::string path = env.proc_root + "/" + std::to_string(pid) + "/io";
    const std::string prefix = "proc." + std::to_string(pid);
    auto reader = [path] {
        const auto kv = parse_key_values(read_text_file(path));
        auto r = kv.find("read_bytes");
        auto w = kv.find("write_bytes");
        if (r == kv.end() || w == kv.end()) fail(Errc::kProbeReadError, "io file lacks read_bytes/write_bytes");
        return std::vector<double>{static_cast<double>(r->second), static_cast<double>(w->second)};
    };
    auto p = std::make_unique<SnapshotProbe>(
        ProbeKind::kProcessIo, std::vector<Field>{{prefix + ".read_Bps", true, 1.0}, {prefix + ".write_Bps", true, 1.0}},
        reader);
    p->collect(0);
    p->reset_baseline();
    return p;
}

std::unique_ptr<Probe> make_cgroup_probe(const ProbeEnvironment& env, const std::string& path) {
    const std::string dir = path.empty() ? own_cgroup_path(env) : path;
    std::string label = path.empty() ? "self" : std::filesystem::path(path).filename().string();
    if (label.empty()) label = "root";
    const std::string prefix = "cgroup." + label;
    auto reader = [dir] {
        const auto kv = parse_key_values(read_text_file(dir + "/cpu.stat"));
        auto it = kv.find("usage_usec");
        if (it == kv.end()) fail(Errc::kProbeReadError, "cpu.stat lacks usage_usec");
        const auto text = read_text_file(dir + "/memory.current");
        std::string_view t(text);
        while (!t.empty() && (t.back() == '\n' || t.back() == ' ')) t.remove_suffix(1);
        DiskCounters io;
        std::error_code ec;
        if (std::filesystem::exists(dir + "/io.stat", ec)) io = parse_cgroup_io_stat(read_text_file(dir + "/io.stat"));
        return std::vector<double>{static_cast<double>(it->second) * 1e-6, static_cast<double>(to_u64(t)),
                                   static_cast<double>(io.read_bytes), static_cast<double>(io.write_bytes)};
    };
    auto p = std::make_unique<SnapshotProbe>(ProbeKind::kCgroup,
                                             std::vector<Field>{{prefix + ".cpu_pct", true, 100.0},
                                                                {prefix + ".mem_bytes", false, 1.0},
                                                                {prefix + ".read_Bps", true, 1.0},
                                                                {prefix + ".write_Bps", true, 1.0}},
                                             reader);
    p->collect(0);
    p->reset_baseline();
    return p;
}

}  // namespace ragbench::monitor
