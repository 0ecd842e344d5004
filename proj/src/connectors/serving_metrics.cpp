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

#include "connectors/serving_metrics.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <string>

#include "common/clock.hpp"
#include "common/error.hpp"
#include "connectors/wire.hpp"

namespace ragbench::connectors {

namespace {

bool name_byte(char c, bool first) {
    const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':';
    return alpha || (!first && c >= '0' && c <= '9');
}

double parse_value(std::string_view v, bool& ok) {
    ok = true;
    if (v == "NaN") return std::nan("");
    if (v == "+Inf" || v == "Inf") return HUGE_VAL;
    if (v == "-Inf") return -HUGE_VAL;
    const std::string s(v);
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    ok = end == s.c_str() + s.size() && !s.empty();
    return d;
}

}  // namespace

ServingMetricsSnapshot parse_exposition(std::string_view text, std::int64_t timestamp_ns,
                                        const ServingMetricNames& names) {
    std::map<std::string, double, std::less<>> totals;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        if (line.empty() || line.front() == '#') continue;

        auto bad = [&](const std::string& why) {
            fail(Errc::kParseError, "metrics exposition line " + std::to_string(line_no) + ": " + why);
        };
        std::size_t i = 0;
        while (i < line.size() && name_byte(line[i], i == 0)) ++i;
        if (i == 0) bad("expected a metric name");
        const std::string_view name = line.substr(0, i);
        if (i < line.size() && line[i] == '{') {
            bool in_quotes = false;
            ++i;
            for (; i < line.size(); ++i) {
                if (in_quotes && line[i] == '\\') {
                    ++i;
                    continue;
                }
                if (line[i] == '"') in_quotes = !in_quotes;
                if (!in_quotes && line[i] == '}') break;
            }
            if (i >= line.size()) bad("unterminated label set");
            ++i;
        }
        if (i >= line.size() || (line[i] != ' ' && line[i] != '\t')) bad("expected whitespace before value");
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        auto vend = line.find_first_of(" \t", i);
        if (vend == std::string_view::npos) vend = line.size();
        bool ok = false;
        const double value = parse_value(line.substr(i, vend - i), ok);
        if (!ok) bad("value is not a number");
        if (vend < line.size()) {
            auto rest = line.substr(vend);
            while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);
            std::int64_t ts = 0;
            if (!rest.empty()) {
                auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), ts);
                if (ec != std::errc() || p != rest.data() + rest.size()) bad("trailing garbage after value");
            }
        }
        totals[std::string(name)] += value;
    }

    auto get = [&](std::string_view n) -> std::optional<double> {
        auto it = totals.find(n);
        if (it == totals.end()) return std::nullopt;
        return it->second;
    };
    auto hist_mean_ms = [&](std::string_view base) -> std::optional<double> {
        auto sum = get(std::string(base) + "_sum");
        auto count = get(std::string(base) + "_count");
        if (!sum || !count || *count <= 0.0) return std::nullopt;
        return *sum / *count * 1000.0;
    };

    ServingMetricsSnapshot snap;
    snap.timestamp_ns = timestamp_ns;
    snap.ttft_ms = hist_mean_ms(names.ttft_seconds);
    snap.tpot_ms = hist_mean_ms(names.tpot_seconds);
    auto kv = get(names.kv_usage);
    if (!kv) kv = get(names.kv_usage_alt);
    if (kv) {
        if (!(*kv >= 0.0 && *kv <= 1.0)) {
            fail(Errc::kParseError, "kv cache utilization " + std::to_string(*kv) + " outside [0, 1]");
        }
        snap.kv_cache_utilization = kv;
    }
    return snap;
}

ServingMetricsSnapshot scrape_metrics(HttpEndpoint& endpoint, const ServingMetricNames& names) {
    const auto resp = endpoint.get(std::string(wire::kMetricsPath), true);
    if (resp.status < 200 || resp.status >= 300) throw_remote(resp, "metrics scrape");
    return parse_exposition(resp.body, monotonic_ns(), names);
}

}  // namespace ragbench::connectors
