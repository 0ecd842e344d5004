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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ragbench::monitor {

inline constexpr std::array<char, 4> kTraceMagic = {'R', 'G', 'B', 'T'};
inline constexpr std::array<char, 4> kFooterMagic = {'R', 'G', 'B', 'F'};
inline constexpr std::uint16_t kTraceVersion = 1;
inline constexpr std::size_t kRecordBytes = 2 + 8 + 8;
inline constexpr std::size_t kFooterBytes = 4 + 8 + 8;

// Reserved metric ids. Their names carry run metadata rather than samples.
inline constexpr std::uint16_t kConfigDigestId = 0xFFFF;  // "config:<digest>"
inline constexpr std::uint16_t kRunIdId = 0xFFFE;         // "run:<id>"
inline constexpr std::uint16_t kServingIdBase = 0xFF00;   // scraped serving metrics
// The footer magic read as a record id; never assigned to a metric.
inline constexpr std::uint16_t kFooterAliasId = 0x4752;

struct MetricName {
    std::uint16_t id = 0;
    std::string name;
};

struct TraceHeader {
    std::uint16_t version = kTraceVersion;
    std::uint16_t flags = 0;
    std::uint64_t epoch_ns = 0;
    std::vector<MetricName> metrics;
};

struct TraceRecord {
    std::uint16_t metric_id = 0;
    std::uint64_t timestamp_ns = 0;
    double value = 0.0;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct TraceFooter {
    std::uint64_t samples_written = 0;
    std::uint64_t samples_dropped = 0;
};

std::vector<std::uint8_t> encode_header(const TraceHeader& h);
void encode_record(const TraceRecord& r, std::uint8_t* out);  // kRecordBytes
TraceRecord decode_record(const std::uint8_t* in);
std::vector<std::uint8_t> encode_footer(const TraceFooter& f);

struct TraceFile {
    TraceHeader header;
    std::vector<TraceRecord> records;
    std::optional<TraceFooter> footer;
    std::size_t trailing_bytes = 0;  // bytes after the last whole record when the footer is missing

    bool complete() const { return footer.has_value(); }
    std::optional<std::string> name_of(std::uint16_t id) const;
    std::optional<std::uint16_t> id_of(const std::string& name) const;
    std::optional<std::string> config_digest() const;
    std::optional<std::string> run_id() const;
};

// Throws ParseError on a bad header or a record naming an unregistered id.
// A missing footer is not an error.
TraceFile parse_trace(const std::vector<std::uint8_t>& bytes);
TraceFile read_trace(const std::string& path);

}  // namespace ragbench::monitor
