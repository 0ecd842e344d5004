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

#include "monitor/trace_format.hpp"

#include <cstring>
#include <unordered_set>

#include "common/binio.hpp"
#include "common/error.hpp"

namespace ragbench::monitor {

std::vector<std::uint8_t> encode_header(const TraceHeader& h) {
    binio::Writer w;
    w.bytes(std::string_view(kTraceMagic.data(), kTraceMagic.size()));
    w.put<std::uint16_t>(h.version);
    w.put<std::uint16_t>(h.flags);
    w.put<std::uint64_t>(h.epoch_ns);
    if (h.metrics.size() > 0xFFFF) fail(Errc::kInvalidArgument, "too many metrics for the trace name table");
    w.put<std::uint16_t>(static_cast<std::uint16_t>(h.metrics.size()));
    for (const auto& m : h.metrics) {
        if (m.name.size() > 255) fail(Errc::kInvalidArgument, "metric name longer than 255 bytes: " + m.name);
        w.put<std::uint16_t>(m.id);
        w.put<std::uint8_t>(static_cast<std::uint8_t>(m.name.size()));
        w.bytes(std::string_view(m.name));
    }
    return w.buffer();
}

void encode_record(const TraceRecord& r, std::uint8_t* out) {
    binio::store_le<std::uint16_t>(out, r.metric_id);
    binio::store_le<std::uint64_t>(out + 2, r.timestamp_ns);
    binio::store_le<double>(out + 10, r.value);
}

TraceRecord decode_record(const std::uint8_t* in) {
    TraceRecord r;
    r.metric_id = binio::load_le<std::uint16_t>(in);
    r.timestamp_ns = binio::load_le<std::uint64_t>(in + 2);
    r.value = binio::load_le<double>(in + 10);
    return r;
}

std::vector<std::uint8_t> encode_footer(const TraceFooter& f) {
    binio::Writer w;
    w.bytes(std::string_view(kFooterMagic.data(), kFooterMagic.size()));
    w.put<std::uint64_t>(f.samples_written);
    w.put<std::uint64_t>(f.samples_dropped);
    return w.buffer();
}

std::optional<std::string> TraceFile::name_of(std::uint16_t id) const {
    for (const auto& m : header.metrics) {
        if (m.id == id) return m.name;
    }
    return std::nullopt;
}

std::optional<std::uint16_t> TraceFile::id_of(const std::string& name) const {
    for (const auto& m : header.metrics) {
        if (m.name == name) return m.id;
    }
    return std::nullopt;
}

std::optional<std::string> TraceFile::config_digest() const {
    auto n = name_of(kConfigDigestId);
    if (!n || n->rfind("config:", 0) != 0) return std::nullopt;
    return n->substr(7);
}

std::optional<std::string> TraceFile::run_id() const {
    auto n = name_of(kRunIdId);
    if (!n || n->rfind("run:", 0) != 0) return std::nullopt;
    return n->substr(4);
}

TraceFile parse_trace(const std::vector<std::uint8_t>& bytes) {
    TraceFile tf;
    binio::Reader r(bytes);
    auto magic = r.take(4);
    if (std::memcmp(magic.data(), kTraceMagic.data(), 4) != 0) fail(Errc::kParseError, "trace: bad magic");
    tf.header.version = r.get<std::uint16_t>();
    if (tf.header.version != kTraceVersion) {
        fail(Errc::kSchemaVersionMismatch, "trace: unsupported format version " + std::to_string(tf.header.version));
    }
    tf.header.flags = r.get<std::uint16_t>();
    tf.header.epoch_ns = r.get<std::uint64_t>();
    const auto count = r.get<std::uint16_t>();
    std::unordered_set<std::uint16_t> ids;
    for (std::uint16_t i = 0; i < count; ++i) {
        MetricName m;
        m.id = r.get<std::uint16_t>();
        const auto len = r.get<std::uint8_t>();
        m.name = r.str(len);
        if (!ids.insert(m.id).second) fail(Errc::kParseError, "trace: duplicate metric id in name table");
        tf.header.metrics.push_back(std::move(m));
    }

    const std::uint8_t* data = bytes.data();
    std::size_t pos = r.pos();
    const std::size_t n = bytes.size();
    while (pos < n) {
        const std::size_t left = n - pos;
        if (left == kFooterBytes && std::memcmp(data + pos, kFooterMagic.data(), 4) == 0) {
            TraceFooter f;
            f.samples_written = binio::load_le<std::uint64_t>(data + pos + 4);
            f.samples_dropped = binio::load_le<std::uint64_t>(data + pos + 12);
            tf.footer = f;
            pos = n;
            break;
        }
        if (left < kRecordBytes) {
            tf.trailing_bytes = left;
            break;
        }
        auto rec = decode_record(data + pos);
        if (!ids.count(rec.metric_id)) {
            fail(Errc::kParseError, "trace: record at byte " + std::to_string(pos) + " names unregistered metric " +
                                        std::to_string(rec.metric_id));
        }
        tf.records.push_back(rec);
        pos += kRecordBytes;
    }
    return tf;
}

TraceFile read_trace(const std::string& path) { return parse_trace(binio::read_file(path)); }

}  // namespace ragbench::monitor
