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

#include "pipeline/request_log.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/hash.hpp"

namespace ragbench::pipeline {

namespace {

double to_us(std::int64_t ns) { return static_cast<double>(ns) / 1000.0; }
std::int64_t from_us(double us) { return static_cast<std::int64_t>(std::llround(us * 1000.0)); }

}  // namespace

nlohmann::ordered_json header_json(const LogHeader& h) {
    nlohmann::ordered_json j;
    j["record"] = "header";
    j["log_version"] = h.version;
    j["run_id"] = h.run_id;
    j["config_digest"] = h.config_digest;
    return j;
}

nlohmann::ordered_json footer_json(const LogFooter& f) {
    nlohmann::ordered_json j;
    j["record"] = "footer";
    j["completed"] = f.completed;
    j["interrupted"] = f.interrupted;
    j["timing"] = {{"wall_us", to_us(f.wall_ns)}};
    return j;
}

nlohmann::ordered_json to_json(const RequestRecord& r) {
    nlohmann::ordered_json j;
    j["record"] = "request";
    j["sequence_no"] = r.sequence_no;
    j["kind"] = workload::operation_name(r.kind);
    j["target"] = r.target;
    j["retrieved_ids"] = r.retrieved_ids;
    j["reranked_ids"] = r.reranked_ids;
    j["answer_hash"] = r.kind == workload::OperationKind::kQuery ? hex64(fnv1a64(r.answer_text)) : std::string();
    if (r.qa) {
        j["qa"] = {{"question", r.qa->question},
                   {"expected_answer", r.qa->expected_answer},
                   {"target_chunk_id", r.qa->target_chunk_id},
                   {"target_file_id", r.qa->target_file_id},
                   {"version", r.qa->version}};
    }
    j["scanned_vectors"] = r.scanned_vectors;
    j["rebuilds"] = r.rebuilds;
    if (!r.error.empty()) j["error"] = r.error;

    nlohmann::ordered_json t;
    t["start_us"] = to_us(r.start_ns);
    t["e2e_us"] = to_us(r.e2e_ns());
    if (r.scheduled_ns) t["scheduled_us"] = to_us(*r.scheduled_ns);
    auto stages = nlohmann::ordered_json::array();
    for (const auto& s : r.stages) {
        stages.push_back({{"stage", stage_name(s.stage)},
                          {"start_us", to_us(s.start_ns)},
                          {"end_us", to_us(s.end_ns)},
                          {"batch_size", s.batch_size}});
    }
    t["stages"] = std::move(stages);
    if (r.rebuilds > 0) t["rebuild_us"] = to_us(r.rebuild_ns);
    if (r.ttft_ms) t["ttft_ms"] = *r.ttft_ms;
    if (r.tpot_ms) t["tpot_ms"] = *r.tpot_ms;
    j["timing"] = std::move(t);
    return j;
}

RequestRecord record_from_json(const nlohmann::json& j) {
    RequestRecord r;
    r.sequence_no = j.at("sequence_no").get<std::uint64_t>();
    auto kind = workload::parse_operation(j.at("kind").get<std::string>());
    if (!kind) fail(Errc::kCorruptLog, "unknown request kind " + j.at("kind").get<std::string>());
    r.kind = *kind;
    r.target = j.value("target", std::string());
    r.retrieved_ids = j.at("retrieved_ids").get<std::vector<ChunkId>>();
    r.reranked_ids = j.at("reranked_ids").get<std::vector<ChunkId>>();
    if (auto it = j.find("qa"); it != j.end()) {
        workload::QAEntry qa;
        qa.question = it->at("question").get<std::string>();
        qa.expected_answer = it->at("expected_answer").get<std::string>();
        qa.target_chunk_id = it->at("target_chunk_id").get<ChunkId>();
        qa.target_file_id = it->at("target_file_id").get<std::string>();
        qa.version = it->at("version").get<std::uint32_t>();
        r.qa = std::move(qa);
    }
    r.scanned_vectors = j.value("scanned_vectors", std::uint64_t{0});
    r.rebuilds = j.value("rebuilds", std::uint32_t{0});
    r.error = j.value("error", std::string());

    const auto& t = j.at("timing");
    r.start_ns = from_us(t.at("start_us").get<double>());
    r.end_ns = r.start_ns + from_us(t.at("e2e_us").get<double>());
    if (auto it = t.find("scheduled_us"); it != t.end()) r.scheduled_ns = from_us(it->get<double>());
    for (const auto& s : t.at("stages")) {
        auto stage = parse_stage(s.at("stage").get<std::string>());
        if (!stage) fail(Errc::kCorruptLog, "unknown stage " + s.at("stage").get<std::string>());
        r.stages.push_back({*stage, from_us(s.at("start_us").get<double>()), from_us(s.at("end_us").get<double>()),
                            s.at("batch_size").get<std::uint32_t>()});
    }
    if (auto it = t.find("rebuild_us"); it != t.end()) r.rebuild_ns = from_us(it->get<double>());
    if (auto it = t.find("ttft_ms"); it != t.end()) r.ttft_ms = it->get<double>();
    if (auto it = t.find("tpot_ms"); it != t.end()) r.tpot_ms = it->get<double>();
    return r;
}

RequestLogWriter::RequestLogWriter(const std::string& path, const LogHeader& header, std::uint64_t first_sequence_no)
    : out_(path, std::ios::binary | std::ios::trunc), next_(first_sequence_no) {
    if (!out_) fail(Errc::kOutputUnwritable, "cannot open request log " + path);
    out_ << header_json(header).dump() << '\n';
    out_.flush();
}

RequestLogWriter::~RequestLogWriter() {
    try {
        close();
    } catch (...) {
    }
}

void RequestLogWriter::submit(RequestRecord record) {
    std::scoped_lock lk(mu_);
    if (closed_) fail(Errc::kInternal, "request log already closed");
    if (record.sequence_no != next_) {
        held_.emplace(record.sequence_no, std::move(record));
        return;
    }
    write_locked(record);
    ++next_;
    for (auto it = held_.begin(); it != held_.end() && it->first == next_; it = held_.erase(it)) {
        write_locked(it->second);
        ++next_;
    }
}

void RequestLogWriter::close(std::optional<LogFooter> footer) {
    std::scoped_lock lk(mu_);
    if (closed_) return;
    for (const auto& [seq, r] : held_) write_locked(r);
    held_.clear();
    if (footer) out_ << footer_json(*footer).dump() << '\n';
    out_.flush();
    out_.close();
    closed_ = true;
}

std::uint64_t RequestLogWriter::written() const {
    std::scoped_lock lk(mu_);
    return written_;
}

void RequestLogWriter::write_locked(const RequestRecord& r) {
    out_ << to_json(r).dump() << '\n';
    ++written_;
}

}  // namespace ragbench::pipeline
