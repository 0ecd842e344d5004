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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metrics/quality.hpp"
#include "metrics/stats.hpp"
#include "monitor/trace_format.hpp"
#include "pipeline/request_log.hpp"

namespace ragbench::metrics {

inline constexpr int kReportVersion = 1;

struct LoadedLog {
    pipeline::LogHeader header;
    std::vector<pipeline::RequestRecord> records;  // ordered by sequence_no
    std::optional<pipeline::LogFooter> footer;
};

// Throws CorruptLog (with the byte offset of the bad line) and
// SchemaVersionMismatch.
LoadedLog load_request_log(const std::string& path);
LoadedLog parse_request_log(const std::string& content);

// Evaluation input for one answered query.
struct QualityRecord {
    std::uint64_t sequence_no = 0;
    std::vector<ChunkId> retrieved_ids;
    std::vector<ChunkId> reranked_ids;
    std::string answer_text;
    workload::QAEntry qa;
    std::set<ChunkId> relevant_ids;
    std::vector<std::string> context_texts;  // texts of reranked_ids, in order
};

nlohmann::ordered_json to_json(const QualityRecord& q);
QualityRecord quality_from_json(const nlohmann::json& j);
void write_quality_records(const std::string& path, const pipeline::LogHeader& header,
                           const std::vector<QualityRecord>& records);
struct LoadedQuality {
    pipeline::LogHeader header;
    std::vector<QualityRecord> records;
};
LoadedQuality load_quality_records(const std::string& path);

struct QualityScores {
    double context_recall = 0.0;
    double query_accuracy = 0.0;
    std::optional<double> factual_consistency;  // nullopt: sentinel answer, excluded
};

QualityScores score_query(const QualityRecord& q, Judge& judge, RecallMode mode);

struct QualityAggregate {
    RecallMode mode = RecallMode::kRecall;
    std::string judge;
    std::uint64_t evaluated = 0;
    std::uint64_t excluded_sentinels = 0;
    std::optional<double> context_recall;
    std::optional<double> query_accuracy;
    std::optional<double> factual_consistency;
    // Questions produced by updates (version > 0), where the relevant chunk
    // is the freshly written version.
    std::uint64_t update_questions = 0;
    std::uint64_t update_questions_hit = 0;
    std::optional<double> update_question_recall;
};

QualityAggregate evaluate_quality(const std::vector<QualityRecord>& records, Judge& judge,
                                  RecallMode mode = RecallMode::kRecall);

struct ResourceSummary {
    std::string metric;
    std::uint64_t count = 0;
    double mean = 0.0;
    double max = 0.0;
};

std::vector<ResourceSummary> summarize_trace(const monitor::TraceFile& trace);

// Latency summaries keyed "<kind>.<stage>" plus "<kind>.e2e", and
// "query.ttft" / "query.tpot" when the generator reports them.
std::vector<LatencySummary> latency_summaries(const std::vector<pipeline::RequestRecord>& records);

struct ReportInputs {
    LoadedLog log;
    std::optional<monitor::TraceFile> trace;
    bool trace_expected = false;
    std::optional<QualityAggregate> quality;
    std::optional<nlohmann::json> index_stats;
};

// Checks that every artifact carries the log's config digest and run id.
// Throws DigestMismatch.
void check_digests(const ReportInputs& in, const std::optional<LoadedQuality>& quality_file);

nlohmann::ordered_json build_report(const ReportInputs& in);

// Rounds to 6 significant digits; the report prints the shortest text that
// reads back to the rounded value.
double round_sig6(double v);
// Applies round_sig6 to every floating-point number in the document.
void round_floats(nlohmann::ordered_json& j);
std::string render_json(const nlohmann::ordered_json& report);
// One row per stage summary.
std::string render_csv(const nlohmann::ordered_json& report);
// Stage-breakdown bar chart and query latency over time.
std::string render_svg(const nlohmann::ordered_json& report, const std::vector<pipeline::RequestRecord>& records);

// Drops clock-derived fields so two reports of the same content compare equal.
nlohmann::ordered_json strip_timing(nlohmann::ordered_json report);

}  // namespace ragbench::metrics
