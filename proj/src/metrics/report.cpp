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

#include "metrics/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "common/error.hpp"
#include "refbackends/template_generator.hpp"

namespace ragbench::metrics {

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::kIo, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

pipeline::LogHeader parse_header(const nlohmann::json& j, std::size_t offset) {
    if (!j.is_object() || j.value("record", std::string()) != "header") {
        fail(Errc::kCorruptLog, "log does not start with a header record (byte " + std::to_string(offset) + ")");
    }
    pipeline::LogHeader h;
    h.version = j.value("log_version", 0);
    if (h.version != pipeline::kRequestLogVersion) {
        fail(Errc::kSchemaVersionMismatch, "log version " + std::to_string(h.version) + ", expected " +
                                               std::to_string(pipeline::kRequestLogVersion));
    }
    h.run_id = j.value("run_id", std::string());
    h.config_digest = j.value("config_digest", std::string());
    return h;
}

// Calls f(json, byte_offset) for each non-empty line.
template <typename F>
void for_each_json_line(const std::string& content, F&& f) {
    std::size_t pos = 0;
    while (pos < content.size()) {
        auto nl = content.find('\n', pos);
        const bool terminated = nl != std::string::npos;
        if (!terminated) nl = content.size();
        const std::string_view line(content.data() + pos, nl - pos);
        if (!line.empty()) {
            auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !terminated) {
                fail(Errc::kCorruptLog, "unparseable record at byte " + std::to_string(pos));
            }
            try {
                f(j, pos);
            } catch (const nlohmann::json::exception& e) {
                fail(Errc::kCorruptLog, "malformed record at byte " + std::to_string(pos) + ": " + e.what());
            }
        }
        pos = nl + 1;
    }
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Pinned six-significant-digit text form used by the CSV output.
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

LoadedLog parse_request_log(const std::string& content) {
    LoadedLog log;
    bool have_header = false;
    for_each_json_line(content, [&](const nlohmann::json& j, std::size_t offset) {
        if (!have_header) {
            log.header = parse_header(j, offset);
            have_header = true;
            return;
        }
        const auto kind = j.value("record", std::string());
        if (kind == "request") {
            if (log.footer) fail(Errc::kCorruptLog, "record after footer at byte " + std::to_string(offset));
            log.records.push_back(pipeline::record_from_json(j));
        } else if (kind == "footer") {
            pipeline::LogFooter f;
            f.completed = j.at("completed").get<std::uint64_t>();
            f.interrupted = j.at("interrupted").get<bool>();
            f.wall_ns = static_cast<std::int64_t>(std::llround(j.at("timing").at("wall_us").get<double>() * 1000.0));
            log.footer = f;
        } else {
            fail(Errc::kCorruptLog, "unknown record type at byte " + std::to_string(offset));
        }
    });
    if (!have_header) fail(Errc::kCorruptLog, "empty request log (byte 0)");
    std::stable_sort(log.records.begin(), log.records.end(),
                     [](const auto& a, const auto& b) { return a.sequence_no < b.sequence_no; });
    return log;
}

LoadedLog load_request_log(const std::string& path) { return parse_request_log(slurp(path)); }

nlohmann::ordered_json to_json(const QualityRecord& q) {
    nlohmann::ordered_json j;
    j["record"] = "quality";
    j["sequence_no"] = q.sequence_no;
    j["retrieved_ids"] = q.retrieved_ids;
    j["reranked_ids"] = q.reranked_ids;
    j["answer_text"] = q.answer_text;
    j["qa"] = {{"question", q.qa.question},
               {"expected_answer", q.qa.expected_answer},
               {"target_chunk_id", q.qa.target_chunk_id},
               {"target_file_id", q.qa.target_file_id},
               {"version", q.qa.version}};
    j["relevant_ids"] = std::vector<ChunkId>(q.relevant_ids.begin(), q.relevant_ids.end());
    j["context_texts"] = q.context_texts;
    return j;
}

QualityRecord quality_from_json(const nlohmann::json& j) {
    QualityRecord q;
    q.sequence_no = j.at("sequence_no").get<std::uint64_t>();
    q.retrieved_ids = j.at("retrieved_ids").get<std::vector<ChunkId>>();
    q.reranked_ids = j.at("reranked_ids").get<std::vector<ChunkId>>();
    q.answer_text = j.at("answer_text").get<std::string>();
    const auto& qa = j.at("qa");
    q.qa.question = qa.at("question").get<std::string>();
    q.qa.expected_answer = qa.at("expected_answer").get<std::string>();
    q.qa.target_chunk_id = qa.at("target_chunk_id").get<ChunkId>();
    q.qa.target_file_id = qa.at("target_file_id").get<std::string>();
    q.qa.version = qa.at("version").get<std::uint32_t>();
    for (ChunkId id : j.at("relevant_ids").get<std::vector<ChunkId>>()) q.relevant_ids.insert(id);
    q.context_texts = j.at("context_texts").get<std::vector<std::string>>();
    return q;
}

void write_quality_records(const std::string& path, const pipeline::LogHeader& header,
                           const std::vector<QualityRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::kOutputUnwritable, "cannot write " + path);
    out << pipeline::header_json(header).dump() << '\n';
    for (const auto& q : records) out << to_json(q).dump() << '\n';
    out.flush();
    if (!out) fail(Errc::kOutputUnwritable, "write failed for " + path);
}

LoadedQuality load_quality_records(const std::string& path) {
    LoadedQuality lq;
    bool have_header = false;
    for_each_json_line(slurp(path), [&](const nlohmann::json& j, std::size_t offset) {
        if (!have_header) {
            lq.header = parse_header(j, offset);
            have_header = true;
            return;
        }
        if (j.value("record", std::string()) != "quality") {
            fail(Errc::kCorruptLog, "unexpected record in quality file at byte " + std::to_string(offset));
        }
        lq.records.push_back(quality_from_json(j));
    });
    if (!have_header) fail(Errc::kCorruptLog, "empty quality file (byte 0)");
    return lq;
}

QualityScores score_query(const QualityRecord& q, Judge& judge, RecallMode mode) {
    QualityScores s;
    const std::set<ChunkId> retrieved(q.retrieved_ids.begin(), q.retrieved_ids.end());
    if (mode == RecallMode::kPrecision && retrieved.empty()) {
        s.context_recall = 0.0;
    } else {
        s.context_recall = context_recall(retrieved, q.relevant_ids, mode);
    }
    s.query_accuracy = judge.query_accuracy(q.answer_text, q.qa.expected_answer);
    s.factual_consistency = judge.factual_consistency(q.answer_text, q.context_texts);
    return s;
}

QualityAggregate evaluate_quality(const std::vector<QualityRecord>& records, Judge& judge, RecallMode mode) {
    QualityAggregate agg;
    agg.mode = mode;
    agg.judge = judge.name();
    double recall_sum = 0.0, acc_sum = 0.0, fc_sum = 0.0;
    std::uint64_t fc_n = 0;
    for (const auto& q : records) {
        const auto s = score_query(q, judge, mode);
        ++agg.evaluated;
        recall_sum += s.context_recall;
        acc_sum += s.query_accuracy;
        if (s.factual_consistency) {
            fc_sum += *s.factual_consistency;
            ++fc_n;
        } else {
            ++agg.excluded_sentinels;
        }
        if (q.qa.version > 0) {
            ++agg.update_questions;
            for (ChunkId id : q.retrieved_ids) {
                if (q.relevant_ids.count(id)) {
                    ++agg.update_questions_hit;
                    break;
                }
            }
        }
    }
    if (agg.evaluated > 0) {
        agg.context_recall = recall_sum / static_cast<double>(agg.evaluated);
        agg.query_accuracy = acc_sum / static_cast<double>(agg.evaluated);
    }
    if (fc_n > 0) agg.factual_consistency = fc_sum / static_cast<double>(fc_n);
    if (agg.update_questions > 0) {
        agg.update_question_recall =
            static_cast<double>(agg.update_questions_hit) / static_cast<double>(agg.update_questions);
    }
    return agg;
}

std::vector<ResourceSummary> summarize_trace(const monitor::TraceFile& trace) {
    std::map<std::uint16_t, std::vector<double>> by_id;
    for (const auto& r : trace.records) by_id[r.metric_id].push_back(r.value);
    std::vector<ResourceSummary> out;
    for (const auto& m : trace.header.metrics) {
        auto it = by_id.find(m.id);
        if (it == by_id.end()) continue;
        ResourceSummary s;
        s.metric = m.name;
        s.count = it->second.size();
        s.mean = mean_of(it->second);
        s.max = *std::max_element(it->second.begin(), it->second.end());
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<LatencySummary> latency_summaries(const std::vector<pipeline::RequestRecord>& records) {
    std::map<std::string, std::vector<double>> samples;
    std::vector<std::string> order;
    auto add = [&](const std::string& key, double ms) {
        auto [it, inserted] = samples.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(ms);
    };
    // Fixed key order so the report layout does not depend on the stream.
    for (const char* kind : {"query", "insert", "update", "removal"}) {
        for (const char* stage : {"chunk", "embed", "remove", "insert", "retrieve", "rerank", "prompt", "generate", "e2e"}) {
            order.push_back(std::string(kind) + "." + stage);
        }
    }
    order.push_back("query.ttft");
    order.push_back("query.tpot");
    for (const auto& r : records) {
        if (!r.error.empty()) continue;
        const std::string kind(workload::operation_name(r.kind));
        for (const auto& st : r.stages) add(kind + "." + std::string(stage_name(st.stage)), static_cast<double>(st.duration_ns()) / 1e6);
        add(kind + ".e2e", static_cast<double>(r.e2e_ns()) / 1e6);
        if (r.ttft_ms) add("query.ttft", *r.ttft_ms);
        if (r.tpot_ms) add("query.tpot", *r.tpot_ms);
    }
    std::vector<LatencySummary> out;
    std::set<std::string> done;
    for (const auto& key : order) {
        auto it = samples.find(key);
        if (it == samples.end() || !done.insert(key).second) continue;
        out.push_back(summarize(key, it->second));
    }
    return out;
}

void check_digests(const ReportInputs& in, const std::optional<LoadedQuality>& quality_file) {
    const auto& h = in.log.header;
    if (in.trace) {
        const auto d = in.trace->config_digest();
        const auto r = in.trace->run_id();
        if ((d && *d != h.config_digest) || (r && *r != h.run_id)) {
            fail(Errc::kDigestMismatch, "trace belongs to a different run or config (log " + h.run_id + "/" +
                                            h.config_digest + ")");
        }
    }
    if (quality_file) {
        if (quality_file->header.config_digest != h.config_digest || quality_file->header.run_id != h.run_id) {
            fail(Errc::kDigestMismatch, "quality records belong to a different run or config");
        }
    }
}

nlohmann::ordered_json build_report(const ReportInputs& in) {
    const auto& records = in.log.records;
    nlohmann::ordered_json rep;
    rep["report_version"] = kReportVersion;
    rep["run_id"] = in.log.header.run_id;
    rep["config_digest"] = in.log.header.config_digest;
    rep["partial"] = !in.log.footer || in.log.footer->interrupted;
    rep["trace_incomplete"] = in.trace_expected && (!in.trace || !in.trace->complete());

    std::map<std::string, std::uint64_t> counts{{"query", 0}, {"insert", 0}, {"update", 0}, {"removal", 0}};
    std::uint64_t errors = 0;
    std::int64_t last_end = 0;
    std::uint64_t scanned_sum = 0, scanned_max = 0;
    for (const auto& r : records) {
        ++counts[std::string(workload::operation_name(r.kind))];
        if (!r.error.empty()) ++errors;
        last_end = std::max(last_end, r.end_ns);
        if (r.kind == workload::OperationKind::kQuery) {
            scanned_sum += r.scanned_vectors;
            scanned_max = std::max(scanned_max, r.scanned_vectors);
        }
    }
    rep["requests"] = {{"total", records.size()},
                       {"query", counts["query"]},
                       {"insert", counts["insert"]},
                       {"update", counts["update"]},
                       {"removal", counts["removal"]},
                       {"errors", errors}};
    const std::int64_t wall_ns = in.log.footer ? in.log.footer->wall_ns : last_end;
    const double wall_s = static_cast<double>(wall_ns) / 1e9;
    rep["wall_time_s"] = wall_s;
    rep["qps"] = wall_s > 0.0 ? static_cast<double>(counts["query"]) / wall_s : 0.0;

    auto lat = nlohmann::ordered_json::array();
    for (const auto& s : latency_summaries(records)) {
        lat.push_back({{"stage", s.stage},
                       {"count", s.count},
                       {"mean_ms", s.mean_ms},
                       {"p50_ms", s.p50_ms},
                       {"p95_ms", s.p95_ms},
                       {"p99_ms", s.p99_ms},
                       {"max_ms", s.max_ms}});
    }
    rep["latency"] = std::move(lat);

    rep["retrieval"] = {{"scanned_vectors_mean", counts["query"] > 0 ? static_cast<double>(scanned_sum) /
                                                                           static_cast<double>(counts["query"])
                                                                     : 0.0},
                        {"scanned_vectors_max", scanned_max}};

    if (in.quality) {
        const auto& q = *in.quality;
        auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
        rep["quality"] = {{"context_recall_mode", recall_mode_name(q.mode)},
                          {"judge", q.judge},
                          {"evaluated_queries", q.evaluated},
                          {"excluded_sentinels", q.excluded_sentinels},
                          {"context_recall", opt(q.context_recall)},
                          {"query_accuracy", opt(q.query_accuracy)},
                          {"factual_consistency", opt(q.factual_consistency)},
                          {"update_questions", q.update_questions},
                          {"update_question_recall", opt(q.update_question_recall)}};
    } else {
        rep["quality"] = nullptr;
    }

    auto res = nlohmann::ordered_json::array();
    if (in.trace) {
        for (const auto& s : summarize_trace(*in.trace)) {
            res.push_back({{"metric", s.metric}, {"count", s.count}, {"mean", s.mean}, {"max", s.max}});
        }
        rep["trace"] = {{"records", in.trace->records.size()},
                        {"samples_written", in.trace->footer ? nlohmann::ordered_json(in.trace->footer->samples_written)
                                                             : nlohmann::ordered_json(nullptr)},
                        {"samples_dropped", in.trace->footer ? nlohmann::ordered_json(in.trace->footer->samples_dropped)
                                                             : nlohmann::ordered_json(nullptr)}};
    } else {
        rep["trace"] = nullptr;
    }
    rep["resources"] = std::move(res);
    rep["index"] = in.index_stats ? nlohmann::ordered_json(*in.index_stats) : nlohmann::ordered_json(nullptr);

    auto events = nlohmann::ordered_json::array();
    std::uint64_t rebuilds = 0;
    for (const auto& r : records) {
        if (r.rebuilds == 0) continue;
        rebuilds += r.rebuilds;
        events.push_back({{"sequence_no", r.sequence_no},
                          {"rebuilds", r.rebuilds},
                          {"at_s", static_cast<double>(r.start_ns) / 1e9},
                          {"duration_ms", static_cast<double>(r.rebuild_ns) / 1e6}});
    }
    rep["rebuilds"] = {{"count", rebuilds}, {"events", std::move(events)}};
    round_floats(rep);
    return rep;
}

double round_sig6(double v) {
    if (!std::isfinite(v) || v == 0.0) return v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::strtod(buf, nullptr);
}

void round_floats(nlohmann::ordered_json& j) {
    if (j.is_number_float()) {
        j = round_sig6(j.get<double>());
    } else if (j.is_structured()) {
        for (auto& v : j) round_floats(v);
    }
}

std::string render_json(const nlohmann::ordered_json& report) {
    auto copy = report;
    round_floats(copy);
    return copy.dump(2) + "\n";
}

std::string render_csv(const nlohmann::ordered_json& report) {
    std::string out = "stage,count,mean_ms,p50_ms,p95_ms,p99_ms,max_ms\n";
    for (const auto& s : report.at("latency")) {
        out += s.at("stage").get<std::string>();
        out += "," + std::to_string(s.at("count").get<std::uint64_t>());
        for (const char* k : {"mean_ms", "p50_ms", "p95_ms", "p99_ms", "max_ms"}) {
            out += "," + num(s.at(k).get<double>());
        }
        out += "\n";
    }
    return out;
}

std::string render_svg(const nlohmann::ordered_json& report, const std::vector<pipeline::RequestRecord>& records) {
    constexpr int kWidth = 720, kBarTop = 40, kBarHeight = 22, kChartHeight = 220;
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& s : report.at("latency")) {
        const auto stage = s.at("stage").get<std::string>();
        if (stage.rfind("query.", 0) == 0 && stage != "query.e2e" && stage != "query.ttft" && stage != "query.tpot") {
            bars.emplace_back(stage.substr(6), s.at("mean_ms").get<double>());
        }
    }
    double bar_max = 0.0;
    for (const auto& b : bars) bar_max = std::max(bar_max, b.second);
    const int line_top = kBarTop + static_cast<int>(bars.size()) * kBarHeight + 60;
    const int height = line_top + kChartHeight + 50;

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<text x=\"10\" y=\"20\" font-size=\"14\">Mean query latency by stage (ms)</text>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const int y = kBarTop + static_cast<int>(i) * kBarHeight;
        const double w = bar_max > 0.0 ? bars[i].second / bar_max * 500.0 : 0.0;
        o << "<text x=\"10\" y=\"" << y + 15 << "\">" << bars[i].first << "</text>\n";
        o << "<rect x=\"110\" y=\"" << y + 3 << "\" width=\"" << num(round_sig6(w)) << "\" height=\"" << kBarHeight - 6
          << "\" fill=\"#4c78a8\"/>\n";
        o << "<text x=\"" << 115 + static_cast<int>(w) << "\" y=\"" << y + 15 << "\">" << num(round_sig6(bars[i].second))
          << "</text>\n";
    }

    std::vector<std::pair<double, double>> pts;
    std::vector<double> rebuild_at;
    for (const auto& r : records) {
        if (r.kind == workload::OperationKind::kQuery && r.error.empty()) {
            pts.emplace_back(static_cast<double>(r.start_ns) / 1e9, static_cast<double>(r.e2e_ns()) / 1e6);
        }
        if (r.rebuilds > 0) rebuild_at.push_back(static_cast<double>(r.start_ns) / 1e9);
    }
    double tmax = 0.0, lmax = 0.0;
    for (const auto& [t, l] : pts) {
        tmax = std::max(tmax, t);
        lmax = std::max(lmax, l);
    }
    for (double t : rebuild_at) tmax = std::max(tmax, t);
    const int x0 = 60, plot_w = kWidth - 80;
    auto px = [&](double t) { return x0 + (tmax > 0.0 ? t / tmax * plot_w : 0.0); };
    auto py = [&](double l) { return line_top + kChartHeight - (lmax > 0.0 ? l / lmax * kChartHeight : 0.0); };
    o << "<text x=\"10\" y=\"" << line_top - 15 << "\" font-size=\"14\">Query end-to-end latency over time</text>\n";
    o << "<line x1=\"" << x0 << "\" y1=\"" << line_top + kChartHeight << "\" x2=\"" << x0 + plot_w << "\" y2=\""
      << line_top + kChartHeight << "\" stroke=\"#333\"/>\n";
    o << "<line x1=\"" << x0 << "\" y1=\"" << line_top << "\" x2=\"" << x0 << "\" y2=\"" << line_top + kChartHeight
      << "\" stroke=\"#333\"/>\n";
    o << "<text x=\"5\" y=\"" << line_top + 10 << "\">" << num(round_sig6(lmax)) << " ms</text>\n";
    o << "<text x=\"" << x0 + plot_w - 40 << "\" y=\"" << line_top + kChartHeight + 20 << "\">" << num(round_sig6(tmax))
      << " s</text>\n";
    for (double t : rebuild_at) {
        o << "<line x1=\"" << num(round_sig6(px(t))) << "\" y1=\"" << line_top << "\" x2=\"" << num(round_sig6(px(t)))
          << "\" y2=\"" << line_top + kChartHeight << "\" stroke=\"#e45756\" stroke-dasharray=\"3,3\"/>\n";
    }
    if (!pts.empty()) {
        o << "<polyline fill=\"none\" stroke=\"#4c78a8\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i > 0) o << ' ';
            o << num(round_sig6(px(pts[i].first))) << ',' << num(round_sig6(py(pts[i].second)));
        }
        o << "\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

nlohmann::ordered_json strip_timing(nlohmann::ordered_json report) {
    for (const char* k : {"wall_time_s", "qps", "latency", "resources", "trace", "index"}) report.erase(k);
    if (report.contains("rebuilds")) report["rebuilds"].erase("events");
    return report;
}

}  // namespace ragbench::metrics
