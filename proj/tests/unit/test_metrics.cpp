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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metrics/quality.hpp"
#include "metrics/report.hpp"
#include "metrics/stats.hpp"
#include "monitor/trace_format.hpp"
#include "pipeline/request_log.hpp"
#include "test_support.hpp"

using namespace ragbench;
using namespace ragbench::metrics;

namespace {

std::string log_text(const std::vector<pipeline::RequestRecord>& recs, std::optional<pipeline::LogFooter> footer) {
    std::string s = pipeline::header_json({"run-a", "digest-a"}).dump() + "\n";
    for (const auto& r : recs) s += pipeline::to_json(r).dump() + "\n";
    if (footer) s += pipeline::footer_json(*footer).dump() + "\n";
    return s;
}

pipeline::RequestRecord query_record(std::uint64_t seq, std::vector<std::int64_t> stage_ns, std::int64_t start) {
    pipeline::RequestRecord r;
    r.sequence_no = seq;
    r.kind = workload::OperationKind::kQuery;
    r.target = "doc";
    const Stage order[] = {Stage::kEmbed, Stage::kRetrieve, Stage::kRerank, Stage::kPrompt, Stage::kGenerate};
    std::int64_t t = start;
    for (std::size_t i = 0; i < stage_ns.size(); ++i) {
        r.stages.push_back({order[i], t, t + stage_ns[i], 1});
        t += stage_ns[i];
    }
    r.start_ns = start;
    r.end_ns = t;
    r.scanned_vectors = 10 * (seq + 1);
    return r;
}

const nlohmann::ordered_json& stage_of(const nlohmann::ordered_json& rep, const std::string& name) {
    for (const auto& s : rep.at("latency"))
        if (s.at("stage") == name) return s;
    throw std::runtime_error("no stage " + name);
}

QualityRecord quality_record(std::string answer, std::string expected, std::vector<ChunkId> retrieved,
                             std::set<ChunkId> relevant, std::uint32_t version, std::vector<std::string> ctx) {
    QualityRecord q;
    q.answer_text = std::move(answer);
    q.qa.expected_answer = std::move(expected);
    q.qa.version = version;
    q.retrieved_ids = retrieved;
    q.reranked_ids = retrieved;
    q.relevant_ids = std::move(relevant);
    q.context_texts = std::move(ctx);
    return q;
}

}  // namespace

TEST(Percentile, NearestRank) {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    std::reverse(v.begin(), v.end());
    EXPECT_EQ(percentile(v, 0.95), 95.0);
    EXPECT_EQ(percentile(v, 0.5), 50.0);
    EXPECT_EQ(percentile(v, 1.0), 100.0);
    EXPECT_EQ(percentile(v, 0.01), 1.0);
}

TEST(Percentile, SingleSample) {
    std::vector<double> v{7.5};
    for (double p : {0.01, 0.5, 0.99, 1.0}) EXPECT_EQ(percentile(v, p), 7.5);
}

TEST(Percentile, ThreeSamplesMedian) {
    std::vector<double> v{30, 10, 20};
    EXPECT_EQ(percentile(v, 0.5), 20.0);
}

TEST(Percentile, Errors) {
    std::vector<double> none;
    EXPECT_ERRC(percentile(none, 0.5), Errc::kEmptySamples);
    std::vector<double> v{1};
    EXPECT_ERRC(percentile(v, 0.0), Errc::kInvalidArgument);
    EXPECT_ERRC(percentile(v, 1.5), Errc::kInvalidArgument);
    EXPECT_ERRC(summarize("x", {}), Errc::kEmptySamples);
}

TEST(Percentile, MatchesIndexFormulaOnRandomSets) {
    Rng rng(1);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng.below(500);
        std::vector<double> v(n);
        for (auto& x : v) x = rng.uniform() * 100;
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        for (int pp : {1, 10, 50, 90, 95, 99, 100}) {
            // Integer arithmetic for ceil(p*n)-1.
            const std::size_t idx = (static_cast<std::size_t>(pp) * n + 99) / 100 - 1;
            ASSERT_EQ(percentile(v, pp / 100.0), sorted[idx]) << n << " " << pp;
        }
    }
}

TEST(ContextRecall, Examples) {
    const std::set<ChunkId> ab{1, 2};
    EXPECT_EQ(context_recall(ab, ab, RecallMode::kRecall), 1.0);
    EXPECT_EQ(context_recall(ab, ab, RecallMode::kPrecision), 1.0);
    const std::set<ChunkId> abc{1, 2, 3}, ad{1, 4};
    EXPECT_DOUBLE_EQ(context_recall(abc, ad, RecallMode::kRecall), 0.5);
    EXPECT_DOUBLE_EQ(context_recall(abc, ad, RecallMode::kPrecision), 1.0 / 3.0);
    EXPECT_ERRC(context_recall(abc, {}, RecallMode::kRecall), Errc::kEmptyDenominator);
    EXPECT_ERRC(context_recall({}, ad, RecallMode::kPrecision), Errc::kEmptyDenominator);
}

TEST(QueryAccuracy, Examples) {
    EXPECT_EQ(reference_query_accuracy("1942", "1942"), 1.0);
    EXPECT_EQ(reference_query_accuracy("the year was 1942", "1942"), 1.0);
    EXPECT_EQ(reference_query_accuracy("the year was 1937", "1942"), 0.0);
    EXPECT_DOUBLE_EQ(reference_query_accuracy("a b c", "b c d"), 2.0 / 3.0);
    EXPECT_ERRC(reference_query_accuracy("x", ""), Errc::kInvalidArgument);
}

TEST(FactualConsistency, Examples) {
    std::vector<std::string> ctx{"The bridge was built in 1942. It crosses the Vell river."};
    EXPECT_EQ(reference_factual_consistency("The bridge was built in 1942. It crosses the Vell river.", ctx), 1.0);
    EXPECT_EQ(reference_factual_consistency("The bridge was built in 1942. Purple elephants dance wildly.", ctx), 0.5);
    // Content tokens: bridge, built, 1942, tunnel. Three of four present.
    EXPECT_EQ(reference_factual_consistency("The bridge built 1942 tunnel.", ctx), 1.0);
    // Two of four present falls below 75%.
    EXPECT_EQ(reference_factual_consistency("The bridge built canal tunnel.", ctx), 0.0);
    std::vector<std::string> none;
    EXPECT_EQ(reference_factual_consistency("Something.", none), 0.0);
    EXPECT_FALSE(reference_factual_consistency("NO-CONTEXT", none).has_value());
}

TEST(QualityEval, AggregatesAndUpdateRecall) {
    std::vector<QualityRecord> recs{
        quality_record("1942", "1942", {1, 2}, {1}, 1, {"built in 1942."}),
        quality_record("1937", "1942", {3, 4}, {5}, 2, {"built in 1937."}),
        quality_record("NO-CONTEXT", "1900", {}, {6}, 0, {}),
    };
    ReferenceJudge judge;
    const auto agg = evaluate_quality(recs, judge, RecallMode::kRecall);
    EXPECT_EQ(agg.evaluated, 3u);
    EXPECT_EQ(agg.excluded_sentinels, 1u);
    EXPECT_DOUBLE_EQ(*agg.context_recall, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(*agg.query_accuracy, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(*agg.factual_consistency, 1.0);
    EXPECT_EQ(agg.update_questions, 2u);
    EXPECT_EQ(agg.update_questions_hit, 1u);
    EXPECT_DOUBLE_EQ(*agg.update_question_recall, 0.5);
    // precision with nothing retrieved scores 0.
    const auto lit = evaluate_quality(recs, judge, RecallMode::kPrecision);
    EXPECT_DOUBLE_EQ(*lit.context_recall, (0.5 + 0.0 + 0.0) / 3.0);
}

TEST(RequestLogParse, CorruptLineOffset) {
    auto recs = std::vector<pipeline::RequestRecord>{query_record(0, {1, 1, 1, 1, 1}, 0)};
    auto text = log_text(recs, pipeline::LogFooter{10, 1, false});
    const auto ok = parse_request_log(text);
    EXPECT_EQ(ok.records.size(), 1u);
    ASSERT_TRUE(ok.footer.has_value());
    EXPECT_EQ(ok.footer->completed, 1u);
    const auto first_nl = text.find('\n');
    auto broken = text.substr(0, first_nl + 1) + "{not json\n" + text.substr(first_nl + 1);
    try {
        parse_request_log(broken);
        ADD_FAILURE() << "expected CorruptLog";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::kCorruptLog);
        EXPECT_NE(std::string(e.what()).find(std::to_string(first_nl + 1)), std::string::npos) << e.what();
    }
    auto unterminated = text.substr(0, text.size() - 1);
    EXPECT_ERRC(parse_request_log(unterminated), Errc::kCorruptLog);
}

TEST(RequestLogParse, VersionMismatch) {
    auto h = pipeline::header_json({"r", "d"});
    h["log_version"] = 99;
    EXPECT_ERRC(parse_request_log(h.dump() + "\n"), Errc::kSchemaVersionMismatch);
}

TEST(Report, EmptyRun) {
    ReportInputs in;
    in.log = parse_request_log(log_text({}, pipeline::LogFooter{0, 0, false}));
    const auto rep = build_report(in);
    EXPECT_EQ(rep.at("requests").at("total"), 0);
    EXPECT_EQ(rep.at("requests").at("query"), 0);
    EXPECT_EQ(rep.at("qps"), 0.0);
    EXPECT_TRUE(rep.at("latency").empty());
    EXPECT_FALSE(rep.at("partial").get<bool>());
    EXPECT_EQ(rep.at("rebuilds").at("count"), 0);
    const auto csv = render_csv(rep);
    EXPECT_EQ(csv, "stage,count,mean_ms,p50_ms,p95_ms,p99_ms,max_ms\n");
    EXPECT_NO_THROW(nlohmann::json::parse(render_json(rep)));
    EXPECT_NE(render_svg(rep, in.log.records).find("<svg"), std::string::npos);
}

TEST(Report, ThreeQueriesHandMeans) {
    // Stage times in ns; means are hand-computed below.
    std::vector<pipeline::RequestRecord> recs{
        query_record(0, {1'000'000, 2'000'000, 300'000, 100'000, 4'000'000}, 0),
        query_record(1, {2'000'000, 2'000'000, 600'000, 100'000, 5'000'000}, 10'000'000),
        query_record(2, {3'000'000, 5'000'000, 900'000, 100'000, 6'000'000}, 20'000'000),
    };
    ReportInputs in;
    in.log = parse_request_log(log_text(recs, pipeline::LogFooter{1'500'000'000, 3, false}));
    const auto rep = build_report(in);
    EXPECT_EQ(stage_of(rep, "query.embed").at("mean_ms"), 2.0);
    EXPECT_EQ(stage_of(rep, "query.retrieve").at("mean_ms"), 3.0);
    EXPECT_EQ(stage_of(rep, "query.rerank").at("mean_ms"), 0.6);
    EXPECT_EQ(stage_of(rep, "query.prompt").at("mean_ms"), 0.1);
    EXPECT_EQ(stage_of(rep, "query.generate").at("mean_ms"), 5.0);
    // e2e: 7.4, 9.7, 15.0 -> mean 32.1/3 = 10.7
    EXPECT_EQ(stage_of(rep, "query.e2e").at("mean_ms"), 10.7);
    EXPECT_EQ(stage_of(rep, "query.e2e").at("p50_ms"), 9.7);
    EXPECT_EQ(stage_of(rep, "query.e2e").at("max_ms"), 15.0);
    EXPECT_EQ(stage_of(rep, "query.e2e").at("count"), 3);
    EXPECT_EQ(rep.at("wall_time_s"), 1.5);
    EXPECT_EQ(rep.at("qps"), 2.0);
    EXPECT_EQ(rep.at("retrieval").at("scanned_vectors_mean"), 20.0);
    EXPECT_EQ(rep.at("retrieval").at("scanned_vectors_max"), 30);
    const auto csv = render_csv(rep);
    EXPECT_NE(csv.find("query.e2e,3,10.7,9.7,15,15,15\n"), std::string::npos) << csv;
}

TEST(Report, AggregatesMatchIndependentRecomputation) {
    Rng rng(4);
    std::vector<pipeline::RequestRecord> recs;
    std::int64_t t = 0;
    for (std::uint64_t i = 0; i < 400; ++i) {
        std::vector<std::int64_t> st;
        for (int s = 0; s < 5; ++s) st.push_back(1000 + static_cast<std::int64_t>(rng.below(5'000'000)));
        recs.push_back(query_record(i, st, t));
        t = recs.back().end_ns + 17;
    }
    ReportInputs in;
    in.log = parse_request_log(log_text(recs, pipeline::LogFooter{t, recs.size(), false}));
    const auto rep = build_report(in);
    std::vector<double> e2e;
    for (const auto& r : recs) e2e.push_back(static_cast<double>(r.end_ns - r.start_ns) / 1e6);
    std::sort(e2e.begin(), e2e.end());
    const double mean = std::accumulate(e2e.begin(), e2e.end(), 0.0) / e2e.size();
    const auto& s = stage_of(rep, "query.e2e");
    EXPECT_EQ(s.at("mean_ms").get<double>(), round_sig6(mean));
    EXPECT_EQ(s.at("p50_ms").get<double>(), round_sig6(e2e[199]));
    EXPECT_EQ(s.at("p95_ms").get<double>(), round_sig6(e2e[379]));
    EXPECT_EQ(s.at("p99_ms").get<double>(), round_sig6(e2e[395]));
    EXPECT_EQ(s.at("max_ms").get<double>(), round_sig6(e2e[399]));
    // qps * wall_time = completed queries, within the 6-digit rounding of both factors.
    const double qps = rep.at("qps").get<double>();
    const double wall = rep.at("wall_time_s").get<double>();
    EXPECT_NEAR(qps * wall, 400.0, 400.0 * 2e-6);
}

TEST(Report, TruncatedTraceFlagged) {
    monitor::TraceHeader h;
    h.metrics = {{1, "sys.cpu.util_pct"}};
    auto bytes = monitor::encode_header(h);
    for (int i = 0; i < 4; ++i) {
        std::uint8_t buf[monitor::kRecordBytes];
        monitor::encode_record({1, static_cast<std::uint64_t>(i), 10.0 * (i + 1)}, buf);
        bytes.insert(bytes.end(), buf, buf + monitor::kRecordBytes);
    }
    ReportInputs in;
    in.log = parse_request_log(log_text({}, pipeline::LogFooter{0, 0, false}));
    in.trace = monitor::parse_trace(bytes);
    in.trace_expected = true;
    const auto rep = build_report(in);
    EXPECT_TRUE(rep.at("trace_incomplete").get<bool>());
    EXPECT_TRUE(rep.at("trace").at("samples_written").is_null());
    ASSERT_EQ(rep.at("resources").size(), 1u);
    EXPECT_EQ(rep.at("resources")[0].at("mean"), 25.0);
    EXPECT_EQ(rep.at("resources")[0].at("max"), 40.0);
}

TEST(Report, PartialWhenFooterMissingOrInterrupted) {
    auto recs = std::vector<pipeline::RequestRecord>{query_record(0, {1, 1, 1, 1, 1}, 0)};
    ReportInputs a;
    a.log = parse_request_log(log_text(recs, std::nullopt));
    EXPECT_TRUE(build_report(a).at("partial").get<bool>());
    ReportInputs b;
    b.log = parse_request_log(log_text(recs, pipeline::LogFooter{5, 1, true}));
    EXPECT_TRUE(build_report(b).at("partial").get<bool>());
}

TEST(Report, DeterministicBytes) {
    std::vector<pipeline::RequestRecord> recs{query_record(0, {1'234'567, 2, 3, 4, 5}, 0),
                                              query_record(1, {7'654'321, 2, 3, 4, 5}, 9'000'000)};
    recs[1].rebuilds = 1;
    recs[1].rebuild_ns = 3'000'000;
    ReportInputs in;
    in.log = parse_request_log(log_text(recs, pipeline::LogFooter{20'000'000, 2, false}));
    const auto a = render_json(build_report(in));
    const auto b = render_json(build_report(in));
    EXPECT_EQ(a, b);
    const auto rep = build_report(in);
    EXPECT_EQ(rep.at("rebuilds").at("count"), 1);
    const auto stripped = strip_timing(rep);
    EXPECT_FALSE(stripped.contains("latency"));
    EXPECT_FALSE(stripped.contains("wall_time_s"));
    EXPECT_TRUE(stripped.contains("requests"));
}

TEST(Report, DigestMismatch) {
    ReportInputs in;
    in.log = parse_request_log(log_text({}, pipeline::LogFooter{0, 0, false}));
    monitor::TraceHeader h;
    h.metrics = {{monitor::kConfigDigestId, "config:other"}};
    in.trace = monitor::parse_trace(monitor::encode_header(h));
    EXPECT_ERRC(check_digests(in, std::nullopt), Errc::kDigestMismatch);
}

TEST(Report, RoundSig6) {
    EXPECT_EQ(round_sig6(1.23456789), 1.23457);
    EXPECT_EQ(round_sig6(123456789.0), 123457000.0);
    EXPECT_EQ(round_sig6(0.0), 0.0);
    EXPECT_EQ(round_sig6(-0.000123456789), -0.000123457);
}
