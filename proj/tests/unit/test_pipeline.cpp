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
#include <set>

#include "app/ingest.hpp"
#include "common/text.hpp"
#include "pipeline/chunker.hpp"
#include "pipeline/pipeline.hpp"
#include "pipeline/request_log.hpp"
#include "refbackends/hash_embedder.hpp"
#include "refbackends/lexical_reranker.hpp"
#include "refbackends/reference_store.hpp"
#include "refbackends/template_generator.hpp"
#include "test_support.hpp"
#include "workload/workload.hpp"

using namespace ragbench;
using namespace ragbench::pipeline;

namespace {

Document doc_of(std::string body) { return Document{"d", "d", std::move(body)}; }

std::vector<std::pair<std::size_t, std::size_t>> spans(const std::vector<Chunk>& cs) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& c : cs) out.emplace_back(c.start, c.end);
    return out;
}

struct RefRig {
    Corpus corpus;
    std::shared_ptr<ref::ReferenceStore> store;
    std::unique_ptr<Pipeline> pipeline;

    RefRig(Corpus c, IndexSpec spec, QuerySpec q = {}, std::shared_ptr<Chunker> chunker = nullptr) : corpus(std::move(c)) {
        Components comp;
        comp.chunker = chunker ? chunker : std::make_shared<SeparatorChunker>(std::vector<std::string>{"\n\n", ". "}, 512, 0);
        comp.embedder = std::make_shared<ref::HashEmbedder>(ref::HashEmbedderConfig{256, 42, true});
        store = std::make_shared<ref::ReferenceStore>(spec);
        store->create_collection(256, spec.metric);
        comp.store = store;
        comp.reranker = std::make_shared<ref::LexicalReranker>();
        comp.generator = std::make_shared<ref::TemplateGenerator>();
        pipeline = std::make_unique<Pipeline>(comp, q, corpus);
    }
};

IndexSpec hybrid(std::uint32_t threshold = 1000) {
    IndexSpec s;
    s.kind = IndexKind::kHybridIvf;
    s.nlist = 4;
    s.nprobe = 4;
    s.buffer_threshold = threshold;
    s.seed = 1;
    return s;
}

}  // namespace

TEST(ChunkFixed, NoOverlap) {
    const auto cs = chunk_fixed(doc_of("0123456789"), 4, 0);
    using P = std::pair<std::size_t, std::size_t>;
    EXPECT_EQ(spans(cs), (std::vector<P>{{0, 4}, {4, 8}, {8, 10}}));
    EXPECT_EQ(cs[2].text, "89");
}

TEST(ChunkFixed, OverlapOne) {
    using P = std::pair<std::size_t, std::size_t>;
    EXPECT_EQ(spans(chunk_fixed(doc_of("0123456789"), 4, 1)), (std::vector<P>{{0, 4}, {3, 7}, {6, 10}}));
}

TEST(ChunkFixed, ZeroStrideRejected) {
    EXPECT_ERRC(chunk_fixed(doc_of("0123456789"), 4, 4), Errc::kInvalidChunkParams);
    EXPECT_ERRC(chunk_fixed(doc_of("0123456789"), 0, 0), Errc::kInvalidChunkParams);
}

TEST(ChunkFixed, ClosedFormStride) {
    // Chunk i starts at i*(size-overlap); the last one ends at the body end.
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t len = rng.below(3000);
        const std::size_t size = 1 + rng.below(300);
        const std::size_t overlap = rng.below(size);
        const std::string body(len, 'x');
        const auto cs = chunk_fixed(doc_of(body), size, overlap);
        const std::size_t stride = size - overlap;
        std::size_t expected = 0;
        if (len > 0) expected = len <= size ? 1 : 1 + (len - size + stride - 1) / stride;
        ASSERT_EQ(cs.size(), expected) << len << " " << size << " " << overlap;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            ASSERT_EQ(cs[i].start, i * stride);
            ASSERT_EQ(cs[i].end, std::min(i * stride + size, len));
            ASSERT_EQ(chunk_index_of(cs[i].chunk_id), i);
        }
    }
}

TEST(ChunkSeparator, Sentences) {
    const auto cs = chunk_separator(doc_of("A. B. C."), {". "}, 100, 0);
    ASSERT_EQ(cs.size(), 3u);
    EXPECT_EQ(text::trim(cs[0].text), "A.");
    EXPECT_EQ(text::trim(cs[1].text), "B.");
    EXPECT_EQ(text::trim(cs[2].text), "C.");
    EXPECT_EQ(reconstruct_body(cs), "A. B. C.");
}

TEST(ChunkSeparator, LongSegmentFallsBackToFixed) {
    const auto cs = chunk_separator(doc_of(std::string(100, 'a')), {". "}, 40, 0);
    ASSERT_EQ(cs.size(), 3u);
    EXPECT_EQ(cs[0].end - cs[0].start, 40u);
    EXPECT_EQ(cs[2].end, 100u);
}

TEST(ChunkSeparator, EmptyBody) {
    EXPECT_TRUE(chunk_separator(doc_of(""), {". "}, 40, 0).empty());
    EXPECT_TRUE(chunk_fixed(doc_of(""), 4, 0).empty());
}

TEST(ChunkSeparator, ContextOverlapPrefix) {
    const auto cs = chunk_separator(doc_of("A. B. C."), {". "}, 100, 1);
    ASSERT_EQ(cs.size(), 3u);
    EXPECT_TRUE(cs[0].context_prefix.empty());
    EXPECT_EQ(cs[1].context_prefix, cs[0].text);
    EXPECT_EQ(reconstruct_body(cs), "A. B. C.");
}

TEST(Chunking, LosslessOverRandomDocuments) {
    const auto docs = app::synthetic_documents(150, 99);
    for (const auto& d : docs) {
        for (std::size_t size : {16u, 100u, 512u}) {
            for (std::size_t overlap : {0u, 7u}) {
                const auto cs = chunk_fixed(d, size, overlap);
                for (const auto& c : cs) ASSERT_EQ(c.text, d.body.substr(c.start, c.end - c.start));
                ASSERT_EQ(reconstruct_body(cs), d.body);
            }
        }
        for (std::size_t max_len : {32u, 200u, 1024u}) {
            const auto cs = chunk_separator(d, {"\n\n", ". "}, max_len, 1);
            std::size_t pos = 0;
            for (const auto& c : cs) {
                ASSERT_EQ(c.start, pos);
                ASSERT_LE(c.end - c.start, max_len);
                pos = c.end;
            }
            ASSERT_EQ(reconstruct_body(cs), d.body);
        }
    }
}

TEST(IndexCorpus, EmptyCorpus) {
    Corpus empty;
    FixedChunker chunker(64, 0);
    ref::HashEmbedder emb({64, 1, true});
    ref::ReferenceStore store(hybrid());
    store.create_collection(64, Metric::kCosine);
    const auto st = index_corpus(empty, chunker, emb, store, 8);
    EXPECT_EQ(st.chunk_count, 0u);
    EXPECT_EQ(st.embed_s, 0.0);
    EXPECT_EQ(st.insert_s, 0.0);
    EXPECT_EQ(st.build_s, 0.0);
}

TEST(IndexCorpus, ChunkCountMatchesStandaloneChunker) {
    const auto corpus = Corpus::from_documents(app::synthetic_documents(1000, 5));
    FixedChunker chunker(256, 32);
    std::size_t oracle = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) oracle += chunker.chunk(corpus.documents[i], i).size();
    ref::HashEmbedder emb({64, 1, true});
    IndexSpec spec = hybrid();
    spec.nlist = 16;
    ref::ReferenceStore store(spec);
    store.create_collection(64, Metric::kCosine);
    ChunkRegistry reg;
    const auto st = index_corpus(corpus, chunker, emb, store, 64, &reg);
    EXPECT_EQ(st.chunk_count, oracle);
    EXPECT_EQ(store.stats().live_vectors, oracle);
    EXPECT_EQ(reg.live_chunk_count(), oracle);
    EXPECT_GT(st.index_bytes, 0u);
}

TEST(IndexCorpus, DimensionMismatch) {
    const auto corpus = Corpus::from_documents(app::synthetic_documents(3, 5));
    FixedChunker chunker(256, 0);
    ref::HashEmbedder emb({384, 1, true});
    ref::ReferenceStore store(hybrid());
    store.create_collection(768, Metric::kCosine);
    EXPECT_ERRC(index_corpus(corpus, chunker, emb, store, 8), Errc::kDimensionMismatch);
}

TEST(HandleQuery, ClampToIndexSize) {
    auto corpus = Corpus::from_documents({{"a", "a", "The Orlen tower rose in 1910. It burned in 1922. Nobody rebuilt it."}});
    QuerySpec q;
    q.k = 5;
    q.rerank_out = 3;
    IndexSpec spec;
    spec.kind = IndexKind::kFlat;
    RefRig rig(corpus, spec, q);
    rig.pipeline->index();
    ASSERT_EQ(rig.store->stats().live_vectors, 3u);
    workload::QAEntry qa;
    qa.question = "Fill in the blank: It burned in ____.";
    const auto out = rig.pipeline->handle_query(qa);
    EXPECT_EQ(out.retrieved_ids.size(), 3u);
    EXPECT_EQ(out.reranked_ids.size(), 3u);
}

TEST(HandleQuery, SelfRetrievalAndStageOrder) {
    const auto corpus = Corpus::from_documents(app::synthetic_documents(60, 11));
    RefRig rig(corpus, hybrid());
    rig.pipeline->index();
    pipeline::SeparatorChunker chunker({"\n\n", ". "}, 512, 0);
    workload::WorkloadSpec ws;
    ws.total_requests = 1;
    workload::WorkloadGenerator gen(ws, corpus, chunker);
    std::size_t hits = 0, total = 0;
    for (const auto& qa : gen.pool().entries()) {
        const auto out = rig.pipeline->handle_query(qa);
        ++total;
        hits += std::find(out.retrieved_ids.begin(), out.retrieved_ids.end(), qa.target_chunk_id) != out.retrieved_ids.end();
        ASSERT_LE(out.retrieved_ids.size(), 5u);
        ASSERT_LE(out.reranked_ids.size(), 3u);
        for (auto id : out.reranked_ids) {
            ASSERT_NE(std::find(out.retrieved_ids.begin(), out.retrieved_ids.end(), id), out.retrieved_ids.end());
        }
        const Stage order[] = {Stage::kEmbed, Stage::kRetrieve, Stage::kRerank, Stage::kPrompt, Stage::kGenerate};
        ASSERT_EQ(out.timings.size(), 5u);
        std::int64_t sum = 0;
        for (std::size_t i = 0; i < 5; ++i) {
            ASSERT_EQ(out.timings[i].stage, order[i]);
            if (i > 0) {
                ASSERT_GE(out.timings[i].start_ns, out.timings[i - 1].end_ns);
            }
            sum += out.timings[i].duration_ns();
        }
        const auto e2e = out.end_ns - out.start_ns;
        ASSERT_LE(sum, e2e);
        ASSERT_GE(static_cast<double>(sum), 0.95 * static_cast<double>(e2e));
    }
    ASSERT_GT(total, 100u);
    EXPECT_EQ(hits, total);
}

TEST(HandleQuery, RerankOutOneIsTopCandidate) {
    const auto corpus = Corpus::from_documents(app::synthetic_documents(30, 2));
    QuerySpec q;
    q.k = 5;
    q.rerank_out = 1;
    RefRig rig(corpus, hybrid(), q);
    rig.pipeline->index();
    workload::QAEntry qa;
    qa.question = "Fill in the blank: The council met in ____.";
    const auto out = rig.pipeline->handle_query(qa);
    ASSERT_EQ(out.reranked_ids.size(), 1u);
    const auto texts = rig.pipeline->registry().retrieval_texts(out.retrieved_ids);
    std::vector<RerankInput> in;
    for (std::size_t i = 0; i < texts.size(); ++i) in.push_back({out.retrieved_ids[i], texts[i]});
    ref::LexicalReranker rr;
    EXPECT_EQ(out.reranked_ids.front(), rr.rerank(qa.question, in, 5).front());
}

TEST(ApplyUpdate, RemovalDropsChunksAndUnknownFails) {
    auto corpus = Corpus::from_documents({{"a", "a", "The Orlen tower rose in 1910. It burned in 1922. Nobody rebuilt it."},
                                          {"b", "b", "Mira Vosk wrote 12 books. She lived in Tarn."}});
    RefRig rig(corpus, hybrid());
    rig.pipeline->index();
    const auto before = rig.store->stats().live_vectors;
    workload::Request r;
    r.kind = workload::OperationKind::kRemoval;
    r.target_file_id = "a";
    rig.pipeline->apply_update(r);
    EXPECT_EQ(rig.store->stats().live_vectors, before - 3);
    EXPECT_ERRC(rig.pipeline->apply_update(r), Errc::kUnknownFileId);
    r.target_file_id = "zzz";
    EXPECT_ERRC(rig.pipeline->apply_update(r), Errc::kUnknownFileId);
}

TEST(ApplyUpdate, UpdatedChunkRetrievableWithBuffer) {
    const auto corpus = Corpus::from_documents(app::synthetic_documents(40, 3));
    auto chunker = std::make_shared<SeparatorChunker>(std::vector<std::string>{"\n\n", ". "}, 512, 0);
    RefRig rig(corpus, hybrid(1000), {}, chunker);
    rig.pipeline->index();
    workload::WorkloadSpec ws;
    ws.total_requests = 1;
    ws.seed = 4;
    workload::WorkloadGenerator gen(ws, corpus, *chunker);
    // Re-updating a buffered chunk replaces its buffer entry.
    std::set<ChunkId> buffered;
    for (int i = 0; i < 20; ++i) {
        const auto req = gen.build_request(workload::OperationKind::kUpdate);
        rig.pipeline->apply_update(req);
        buffered.erase(req.replaced_chunk_id);
        buffered.insert(req.new_chunk_id);
        const auto& qa = gen.pool().entries().back();
        ASSERT_EQ(qa.target_chunk_id, req.new_chunk_id);
        const auto out = rig.pipeline->handle_query(qa);
        EXPECT_NE(std::find(out.retrieved_ids.begin(), out.retrieved_ids.end(), req.new_chunk_id), out.retrieved_ids.end());
        EXPECT_EQ(std::find(out.retrieved_ids.begin(), out.retrieved_ids.end(), req.replaced_chunk_id), out.retrieved_ids.end());
    }
    EXPECT_EQ(rig.store->stats().buffer_size, buffered.size());
}

TEST(ApplyUpdate, InsertAddsChunks) {
    const auto corpus = Corpus::from_documents(app::synthetic_documents(10, 3));
    auto chunker = std::make_shared<SeparatorChunker>(std::vector<std::string>{"\n\n", ". "}, 512, 0);
    RefRig rig(corpus, hybrid(), {}, chunker);
    rig.pipeline->index(8);
    const auto before = rig.store->stats().live_vectors;
    workload::Request r;
    r.kind = workload::OperationKind::kInsert;
    r.insert_file_id = corpus.documents[8].file_id;
    const auto out = rig.pipeline->apply_update(r);
    EXPECT_EQ(rig.store->stats().live_vectors, before + chunker->chunk(corpus.documents[8], 8).size());
    EXPECT_FALSE(out.timings.empty());
}

TEST(AssemblePrompt, TwoParts) {
    std::vector<std::string> ctx{"built in 1942."};
    EXPECT_EQ(assemble_prompt("When?", ctx, "{question}\n{contexts}").text, "When?\nbuilt in 1942.");
    std::vector<std::string> two{"x", "y"};
    EXPECT_EQ(assemble_prompt("q", two, "{contexts}|{question}").text, "x\n---\ny|q");
}

TEST(AssemblePrompt, NoContexts) {
    std::vector<std::string> none;
    const auto p = assemble_prompt("When?", none, "{question}\n{contexts}");
    EXPECT_EQ(p.text, "When?\n");
    EXPECT_TRUE(p.contexts.empty());
}

TEST(AssemblePrompt, BadTemplate) {
    std::vector<std::string> none;
    EXPECT_ERRC(assemble_prompt("q", none, "{contexts} only"), Errc::kBadTemplate);
    EXPECT_ERRC(assemble_prompt("q", none, "{question} {question} {contexts}"), Errc::kBadTemplate);
}

TEST(RequestLog, RecordRoundTrip) {
    RequestRecord r;
    r.sequence_no = 17;
    r.kind = workload::OperationKind::kQuery;
    r.target = "doc-1";
    r.retrieved_ids = {make_chunk_id(1, 2, 0), make_chunk_id(3, 0, 4)};
    r.reranked_ids = {make_chunk_id(3, 0, 4)};
    r.answer_text = "1942";
    workload::QAEntry qa{"Fill in the blank: ____.", "1942", make_chunk_id(3, 0, 4), "doc-1", 4};
    r.qa = qa;
    r.scanned_vectors = 99;
    r.stages = {{Stage::kEmbed, 10, 20, 2}, {Stage::kRetrieve, 20, 45, 2}};
    r.start_ns = 5;
    r.end_ns = 50;
    r.ttft_ms = 1.5;
    const auto back = record_from_json(nlohmann::json::parse(to_json(r).dump()));
    EXPECT_EQ(back.sequence_no, 17u);
    EXPECT_EQ(back.retrieved_ids, r.retrieved_ids);
    EXPECT_EQ(back.reranked_ids, r.reranked_ids);
    // The log keeps a hash of the answer; the text lives in the quality records.
    EXPECT_EQ(to_json(r).at("answer_hash").get<std::string>().size(), 16u);
    ASSERT_TRUE(back.qa.has_value());
    EXPECT_EQ(*back.qa, qa);
    ASSERT_EQ(back.stages.size(), 2u);
    EXPECT_EQ(back.stages[1].stage, Stage::kRetrieve);
    EXPECT_EQ(back.stages[1].duration_ns(), 25);
    EXPECT_EQ(back.stages[1].batch_size, 2u);
    EXPECT_EQ(back.e2e_ns(), 45);
    EXPECT_EQ(back.ttft_ms, 1.5);
    EXPECT_FALSE(back.tpot_ms.has_value());
}

TEST(RequestLog, WriterOrdersBySequence) {
    tsupport::TempDir dir;
    const auto path = dir.file("requests.jsonl");
    {
        RequestLogWriter w(path, LogHeader{"run", "abc"});
        for (std::uint64_t s : {2ULL, 0ULL, 3ULL, 1ULL}) {
            RequestRecord r;
            r.sequence_no = s;
            w.submit(r);
        }
        w.close(LogFooter{1000, 4, false});
        EXPECT_EQ(w.written(), 4u);
    }
    std::istringstream in(tsupport::slurp(path));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 6u);
    for (std::uint64_t s = 0; s < 4; ++s) {
        EXPECT_EQ(nlohmann::json::parse(lines[s + 1]).at("sequence_no").get<std::uint64_t>(), s);
    }
}
