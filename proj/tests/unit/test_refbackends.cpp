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
#include <map>

#include "common/rng.hpp"
#include "refbackends/hash_embedder.hpp"
#include "refbackends/ivf.hpp"
#include "refbackends/lexical_reranker.hpp"
#include "refbackends/reference_store.hpp"
#include "refbackends/template_generator.hpp"
#include "refbackends/vector_math.hpp"
#include "test_support.hpp"

using namespace ragbench;
using namespace ragbench::ref;

namespace {

std::vector<Vector> gaussian_vectors(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vector> out(n, Vector(dim));
    for (auto& v : out)
        for (auto& x : v) x = rng.gaussian();
    return out;
}

std::vector<ChunkId> iota_ids(std::size_t n, ChunkId base = 1) {
    std::vector<ChunkId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = base + i;
    return ids;
}

// Independent brute force: full sort by (score desc, id asc).
std::vector<RetrievalCandidate> brute_force(const std::vector<ChunkId>& ids, const std::vector<Vector>& vs,
                                            const Vector& q, std::size_t k, Metric metric) {
    std::vector<RetrievalCandidate> all;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        double s = 0.0;
        if (metric == Metric::kCosine) {
            double ab = 0, aa = 0, bb = 0;
            for (std::size_t d = 0; d < q.size(); ++d) {
                ab += q[d] * vs[i][d];
                aa += q[d] * q[d];
                bb += vs[i][d] * vs[i][d];
            }
            s = ab / std::sqrt(aa * bb);
        } else {
            for (std::size_t d = 0; d < q.size(); ++d) s -= (q[d] - vs[i][d]) * (q[d] - vs[i][d]);
        }
        all.push_back({ids[i], s});
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    all.resize(std::min(k, all.size()));
    return all;
}

// Independent scalar re-implementation of the feature-hashing embedder.
std::vector<double> scalar_embed(const std::string& text, std::size_t dim, std::uint64_t seed) {
    auto mix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    std::vector<double> v(dim, 0.0);
    std::string tok;
    auto flush = [&] {
        if (tok.empty()) return;
        std::uint64_t h = 0xcbf29ce484222325ULL ^ mix(seed);
        for (unsigned char c : tok) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h = mix(h);
        v[h % dim] += (h >> 63) ? -1.0 : 1.0;
        tok.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else
            flush();
    }
    flush();
    double n = 0;
    for (double x : v) n += x * x;
    for (double& x : v) x /= std::sqrt(n);
    return v;
}

IndexSpec spec_of(IndexKind kind, std::uint32_t nlist, std::uint32_t nprobe, std::uint32_t threshold = 1024) {
    IndexSpec s;
    s.kind = kind;
    s.nlist = nlist;
    s.nprobe = nprobe;
    s.buffer_threshold = threshold;
    s.seed = 3;
    return s;
}

}  // namespace

TEST(HashEmbed, Deterministic) {
    HashEmbedder e({384, 42, true});
    const auto a = e.embed_one("abc abc");
    const auto b = e.embed_one("abc abc");
    EXPECT_EQ(a, b);
    EXPECT_NEAR(cosine(a, b), 1.0, 1e-12);
}

TEST(HashEmbed, DimAndNorm) {
    HashEmbedder e({128, 1, true});
    std::vector<std::string> texts{"one", "two words", "Three three THREE"};
    const auto vs = e.embed(texts);
    ASSERT_EQ(vs.size(), 3u);
    for (const auto& v : vs) {
        ASSERT_EQ(v.size(), 128u);
        double n = 0;
        for (double x : v) n += x * x;
        EXPECT_NEAR(n, 1.0, 1e-12);
    }
    EXPECT_ERRC(e.embed_one(""), Errc::kEmptyInput);
}

TEST(HashEmbed, CosineMatchesScalarOracle) {
    HashEmbedder e({384, 42, true});
    const auto a = e.embed_one("alpha beta");
    const auto b = e.embed_one("gamma delta");
    const auto oa = scalar_embed("alpha beta", 384, 42);
    const auto ob = scalar_embed("gamma delta", 384, 42);
    double dot_o = 0;
    for (std::size_t i = 0; i < 384; ++i) dot_o += oa[i] * ob[i];
    EXPECT_NEAR(cosine(a, b), dot_o, 1e-12);
    for (std::size_t i = 0; i < 384; ++i) EXPECT_NEAR(a[i], oa[i], 1e-15);
}

TEST(FlatSearch, SingleVectorSelf) {
    std::vector<Vector> vs{{0.3, -0.2, 0.9}};
    std::vector<ChunkId> ids{7};
    const auto r = flat_search(ids, vs, vs[0], 5, Metric::kCosine);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].id, 7u);
    EXPECT_EQ(r[0].score, 1.0);
}

TEST(FlatSearch, ClampAndBruteForce) {
    const auto vs = gaussian_vectors(100, 16, 9);
    const auto ids = iota_ids(100);
    std::vector<Vector> four(vs.begin(), vs.begin() + 4);
    std::vector<ChunkId> four_ids(ids.begin(), ids.begin() + 4);
    EXPECT_EQ(flat_search(four_ids, four, vs[50], 10, Metric::kCosine).size(), 4u);
    const auto qs = gaussian_vectors(20, 16, 10);
    for (Metric m : {Metric::kCosine, Metric::kL2}) {
        for (const auto& q : qs) EXPECT_EQ(flat_search(ids, vs, q, 10, m), brute_force(ids, vs, q, 10, m));
    }
}

TEST(IvfBuild, SingleListHoldsAll) {
    const auto vs = gaussian_vectors(50, 8, 1);
    const auto ids = iota_ids(50);
    const auto st = ivf_build(ids, vs, 1, Metric::kCosine, 1);
    ASSERT_EQ(st.nlist(), 1u);
    EXPECT_EQ(st.lists[0].size(), 50u);
}

TEST(IvfBuild, NlistClampedToPoints) {
    const auto vs = gaussian_vectors(4, 8, 1);
    const auto st = ivf_build(iota_ids(4), vs, 8, Metric::kL2, 1);
    EXPECT_EQ(st.nlist(), 4u);
    EXPECT_EQ(st.size(), 4u);
}

TEST(IvfBuild, SeparatedBlobsShareLists) {
    Rng rng(5);
    std::vector<Vector> vs;
    for (int b = 0; b < 2; ++b) {
        for (int i = 0; i < 100; ++i) {
            Vector v(8);
            for (auto& x : v) x = rng.gaussian() * 0.1;
            v[0] += b == 0 ? 10.0 : -10.0;
            vs.push_back(v);
        }
    }
    const auto st = ivf_build(iota_ids(200), vs, 2, Metric::kL2, 7);
    ASSERT_EQ(st.nlist(), 2u);
    std::map<ChunkId, std::size_t> list_of;
    for (std::size_t l = 0; l < 2; ++l)
        for (auto id : st.lists[l].ids()) list_of[id] = l;
    for (ChunkId id = 2; id <= 100; ++id) EXPECT_EQ(list_of[id], list_of[1]);
    for (ChunkId id = 102; id <= 200; ++id) EXPECT_EQ(list_of[id], list_of[101]);
    EXPECT_NE(list_of[1], list_of[101]);
}

TEST(IvfSearch, FullProbeEqualsFlat) {
    const auto vs = gaussian_vectors(2000, 16, 2);
    const auto ids = iota_ids(2000);
    const auto st = ivf_build(ids, vs, 16, Metric::kCosine, 4);
    for (const auto& q : gaussian_vectors(30, 16, 3)) {
        EXPECT_EQ(ivf_search(st, q, 10, 16).candidates, brute_force(ids, vs, q, 10, Metric::kCosine));
    }
}

TEST(IvfSearch, RecallAtTenAboveFloor) {
    const auto vs = gaussian_vectors(10000, 8, 11);
    const auto ids = iota_ids(10000);
    const auto st = ivf_build(ids, vs, 16, Metric::kL2, 12);
    std::size_t hit = 0, total = 0;
    for (const auto& q : gaussian_vectors(100, 8, 13)) {
        const auto truth = flat_search(ids, vs, q, 10, Metric::kL2);
        const auto got = ivf_search(st, q, 10, 4).candidates;
        for (const auto& t : truth) {
            ++total;
            hit += std::any_of(got.begin(), got.end(), [&](const auto& g) { return g.id == t.id; });
        }
    }
    EXPECT_GE(static_cast<double>(hit) / total, 0.8);
}

TEST(IvfSearch, NotTrained) {
    IvfState st;
    EXPECT_ERRC(ivf_search(st, Vector(4, 1.0), 3, 1), Errc::kNotTrained);
    ReferenceStore store(spec_of(IndexKind::kIvf, 4, 2));
    store.create_collection(4, Metric::kCosine);
    EXPECT_ERRC(store.search(Vector(4, 1.0), 3), Errc::kNotTrained);
}

TEST(HybridStore, ThresholdRebuild) {
    ReferenceStore store(spec_of(IndexKind::kHybridIvf, 4, 4, 100));
    store.create_collection(8, Metric::kCosine);
    const auto base = gaussian_vectors(200, 8, 1);
    store.insert(iota_ids(200), base);
    store.build_index();
    const auto extra = gaussian_vectors(100, 8, 2);
    const auto ids = iota_ids(100, 1000);
    for (std::size_t i = 0; i < 99; ++i) {
        const auto out = store.insert(std::span(&ids[i], 1), std::span(&extra[i], 1));
        ASSERT_EQ(out.rebuilds, 0u);
    }
    EXPECT_EQ(store.stats().buffer_size, 99u);
    const auto out = store.insert(std::span(&ids[99], 1), std::span(&extra[99], 1));
    EXPECT_EQ(out.rebuilds, 1u);
    EXPECT_EQ(store.stats().buffer_size, 0u);
    EXPECT_EQ(store.stats().rebuild_count, 1u);
    EXPECT_EQ(store.stats().live_vectors, 300u);
}

TEST(HybridStore, DuplicateId) {
    ReferenceStore store(spec_of(IndexKind::kHybridIvf, 2, 2));
    store.create_collection(4, Metric::kCosine);
    std::vector<ChunkId> ids{1};
    std::vector<Vector> v{{1, 0, 0, 0}};
    store.insert(ids, v);
    EXPECT_ERRC(store.insert(ids, v), Errc::kDuplicateId);
}

TEST(HybridStore, BufferedInsertRanksFirst) {
    ReferenceStore store(spec_of(IndexKind::kHybridIvf, 4, 1));
    store.create_collection(16, Metric::kCosine);
    store.insert(iota_ids(300), gaussian_vectors(300, 16, 1));
    store.build_index();
    const auto fresh = gaussian_vectors(1, 16, 77);
    std::vector<ChunkId> id{5000};
    store.insert(id, fresh);
    const auto r = store.search(fresh[0], 5);
    ASSERT_FALSE(r.candidates.empty());
    EXPECT_EQ(r.candidates[0].id, 5000u);
    EXPECT_EQ(r.candidates[0].score, 1.0);
}

TEST(IvfStore, QueuedInsertUnsearchableUntilRebuild) {
    ReferenceStore store(spec_of(IndexKind::kIvf, 4, 4, 10));
    store.create_collection(16, Metric::kCosine);
    store.insert(iota_ids(300), gaussian_vectors(300, 16, 1));
    store.build_index();
    const auto fresh = gaussian_vectors(10, 16, 77);
    const auto ids = iota_ids(10, 5000);
    for (std::size_t i = 0; i < 9; ++i) {
        store.insert(std::span(&ids[i], 1), std::span(&fresh[i], 1));
        const auto r = store.search(fresh[i], 10);
        for (const auto& c : r.candidates) ASSERT_NE(c.id, ids[i]);
        // The oracle still sees it.
        EXPECT_EQ(store.flat_search(fresh[i], 1)[0].id, ids[i]);
    }
    EXPECT_EQ(store.stats().pending_size, 9u);
    store.insert(std::span(&ids[9], 1), std::span(&fresh[9], 1));
    EXPECT_EQ(store.stats().pending_size, 0u);
    EXPECT_EQ(store.search(fresh[3], 1).candidates[0].id, ids[3]);
}

TEST(HybridStore, FullProbeEqualsFlatWithEmptyBuffer) {
    ReferenceStore store(spec_of(IndexKind::kHybridIvf, 8, 8));
    store.create_collection(16, Metric::kCosine);
    const auto vs = gaussian_vectors(1000, 16, 21);
    const auto ids = iota_ids(1000);
    store.insert(ids, vs);
    store.build_index();
    for (const auto& q : gaussian_vectors(20, 16, 22)) {
        EXPECT_EQ(store.search(q, 10).candidates, brute_force(ids, vs, q, 10, Metric::kCosine));
    }
}

TEST(HybridStore, ScannedVectorsGrowThenDropOnRebuild) {
    // Update stream: each step replaces one indexed vector with a new version.
    ReferenceStore store(spec_of(IndexKind::kHybridIvf, 4, 4, 20));
    store.create_collection(8, Metric::kCosine);
    store.insert(iota_ids(200), gaussian_vectors(200, 8, 1));
    store.build_index();
    const auto q = gaussian_vectors(1, 8, 99)[0];
    const auto extra = gaussian_vectors(60, 8, 2);
    const auto ids = iota_ids(60, 1000);
    store.search(q, 5);
    std::uint64_t prev = store.stats().scanned_vectors_last_search;
    EXPECT_EQ(prev, 200u);
    for (std::size_t i = 0; i < 60; ++i) {
        std::vector<ChunkId> old{static_cast<ChunkId>(1 + i)};
        store.remove(old);
        const auto buffered = store.stats().buffer_size;
        const auto out = store.insert(std::span(&ids[i], 1), std::span(&extra[i], 1));
        store.search(q, 5);
        const auto now = store.stats().scanned_vectors_last_search;
        if (out.rebuilds == 0) {
            EXPECT_GT(now, prev) << i;
        } else {
            EXPECT_LE(now + buffered, prev) << i;
        }
        prev = now;
    }
    EXPECT_EQ(store.stats().rebuild_count, 3u);
}

TEST(HybridStore, RemoveAndUnknown) {
    ReferenceStore store(spec_of(IndexKind::kHybridIvf, 2, 2));
    store.create_collection(8, Metric::kCosine);
    const auto vs = gaussian_vectors(50, 8, 1);
    store.insert(iota_ids(50), vs);
    store.build_index();
    std::vector<ChunkId> gone{3, 4, 5};
    store.remove(gone);
    EXPECT_EQ(store.stats().live_vectors, 47u);
    for (const auto& c : store.search(vs[3], 50).candidates) EXPECT_TRUE(c.id < 3 || c.id > 5);
    std::vector<ChunkId> unknown{999};
    EXPECT_ERRC(store.remove(unknown), Errc::kUnknownFileId);
}

TEST(HybridStore, SnapshotRoundTrip) {
    tsupport::TempDir dir;
    ReferenceStore store(spec_of(IndexKind::kHybridIvf, 4, 2, 50));
    store.create_collection(8, Metric::kCosine);
    store.insert(iota_ids(100), gaussian_vectors(100, 8, 1));
    store.build_index();
    const auto extra = gaussian_vectors(10, 8, 2);
    store.insert(iota_ids(10, 500), extra);
    std::vector<ChunkId> gone{7};
    store.remove(gone);
    store.save(dir.file("s.rgbs"));
    auto back = ReferenceStore::load(dir.file("s.rgbs"));
    EXPECT_EQ(back.live_ids(), store.live_ids());
    EXPECT_EQ(back.buffer_ids(), store.buffer_ids());
    EXPECT_EQ(back.tombstone_ids(), store.tombstone_ids());
    for (const auto& q : gaussian_vectors(10, 8, 3)) EXPECT_EQ(back.search(q, 7).candidates, store.search(q, 7).candidates);
}

TEST(LexicalRerank, OnlyMatchingCandidateFirst) {
    LexicalReranker rr;
    std::vector<pipeline::RerankInput> in{{1, "nothing here"}, {2, "the bridge collapsed"}};
    EXPECT_EQ(rr.rerank("bridge", in, 2), (std::vector<ChunkId>{2, 1}));
}

TEST(LexicalRerank, TiesKeepRetrievalOrder) {
    LexicalReranker rr;
    std::vector<pipeline::RerankInput> in{{5, "x"}, {3, "y"}, {9, "z"}};
    EXPECT_EQ(rr.rerank("q", in, 3), (std::vector<ChunkId>{5, 3, 9}));
}

TEST(LexicalRerank, HandComputedOverlap) {
    EXPECT_DOUBLE_EQ(LexicalReranker::overlap_score("blank built bridge", "a bridge was built"), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(LexicalReranker::overlap_score("blank built bridge", "a bridge"), 1.0 / 3.0);
    LexicalReranker rr;
    std::vector<pipeline::RerankInput> in{{1, "a bridge"}, {2, "a bridge was built"}, {3, "nothing"}};
    EXPECT_EQ(rr.rerank("blank built bridge", in, 3), (std::vector<ChunkId>{2, 1, 3}));
    EXPECT_EQ(rr.rerank("blank built bridge", in, 1), (std::vector<ChunkId>{2}));
}

TEST(TemplateGenerator, FrameAlignment) {
    TemplateGenerator g;
    pipeline::Prompt p;
    p.question = "Fill in the blank: built in ____.";
    p.contexts = {"built in 1942."};
    p.text = "Q: " + p.question + "\n" + p.contexts[0];
    const auto r = g.generate(p, 32);
    EXPECT_EQ(r.text, "1942");
    ASSERT_TRUE(r.ttft_ms.has_value());
    EXPECT_FALSE(r.tpot_ms.has_value());
}

TEST(TemplateGenerator, NoContextSentinel) {
    TemplateGenerator g;
    pipeline::Prompt p;
    p.question = "Fill in the blank: built in ____.";
    EXPECT_EQ(g.generate(p, 32).text, kNoContextAnswer);
}

TEST(TemplateGenerator, PicksBestSentenceAndIsDeterministic) {
    TemplateGenerator g;
    pipeline::Prompt p;
    p.question = "Fill in the blank: The Vell bridge was built in ____.";
    p.contexts = {"The river is wide. The Vell bridge was built in 1871. It is old.", "A tower was built in 1900."};
    const auto a = g.generate(p, 32);
    const auto b = g.generate(p, 32);
    EXPECT_EQ(a.text, "1871");
    EXPECT_EQ(a.text, b.text);
    EXPECT_EQ(a.ttft_ms, b.ttft_ms);
}
