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

#include "pipeline/pipeline.hpp"

#include <algorithm>
#include <mutex>

#include "common/clock.hpp"
#include "common/error.hpp"

namespace ragbench::pipeline {

namespace {

template <typename F>
auto staged(Stage stage, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        if (!e.stage().empty()) throw;
        throw Error(e.code(), std::string(stage_name(stage)) + ": " + e.what(), std::string(stage_name(stage)));
    }
}

std::size_t count_occurrences(std::string_view s, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string_view::npos; pos = s.find(needle, pos + needle.size())) ++n;
    return n;
}

}  // namespace

Prompt assemble_prompt(std::string_view question, std::span<const std::string> contexts, std::string_view tmpl) {
    constexpr std::string_view kQ = "{question}";
    constexpr std::string_view kC = "{contexts}";
    if (count_occurrences(tmpl, kQ) != 1 || count_occurrences(tmpl, kC) != 1) {
        fail(Errc::kBadTemplate, "prompt template must contain {question} and {contexts} exactly once");
    }
    std::string joined;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        if (i > 0) joined.append(kContextDelimiter);
        joined.append(contexts[i]);
    }
    const auto qpos = tmpl.find(kQ);
    const auto cpos = tmpl.find(kC);
    Prompt p;
    p.text.reserve(tmpl.size() + question.size() + joined.size());
    if (qpos < cpos) {
        p.text.append(tmpl.substr(0, qpos)).append(question);
        p.text.append(tmpl.substr(qpos + kQ.size(), cpos - qpos - kQ.size())).append(joined);
        p.text.append(tmpl.substr(cpos + kC.size()));
    } else {
        p.text.append(tmpl.substr(0, cpos)).append(joined);
        p.text.append(tmpl.substr(cpos + kC.size(), qpos - cpos - kC.size())).append(question);
        p.text.append(tmpl.substr(qpos + kQ.size()));
    }
    p.question = std::string(question);
    p.contexts.assign(contexts.begin(), contexts.end());
    return p;
}

void ChunkRegistry::add_file(const std::string& file_id, std::vector<Chunk> chunks) {
    std::unique_lock lk(mu_);
    if (current_.count(file_id) != 0) fail(Errc::kDuplicateId, "file already indexed: " + file_id);
    std::vector<ChunkId> ids;
    ids.reserve(chunks.size());
    for (auto& c : chunks) {
        ids.push_back(c.chunk_id);
        archive_.insert_or_assign(c.chunk_id, std::move(c));
    }
    current_.emplace(file_id, std::move(ids));
}

std::vector<ChunkId> ChunkRegistry::current_ids(const std::string& file_id) const {
    std::shared_lock lk(mu_);
    auto it = current_.find(file_id);
    if (it == current_.end()) fail(Errc::kUnknownFileId, "unknown file id " + file_id);
    return it->second;
}

Chunk ChunkRegistry::current_chunk(const std::string& file_id, std::uint32_t chunk_index) const {
    std::shared_lock lk(mu_);
    auto it = current_.find(file_id);
    if (it == current_.end()) fail(Errc::kUnknownFileId, "unknown file id " + file_id);
    if (chunk_index >= it->second.size()) fail(Errc::kUnknownFileId, "unknown chunk index in " + file_id);
    return archive_.at(it->second[chunk_index]);
}

void ChunkRegistry::replace(const std::string& file_id, std::uint32_t chunk_index, Chunk next) {
    std::unique_lock lk(mu_);
    auto it = current_.find(file_id);
    if (it == current_.end() || chunk_index >= it->second.size()) fail(Errc::kUnknownFileId, "unknown file id " + file_id);
    it->second[chunk_index] = next.chunk_id;
    archive_.insert_or_assign(next.chunk_id, std::move(next));
}

std::vector<ChunkId> ChunkRegistry::remove_file(const std::string& file_id) {
    std::unique_lock lk(mu_);
    auto it = current_.find(file_id);
    if (it == current_.end()) fail(Errc::kUnknownFileId, "unknown file id " + file_id);
    auto ids = std::move(it->second);
    current_.erase(it);
    return ids;
}

bool ChunkRegistry::has_file(const std::string& file_id) const {
    std::shared_lock lk(mu_);
    return current_.count(file_id) != 0;
}

std::optional<Chunk> ChunkRegistry::find(ChunkId id) const {
    std::shared_lock lk(mu_);
    auto it = archive_.find(id);
    if (it == archive_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> ChunkRegistry::retrieval_texts(std::span<const ChunkId> ids) const {
    std::shared_lock lk(mu_);
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (ChunkId id : ids) {
        auto it = archive_.find(id);
        out.push_back(it == archive_.end() ? std::string() : it->second.retrieval_text());
    }
    return out;
}

std::vector<std::string> ChunkRegistry::core_texts(std::span<const ChunkId> ids) const {
    std::shared_lock lk(mu_);
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (ChunkId id : ids) {
        auto it = archive_.find(id);
        out.push_back(it == archive_.end() ? std::string() : it->second.text);
    }
    return out;
}

std::size_t ChunkRegistry::live_chunk_count() const {
    std::shared_lock lk(mu_);
    std::size_t n = 0;
    for (const auto& [f, ids] : current_) n += ids.size();
    return n;
}

IndexStats index_corpus(const Corpus& corpus, const Chunker& chunker, Embedder& embedder, VectorStore& store,
                        std::size_t batch_size, ChunkRegistry* registry, std::optional<std::size_t> count) {
    if (batch_size == 0) fail(Errc::kInvalidArgument, "embedding batch size must be >= 1");
    if (embedder.dim() != store.dim()) {
        fail(Errc::kDimensionMismatch, "embedder dimension " + std::to_string(embedder.dim()) +
                                           " does not match collection dimension " + std::to_string(store.dim()));
    }
    const std::size_t n = std::min(count.value_or(corpus.size()), corpus.size());
    IndexStats stats;

    auto t0 = monotonic_ns();
    std::vector<Chunk> chunks;
    std::vector<std::pair<std::size_t, std::size_t>> file_ranges;
    staged(Stage::kChunk, [&] {
        for (std::size_t i = 0; i < n; ++i) {
            auto cs = chunker.chunk(corpus.documents[i], i);
            file_ranges.emplace_back(chunks.size(), chunks.size() + cs.size());
            for (auto& c : cs) chunks.push_back(std::move(c));
        }
    });
    stats.chunk_s = static_cast<double>(monotonic_ns() - t0) * 1e-9;
    stats.chunk_count = chunks.size();

    for (std::size_t b = 0; b < chunks.size(); b += batch_size) {
        const std::size_t e = std::min(b + batch_size, chunks.size());
        std::vector<std::string> texts;
        std::vector<ChunkId> ids;
        for (std::size_t i = b; i < e; ++i) {
            texts.push_back(chunks[i].retrieval_text());
            ids.push_back(chunks[i].chunk_id);
        }
        auto te = monotonic_ns();
        auto vectors = staged(Stage::kEmbed, [&] { return embedder.embed(texts); });
        auto ti = monotonic_ns();
        stats.embed_s += static_cast<double>(ti - te) * 1e-9;
        if (vectors.size() != ids.size()) fail(Errc::kInternal, "embedder returned wrong number of vectors");
        staged(Stage::kInsert, [&] { return store.insert(ids, vectors); });
        stats.insert_s += static_cast<double>(monotonic_ns() - ti) * 1e-9;
    }

    const auto caps = store.capabilities();
    if (!chunks.empty() && caps.build_index) {
        auto tb = monotonic_ns();
        staged(Stage::kBuildIndex, [&] { store.build_index(); });
        stats.build_s = static_cast<double>(monotonic_ns() - tb) * 1e-9;
    }
    if (caps.stats) {
        const auto ss = store.stats();
        stats.index_bytes = ss.index_bytes;
        stats.raw_vector_bytes = ss.raw_vector_bytes;
    }

    if (registry != nullptr) {
        for (std::size_t i = 0; i < n; ++i) {
            auto [b, e] = file_ranges[i];
            registry->add_file(corpus.documents[i].file_id,
                               std::vector<Chunk>(std::make_move_iterator(chunks.begin() + static_cast<std::ptrdiff_t>(b)),
                                                  std::make_move_iterator(chunks.begin() + static_cast<std::ptrdiff_t>(e))));
        }
    }
    return stats;
}

Pipeline::Pipeline(Components components, QuerySpec query_spec, const Corpus& corpus, std::size_t embed_batch_size,
                   std::size_t max_tokens)
    : components_(std::move(components)),
      query_spec_(std::move(query_spec)),
      corpus_(corpus),
      embed_batch_size_(embed_batch_size),
      max_tokens_(max_tokens) {
    validate(query_spec_);
    if (!components_.chunker || !components_.embedder || !components_.store || !components_.reranker ||
        !components_.generator) {
        fail(Errc::kInvalidArgument, "pipeline requires all five components");
    }
}

IndexStats Pipeline::index(std::optional<std::size_t> count) {
    return index_corpus(corpus_, *components_.chunker, *components_.embedder, *components_.store, embed_batch_size_,
                        &registry_, count);
}

std::size_t Pipeline::register_chunks(std::optional<std::size_t> count) {
    const std::size_t n = std::min(count.value_or(corpus_.size()), corpus_.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto cs = components_.chunker->chunk(corpus_.documents[i], i);
        total += cs.size();
        registry_.add_file(corpus_.documents[i].file_id, std::move(cs));
    }
    return total;
}

QueryOutcome Pipeline::handle_query(const workload::QAEntry& qa) {
    auto out = handle_query_batch(std::span<const workload::QAEntry>(&qa, 1));
    return std::move(out.front());
}

std::vector<QueryOutcome> Pipeline::handle_query_batch(std::span<const workload::QAEntry> batch) {
    const auto start = monotonic_ns();
    const auto bsz = static_cast<std::uint32_t>(batch.size());
    std::vector<QueryOutcome> outs(batch.size());
    if (batch.empty()) return outs;

    std::vector<std::string> questions;
    questions.reserve(batch.size());
    for (const auto& qa : batch) questions.push_back(qa.question);

    const auto t0 = monotonic_ns();
    auto qvecs = staged(Stage::kEmbed, [&] { return components_.embedder->embed(questions); });
    if (qvecs.size() != batch.size()) fail(Errc::kInternal, "embedder returned wrong number of vectors");
    const auto t1 = monotonic_ns();
    for (std::size_t i = 0; i < batch.size(); ++i) {
        auto res = staged(Stage::kRetrieve, [&] { return components_.store->search(qvecs[i], query_spec_.k); });
        outs[i].scanned_vectors = res.scanned_vectors;
        outs[i].retrieved_ids.reserve(res.candidates.size());
        for (const auto& c : res.candidates) outs[i].retrieved_ids.push_back(c.id);
    }
    const auto t2 = monotonic_ns();
    for (std::size_t i = 0; i < batch.size(); ++i) {
        staged(Stage::kRerank, [&] {
            const auto texts = registry_.retrieval_texts(outs[i].retrieved_ids);
            std::vector<RerankInput> inputs;
            inputs.reserve(texts.size());
            for (std::size_t j = 0; j < texts.size(); ++j) inputs.push_back({outs[i].retrieved_ids[j], texts[j]});
            outs[i].reranked_ids = components_.reranker->rerank(questions[i], inputs, query_spec_.rerank_out);
        });
    }
    const auto t3 = monotonic_ns();
    std::vector<Prompt> prompts;
    prompts.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        prompts.push_back(staged(Stage::kPrompt, [&] {
            const auto contexts = registry_.retrieval_texts(outs[i].reranked_ids);
            return assemble_prompt(questions[i], contexts, query_spec_.prompt_template);
        }));
    }
    const auto t4 = monotonic_ns();
    for (std::size_t i = 0; i < batch.size(); ++i) {
        auto gen = staged(Stage::kGenerate, [&] { return components_.generator->generate(prompts[i], max_tokens_); });
        outs[i].answer_text = std::move(gen.text);
        outs[i].ttft_ms = gen.ttft_ms;
        outs[i].tpot_ms = gen.tpot_ms;
    }
    const auto t5 = monotonic_ns();

    // The request ends with generation; the bookkeeping below is not part of it.
    const std::vector<StageTiming> timings = {
        {Stage::kEmbed, t0, t1, bsz},    {Stage::kRetrieve, t1, t2, bsz}, {Stage::kRerank, t2, t3, bsz},
        {Stage::kPrompt, t3, t4, bsz}, {Stage::kGenerate, t4, t5, bsz},
    };
    for (auto& o : outs) {
        o.timings = timings;
        o.start_ns = start;
        o.end_ns = t5;
    }
    return outs;
}

UpdateOutcome Pipeline::apply_update(const workload::Request& req) {
    using workload::OperationKind;
    UpdateOutcome out;
    out.start_ns = monotonic_ns();
    auto& store = *components_.store;
    switch (req.kind) {
        case OperationKind::kInsert: {
            if (!req.insert_file_id) fail(Errc::kInvalidArgument, "insert request without document id");
            const auto ordinal = corpus_.ordinal_of(*req.insert_file_id);
            if (!ordinal) fail(Errc::kUnknownFileId, "document not in corpus: " + *req.insert_file_id);
            const auto t0 = monotonic_ns();
            auto chunks = staged(Stage::kChunk, [&] { return components_.chunker->chunk(corpus_.documents[*ordinal], *ordinal); });
            const auto t1 = monotonic_ns();
            std::vector<std::string> texts;
            std::vector<ChunkId> ids;
            for (const auto& c : chunks) {
                texts.push_back(c.retrieval_text());
                ids.push_back(c.chunk_id);
            }
            auto vecs = staged(Stage::kEmbed, [&] { return components_.embedder->embed(texts); });
            const auto t2 = monotonic_ns();
            auto ins = staged(Stage::kInsert, [&] { return store.insert(ids, vecs); });
            const auto t3 = monotonic_ns();
            registry_.add_file(*req.insert_file_id, std::move(chunks));
            out.timings = {{Stage::kChunk, t0, t1, 1}, {Stage::kEmbed, t1, t2, 1}, {Stage::kInsert, t2, t3, 1}};
            out.rebuilds = ins.rebuilds;
            out.rebuild_ns = ins.rebuild_ns;
            break;
        }
        case OperationKind::kUpdate: {
            if (!req.target_file_id || !req.payload) fail(Errc::kInvalidArgument, "update request without target/payload");
            Chunk old = registry_.current_chunk(*req.target_file_id, req.chunk_index);
            if (old.chunk_id != req.replaced_chunk_id) {
                fail(Errc::kUnknownFileId, "update targets a chunk version that is not current");
            }
            Chunk next = old;
            next.chunk_id = req.new_chunk_id;
            next.version = static_cast<std::uint32_t>(chunk_version_of(req.new_chunk_id));
            next.text = *req.payload;
            const auto t0 = monotonic_ns();
            std::vector<std::string> texts{next.retrieval_text()};
            auto vecs = staged(Stage::kEmbed, [&] { return components_.embedder->embed(texts); });
            const auto t1 = monotonic_ns();
            const ChunkId old_id = old.chunk_id;
            staged(Stage::kRemove, [&] { store.remove(std::span<const ChunkId>(&old_id, 1)); });
            const auto t2 = monotonic_ns();
            const ChunkId new_id = next.chunk_id;
            auto ins = staged(Stage::kInsert, [&] { return store.insert(std::span<const ChunkId>(&new_id, 1), vecs); });
            const auto t3 = monotonic_ns();
            registry_.replace(*req.target_file_id, req.chunk_index, std::move(next));
            out.timings = {{Stage::kEmbed, t0, t1, 1}, {Stage::kRemove, t1, t2, 1}, {Stage::kInsert, t2, t3, 1}};
            out.rebuilds = ins.rebuilds;
            out.rebuild_ns = ins.rebuild_ns;
            break;
        }
        case OperationKind::kRemoval: {
            if (!req.target_file_id) fail(Errc::kInvalidArgument, "removal request without target");
            const auto ids = registry_.current_ids(*req.target_file_id);
            const auto t0 = monotonic_ns();
            staged(Stage::kRemove, [&] { store.remove(ids); });
            const auto t1 = monotonic_ns();
            registry_.remove_file(*req.target_file_id);
            out.timings = {{Stage::kRemove, t0, t1, 1}};
            break;
        }
        case OperationKind::kQuery: fail(Errc::kInvalidArgument, "apply_update called with a query request");
    }
    out.end_ns = monotonic_ns();
    return out;
}

}  // namespace ragbench::pipeline
