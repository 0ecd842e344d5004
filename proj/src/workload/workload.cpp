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

#include "workload/workload.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/text.hpp"
#include "refbackends/template_generator.hpp"

namespace ragbench::workload {

std::string_view operation_name(OperationKind k) {
    switch (k) {
        case OperationKind::kQuery: return "query";
        case OperationKind::kInsert: return "insert";
        case OperationKind::kUpdate: return "update";
        case OperationKind::kRemoval: return "removal";
    }
    return "unknown";
}

std::optional<OperationKind> parse_operation(std::string_view s) {
    if (s == "query") return OperationKind::kQuery;
    if (s == "insert") return OperationKind::kInsert;
    if (s == "update") return OperationKind::kUpdate;
    if (s == "removal") return OperationKind::kRemoval;
    return std::nullopt;
}

double OperationMix::probability(OperationKind k) const {
    switch (k) {
        case OperationKind::kQuery: return query;
        case OperationKind::kInsert: return insert;
        case OperationKind::kUpdate: return update;
        case OperationKind::kRemoval: return removal;
    }
    return 0.0;
}

void validate(const OperationMix& mix) {
    const double p[] = {mix.query, mix.insert, mix.update, mix.removal};
    double sum = 0.0;
    for (double x : p) {
        if (!std::isfinite(x) || x < 0.0 || x > 1.0) fail(Errc::kInvalidMix, "operation probabilities must lie in [0, 1]");
        sum += x;
    }
    if (std::fabs(sum - 1.0) > 1e-9) {
        fail(Errc::kInvalidMix, "operation probabilities sum to " + std::to_string(sum) + ", expected 1");
    }
}

void validate(const WorkloadSpec& spec) {
    validate(spec.mix);
    if (spec.duration_s.has_value() == spec.total_requests.has_value()) {
        fail(Errc::kInvalidArgument, "exactly one of duration_s and total_requests must be set");
    }
    if (spec.duration_s && !(*spec.duration_s > 0.0)) fail(Errc::kInvalidArgument, "duration_s must be > 0");
    if (spec.access.kind == AccessKind::kZipfian && !(spec.access.exponent >= 0.0)) {
        fail(Errc::kInvalidArgument, "zipfian exponent must be >= 0");
    }
    if (spec.query_batch_size < 1) fail(Errc::kInvalidArgument, "batch_size must be >= 1");
    std::visit(
        [](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, ClosedLoop>) {
                if (a.concurrency < 1) fail(Errc::kInvalidArgument, "closed-loop concurrency must be >= 1");
            } else {
                if (!(a.rate > 0.0)) fail(Errc::kInvalidArgument, "open-loop rate must be > 0");
            }
        },
        spec.arrival);
}

OperationKind sample_operation(Rng& rng, const OperationMix& mix) {
    validate(mix);
    constexpr OperationKind kOrder[] = {OperationKind::kQuery, OperationKind::kInsert, OperationKind::kUpdate,
                                        OperationKind::kRemoval};
    const double u = rng.uniform();
    double acc = 0.0;
    OperationKind last_nonzero = OperationKind::kQuery;
    for (OperationKind k : kOrder) {
        const double p = mix.probability(k);
        if (p <= 0.0) continue;
        last_nonzero = k;
        acc += p;
        if (u < acc) return k;
    }
    return last_nonzero;
}

TargetSelector::TargetSelector(AccessDistribution access) : access_(access) {}

std::uint64_t TargetSelector::key_of(const std::string& id) const {
    return seeded_hash64(id, access_.rank_permutation_seed);
}

void TargetSelector::add(const std::string& id) {
    std::pair<std::uint64_t, std::string> entry{key_of(id), id};
    auto it = std::lower_bound(ordered_.begin(), ordered_.end(), entry);
    if (it != ordered_.end() && *it == entry) return;
    ordered_.insert(it, std::move(entry));
}

void TargetSelector::remove(const std::string& id) {
    std::pair<std::uint64_t, std::string> entry{key_of(id), id};
    auto it = std::lower_bound(ordered_.begin(), ordered_.end(), entry);
    if (it != ordered_.end() && *it == entry) ordered_.erase(it);
}

bool TargetSelector::contains(const std::string& id) const {
    std::pair<std::uint64_t, std::string> entry{key_of(id), id};
    return std::binary_search(ordered_.begin(), ordered_.end(), entry);
}

void TargetSelector::grow_prefix(std::size_t n) {
    while (prefix_.size() < n) {
        const double r = static_cast<double>(prefix_.size() + 1);
        const double prev = prefix_.empty() ? 0.0 : prefix_.back();
        prefix_.push_back(prev + std::pow(r, -access_.exponent));
    }
}

const std::string& TargetSelector::sample(Rng& rng) {
    if (ordered_.empty()) fail(Errc::kEmptyPopulation, "no target available");
    const std::size_t n = ordered_.size();
    if (access_.kind == AccessKind::kUniform) return ordered_[static_cast<std::size_t>(rng.below(n))].second;
    grow_prefix(n);
    const double u = rng.uniform() * prefix_[n - 1];
    auto it = std::upper_bound(prefix_.begin(), prefix_.begin() + static_cast<std::ptrdiff_t>(n), u);
    const auto idx = std::min(static_cast<std::size_t>(it - prefix_.begin()), n - 1);
    return ordered_[idx].second;
}

std::vector<std::string> TargetSelector::rank_order() const {
    std::vector<std::string> out;
    out.reserve(ordered_.size());
    for (const auto& [k, id] : ordered_) out.push_back(id);
    return out;
}

double TargetSelector::rank_probability(std::size_t rank) const {
    const std::size_t n = ordered_.size();
    if (rank < 1 || rank > n) return 0.0;
    if (access_.kind == AccessKind::kUniform) return 1.0 / static_cast<double>(n);
    double norm = 0.0;
    for (std::size_t i = 1; i <= n; ++i) norm += std::pow(static_cast<double>(i), -access_.exponent);
    return std::pow(static_cast<double>(rank), -access_.exponent) / norm;
}

std::string sample_target(Rng& rng, const AccessDistribution& access, std::span<const std::string> population) {
    if (population.empty()) fail(Errc::kEmptyPopulation, "empty population");
    TargetSelector sel(access);
    for (const auto& id : population) sel.add(id);
    return sel.sample(rng);
}

QAEntry generate_question(const MutationResult& mutation, const Chunk& mutated) {
    const std::string_view body(mutated.text);
    const std::size_t b = mutation.span_begin;
    const std::size_t e = b + mutation.replacement_token.size();
    if (e > body.size() || body.substr(b, e - b) != mutation.replacement_token) {
        fail(Errc::kInvalidArgument, "mutation does not match chunk text");
    }
    text::TokenSpan sentence{0, body.size()};
    for (const auto& s : text::sentence_spans(body)) {
        if (s.begin <= b && e <= s.end) {
            sentence = s;
            break;
        }
    }
    QAEntry qa;
    qa.question.reserve(ref::kQuestionPrefix.size() + sentence.end - sentence.begin);
    qa.question.append(ref::kQuestionPrefix);
    qa.question.append(body.substr(sentence.begin, b - sentence.begin));
    qa.question.append(ref::kBlankMarker);
    qa.question.append(body.substr(e, sentence.end - e));
    qa.expected_answer = mutation.replacement_token;
    qa.target_chunk_id = mutated.chunk_id;
    qa.target_file_id = mutated.file_id;
    qa.version = mutated.version;
    return qa;
}

void QuestionPool::append(QAEntry qa, std::uint32_t chunk_index) {
    latest_[qa.target_file_id][chunk_index] = entries_.size();
    entries_.push_back(std::move(qa));
}

std::vector<const QAEntry*> QuestionPool::latest_for_file(const std::string& file_id) const {
    std::vector<const QAEntry*> out;
    auto it = latest_.find(file_id);
    if (it == latest_.end()) return out;
    for (const auto& [idx, pos] : it->second) out.push_back(&entries_[pos]);
    return out;
}

bool QuestionPool::has_questions(const std::string& file_id) const {
    auto it = latest_.find(file_id);
    return it != latest_.end() && !it->second.empty();
}

WorkloadGenerator::WorkloadGenerator(WorkloadSpec spec, const Corpus& corpus, const pipeline::Chunker& chunker,
                                     std::size_t holdout, std::shared_ptr<Mutator> mutator)
    : spec_(std::move(spec)),
      corpus_(corpus),
      chunker_(chunker),
      mutator_(mutator ? std::move(mutator) : std::make_shared<ReferenceMutator>()),
      initial_count_(0),
      next_insert_(0),
      rng_(spec_.seed),
      arrival_rng_(splitmix64(spec_.seed ^ 0xa55a5aa5a55a5aa5ULL)),
      live_(spec_.access),
      queryable_(spec_.access) {
    validate(spec_);
    if (holdout > corpus_.size()) fail(Errc::kInvalidArgument, "holdout exceeds corpus size");
    initial_count_ = corpus_.size() - holdout;
    next_insert_ = initial_count_;
    for (std::size_t i = 0; i < initial_count_; ++i) activate(i);
}

void WorkloadGenerator::activate(std::size_t ordinal) {
    const Document& doc = corpus_.documents[ordinal];
    FileState fs{ordinal, chunker_.chunk(doc, ordinal)};
    for (const auto& c : fs.chunks) {
        const auto tok = select_mutable_token(c.text);
        if (!tok) continue;
        // Baseline question about the unmodified chunk: the identity mutation.
        MutationResult identity;
        identity.mutated_text = c.text;
        identity.span_begin = tok->begin;
        identity.span_end = tok->end;
        identity.original_token = c.text.substr(tok->begin, tok->end - tok->begin);
        identity.replacement_token = identity.original_token;
        pool_.append(generate_question(identity, c), static_cast<std::uint32_t>(chunk_index_of(c.chunk_id)));
    }
    live_.add(doc.file_id);
    if (pool_.has_questions(doc.file_id)) queryable_.add(doc.file_id);
    files_.emplace(doc.file_id, std::move(fs));
}

const std::vector<Chunk>& WorkloadGenerator::chunks_of(const std::string& file_id) const {
    auto it = files_.find(file_id);
    if (it == files_.end()) fail(Errc::kUnknownFileId, "unknown or removed file " + file_id);
    return it->second.chunks;
}

std::optional<Request> WorkloadGenerator::next() {
    if (spec_.total_requests && emitted_ >= *spec_.total_requests) return std::nullopt;
    std::optional<std::int64_t> scheduled;
    if (const auto* fixed = std::get_if<OpenLoopFixed>(&spec_.arrival)) {
        clock_s_ = static_cast<double>(emitted_) / fixed->rate;
    }
    if (!std::holds_alternative<ClosedLoop>(spec_.arrival)) {
        if (spec_.duration_s && clock_s_ >= *spec_.duration_s) return std::nullopt;
        scheduled = std::llround(clock_s_ * 1e9);
    }
    Request r = build_request(sample_operation(rng_, spec_.mix));
    r.sequence_no = emitted_++;
    r.scheduled_at_ns = scheduled;
    if (const auto* poisson = std::get_if<OpenLoopPoisson>(&spec_.arrival)) {
        clock_s_ += arrival_rng_.exponential(1.0 / poisson->rate);
    }
    return r;
}

Request WorkloadGenerator::build_request(OperationKind kind, std::optional<std::string> target) {
    switch (kind) {
        case OperationKind::kQuery: return make_query(std::move(target));
        case OperationKind::kInsert: return make_insert();
        case OperationKind::kUpdate: return make_update(std::move(target));
        case OperationKind::kRemoval: return make_removal(std::move(target));
    }
    fail(Errc::kInvalidArgument, "unknown operation kind");
}

Request WorkloadGenerator::make_query(std::optional<std::string> target) {
    if (queryable_.empty()) fail(Errc::kEmptyQuestionPool, "question pool has no eligible entries");
    std::string file;
    if (target) {
        if (!live_.contains(*target)) fail(Errc::kUnknownFileId, "unknown or removed file " + *target);
        if (!queryable_.contains(*target)) fail(Errc::kEmptyQuestionPool, "no questions for file " + *target);
        file = *target;
    } else {
        file = queryable_.sample(rng_);
    }
    const auto candidates = pool_.latest_for_file(file);
    const QAEntry* qa = candidates[static_cast<std::size_t>(rng_.below(candidates.size()))];
    Request r;
    r.kind = OperationKind::kQuery;
    r.target_file_id = file;
    r.qa = *qa;
    return r;
}

Request WorkloadGenerator::make_insert() {
    if (next_insert_ >= corpus_.size()) fail(Errc::kExhaustedCorpus, "no unseen documents left for insert");
    const std::size_t ordinal = next_insert_++;
    activate(ordinal);
    const Document& doc = corpus_.documents[ordinal];
    Request r;
    r.kind = OperationKind::kInsert;
    r.insert_file_id = doc.file_id;
    r.payload = doc.body;
    return r;
}

Request WorkloadGenerator::make_update(std::optional<std::string> target) {
    if (live_.empty()) fail(Errc::kEmptyPopulation, "no live files to update");
    if (target && !live_.contains(*target)) fail(Errc::kUnknownFileId, "unknown or removed file " + *target);
    constexpr int kMaxFileAttempts = 16;
    for (int attempt = 0; attempt < kMaxFileAttempts; ++attempt) {
        const std::string file = target ? *target : live_.sample(rng_);
        FileState& fs = files_.at(file);
        std::vector<std::size_t> order(fs.chunks.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng_.below(i))]);
        }
        for (std::size_t idx : order) {
            Chunk& current = fs.chunks[idx];
            MutationResult m;
            try {
                m = mutator_->mutate(current.text, rng_);
            } catch (const Error& e) {
                if (e.code() == Errc::kNoMutableToken) continue;
                throw;
            }
            Chunk next = current;
            next.version = current.version + 1;
            next.chunk_id = make_chunk_id(fs.ordinal, chunk_index_of(current.chunk_id), next.version);
            next.text = m.mutated_text;
            QAEntry qa = generate_question(m, next);

            Request r;
            r.kind = OperationKind::kUpdate;
            r.target_file_id = file;
            r.payload = next.text;
            r.chunk_index = static_cast<std::uint32_t>(idx);
            r.replaced_chunk_id = current.chunk_id;
            r.new_chunk_id = next.chunk_id;

            pool_.append(std::move(qa), static_cast<std::uint32_t>(chunk_index_of(next.chunk_id)));
            queryable_.add(file);
            current = std::move(next);
            return r;
        }
        if (target) break;
    }
    fail(Errc::kNoMutableToken, "no mutable chunk found for update");
}

Request WorkloadGenerator::make_removal(std::optional<std::string> target) {
    std::string file;
    if (target) {
        if (!live_.contains(*target)) fail(Errc::kUnknownFileId, "unknown or removed file " + *target);
        file = *target;
    } else {
        file = live_.sample(rng_);
    }
    live_.remove(file);
    queryable_.remove(file);
    files_.erase(file);
    Request r;
    r.kind = OperationKind::kRemoval;
    r.target_file_id = file;
    return r;
}

std::vector<Request> generate_workload(const WorkloadSpec& spec, const Corpus& corpus,
                                       const pipeline::Chunker& chunker, std::size_t holdout) {
    if (std::holds_alternative<ClosedLoop>(spec.arrival) && !spec.total_requests) {
        fail(Errc::kInvalidArgument, "closed-loop streams can only be materialized with total_requests");
    }
    WorkloadGenerator gen(spec, corpus, chunker, holdout);
    std::vector<Request> out;
    while (auto r = gen.next()) out.push_back(std::move(*r));
    return out;
}

std::string trace_line(const Request& r) {
    nlohmann::ordered_json j;
    j["sequence_no"] = r.sequence_no;
    j["kind"] = operation_name(r.kind);
    if (r.target_file_id) {
        j["target"] = *r.target_file_id;
    } else if (r.insert_file_id) {
        j["target"] = *r.insert_file_id;
    } else {
        j["target"] = nullptr;
    }
    if (r.scheduled_at_ns) {
        j["scheduled_at_ms"] = static_cast<double>(*r.scheduled_at_ns) / 1e6;
    } else {
        j["scheduled_at_ms"] = nullptr;
    }
    return j.dump();
}

}  // namespace ragbench::workload
