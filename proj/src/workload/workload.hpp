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

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "common/rng.hpp"
#include "pipeline/chunker.hpp"
#include "pipeline/corpus.hpp"
#include "workload/mutator.hpp"

namespace ragbench::workload {

enum class OperationKind : std::uint8_t { kQuery = 0, kInsert = 1, kUpdate = 2, kRemoval = 3 };

std::string_view operation_name(OperationKind k);
std::optional<OperationKind> parse_operation(std::string_view s);

struct OperationMix {
    double query = 1.0;
    double insert = 0.0;
    double update = 0.0;
    double removal = 0.0;

    double probability(OperationKind k) const;
};

// Throws InvalidMix.
void validate(const OperationMix& mix);

enum class AccessKind : std::uint8_t { kUniform, kZipfian };

struct AccessDistribution {
    AccessKind kind = AccessKind::kUniform;
    double exponent = 1.0;  // Zipfian only
    std::uint64_t rank_permutation_seed = 0;
};

struct ClosedLoop {
    std::uint32_t concurrency = 1;
};
struct OpenLoopFixed {
    double rate = 1.0;  // requests per second
};
struct OpenLoopPoisson {
    double rate = 1.0;
};
using Arrival = std::variant<ClosedLoop, OpenLoopFixed, OpenLoopPoisson>;

struct WorkloadSpec {
    OperationMix mix;
    AccessDistribution access;
    Arrival arrival = ClosedLoop{};
    std::optional<double> duration_s;
    std::optional<std::uint64_t> total_requests;
    std::uint64_t seed = 0;
    std::uint32_t query_batch_size = 1;
};

void validate(const WorkloadSpec& spec);

struct QAEntry {
    std::string question;
    std::string expected_answer;
    ChunkId target_chunk_id = 0;
    std::string target_file_id;
    std::uint32_t version = 0;  // 0 = question about unmodified data

    friend bool operator==(const QAEntry&, const QAEntry&) = default;
};

struct Request {
    OperationKind kind = OperationKind::kQuery;
    std::uint64_t sequence_no = 0;
    std::optional<std::string> target_file_id;  // absent for Insert
    std::optional<std::string> payload;         // Update: new chunk text; Insert: document body
    std::optional<QAEntry> qa;                  // Query
    std::optional<std::int64_t> scheduled_at_ns;  // open-loop only
    // Insert: the held-out document being ingested.
    std::optional<std::string> insert_file_id;
    // Update: which chunk is replaced and the id of its new version.
    std::uint32_t chunk_index = 0;
    ChunkId replaced_chunk_id = 0;
    ChunkId new_chunk_id = 0;
};

// Draws one operation kind by inverting the cumulative mix.
OperationKind sample_operation(Rng& rng, const OperationMix& mix);

// Picks targets from a changing population. Each id's Zipfian rank comes
// from a seeded hash of the id, so ranks are a seeded permutation that stays
// stable as ids join or leave.
class TargetSelector {
 public:
    explicit TargetSelector(AccessDistribution access);

    void add(const std::string& id);
    void remove(const std::string& id);
    bool contains(const std::string& id) const;
    std::size_t size() const { return ordered_.size(); }
    bool empty() const { return ordered_.empty(); }

    // Throws EmptyPopulation.
    const std::string& sample(Rng& rng);

    // Ids from rank 1 (hottest) downwards.
    std::vector<std::string> rank_order() const;
    // Analytic selection probability of a 1-based rank for the current size.
    double rank_probability(std::size_t rank) const;

 private:
    std::uint64_t key_of(const std::string& id) const;
    void grow_prefix(std::size_t n);

    AccessDistribution access_;
    std::vector<std::pair<std::uint64_t, std::string>> ordered_;
    std::vector<double> prefix_;  // prefix_[r-1] = sum_{i<=r} i^-exponent
};

std::string sample_target(Rng& rng, const AccessDistribution& access, std::span<const std::string> population);

// Builds the fill-in-the-blank question for a mutation. `mutated` is the new
// chunk version; the entry's version is the chunk's version.
QAEntry generate_question(const MutationResult& mutation, const Chunk& mutated);

// Append-only question store; only the newest entry per chunk position is
// eligible for selection.
class QuestionPool {
 public:
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<QAEntry>& entries() const { return entries_; }

    void append(QAEntry qa, std::uint32_t chunk_index);
    // Latest entry per chunk position of a file, ordered by chunk index.
    std::vector<const QAEntry*> latest_for_file(const std::string& file_id) const;
    bool has_questions(const std::string& file_id) const;

 private:
    std::vector<QAEntry> entries_;
    std::map<std::string, std::map<std::uint32_t, std::size_t>> latest_;
};

// Stateful request generator. Tracks file liveness, current chunk versions,
// and the question pool so that every emitted request is valid at its
// position in the stream.
class WorkloadGenerator {
 public:
    // The last `holdout` documents (by sorted id) are not indexed up front
    // and feed Insert requests in order.
    WorkloadGenerator(WorkloadSpec spec, const Corpus& corpus, const pipeline::Chunker& chunker,
                      std::size_t holdout = 0, std::shared_ptr<Mutator> mutator = nullptr);

    // Next request, or nullopt once total_requests is reached or an open-loop
    // schedule passes duration_s. Closed-loop duration runs never end here.
    std::optional<Request> next();

    // Constructs a request of the given kind. When `target` is absent the
    // target is drawn from the access distribution. Does not advance arrival
    // time or sequence numbers.
    Request build_request(OperationKind kind, std::optional<std::string> target = std::nullopt);

    const QuestionPool& pool() const { return pool_; }
    std::size_t initial_document_count() const { return initial_count_; }
    std::size_t live_file_count() const { return live_.size(); }
    bool is_live(const std::string& file_id) const { return live_.contains(file_id); }
    const TargetSelector& live_selector() const { return live_; }
    const WorkloadSpec& spec() const { return spec_; }

    // Current chunks of a live file (with versions applied).
    const std::vector<Chunk>& chunks_of(const std::string& file_id) const;

 private:
    struct FileState {
        std::size_t ordinal = 0;
        std::vector<Chunk> chunks;
    };

    void activate(std::size_t ordinal);
    Request make_query(std::optional<std::string> target);
    Request make_insert();
    Request make_update(std::optional<std::string> target);
    Request make_removal(std::optional<std::string> target);

    WorkloadSpec spec_;
    const Corpus& corpus_;
    const pipeline::Chunker& chunker_;
    std::shared_ptr<Mutator> mutator_;
    std::size_t initial_count_;
    std::size_t next_insert_;
    Rng rng_;
    Rng arrival_rng_;
    std::uint64_t emitted_ = 0;
    double clock_s_ = 0.0;
    std::map<std::string, FileState> files_;
    TargetSelector live_;
    TargetSelector queryable_;
    QuestionPool pool_;
};

// Materializes the whole stream. Closed-loop runs need total_requests.
std::vector<Request> generate_workload(const WorkloadSpec& spec, const Corpus& corpus,
                                       const pipeline::Chunker& chunker, std::size_t holdout = 0);

// One JSON line: {sequence_no, kind, target, scheduled_at_ms}.
std::string trace_line(const Request& r);

}  // namespace ragbench::workload
