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

#include <atomic>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "pipeline/interfaces.hpp"
#include "refbackends/ivf.hpp"

namespace ragbench::ref {

// In-process store implementing the three reference index kinds:
//   flat        every vector is scanned exactly; no rebuilds.
//   ivf         inserts after the build are queued and unsearchable until
//               the queue reaches buffer_threshold and triggers a rebuild.
//   hybrid_ivf  inserts after the build go to a flat buffer that is scanned
//               on every search; reaching buffer_threshold merges it into a
//               retrained IVF index.
// Removals from the IVF main index are tombstones filtered at search time
// and purged at the next rebuild. Until the first build_index() the store is
// in bulk-load mode and the threshold is not enforced.
class ReferenceStore final : public pipeline::VectorStore {
 public:
    explicit ReferenceStore(IndexSpec spec);

    void create_collection(std::size_t dim, Metric metric) override;
    std::size_t dim() const override { return dim_; }
    pipeline::StoreInsertOutcome insert(std::span<const ChunkId> ids, std::span<const Vector> vectors) override;
    void remove(std::span<const ChunkId> ids) override;
    pipeline::SearchResult search(const Vector& query, std::size_t k) override;
    void build_index() override;
    pipeline::StoreStats stats() const override;

    pipeline::SearchResult search(const Vector& query, std::size_t k, std::size_t nprobe);

    // Exact scan over every live vector the store holds, including queued
    // (unsearchable) inserts. This is the recall oracle.
    std::vector<RetrievalCandidate> flat_search(const Vector& query, std::size_t k) const;

    const IndexSpec& spec() const { return spec_; }
    Metric metric() const { return spec_.metric; }
    bool trained() const;
    bool contains(ChunkId id) const;
    // Ids by location, each sorted ascending.
    std::vector<ChunkId> main_ids() const;
    std::vector<ChunkId> buffer_ids() const;
    std::vector<ChunkId> pending_ids() const;
    std::vector<ChunkId> tombstone_ids() const;
    std::vector<ChunkId> live_ids() const;

    void save(const std::string& path) const;
    static ReferenceStore load(const std::string& path);

    ReferenceStore(ReferenceStore&& other) noexcept;

 private:
    enum class Where : std::uint8_t { kMain, kBuffer, kPending };
    struct Loc {
        Where where;
        std::uint32_t list;
    };

    struct State {
        IvfState main;
        VectorList buffer;
        VectorList pending;
        std::unordered_set<ChunkId> tombstones;
        std::unordered_map<ChunkId, Loc> where;  // live ids only
    };

    pipeline::SearchResult search_locked(const Vector& query, std::size_t k, std::size_t nprobe) const;
    // Caller holds write_mu_.
    std::int64_t rebuild();
    void remove_from_list(VectorList& list, ChunkId id);
    void check_dim(const Vector& v) const;
    VectorList& staging_list();

    IndexSpec spec_;
    std::size_t dim_ = 0;
    std::mutex write_mu_;
    mutable std::shared_mutex state_mu_;
    State state_;
    std::uint64_t rebuild_count_ = 0;
    mutable std::atomic<std::uint64_t> last_scanned_{0};
};

}  // namespace ragbench::ref
