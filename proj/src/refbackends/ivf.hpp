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
#include <span>
#include <unordered_set>
#include <vector>

#include "pipeline/interfaces.hpp"

namespace ragbench::ref {

// Contiguous (id, vector, squared norm) rows.
class VectorList {
 public:
    VectorList() = default;
    explicit VectorList(std::size_t dim) : dim_(dim) {}

    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    std::size_t dim() const { return dim_; }

    void append(ChunkId id, std::span<const double> v);
    // Swap-remove; order inside a list carries no meaning.
    void remove_at(std::size_t i);
    void clear();

    ChunkId id(std::size_t i) const { return ids_[i]; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    double norm2(std::size_t i) const { return norms2_[i]; }
    const std::vector<ChunkId>& ids() const { return ids_; }
    std::size_t bytes() const { return ids_.size() * sizeof(ChunkId) + (data_.size() + norms2_.size()) * sizeof(double); }

 private:
    std::size_t dim_ = 0;
    std::vector<ChunkId> ids_;
    std::vector<double> data_;
    std::vector<double> norms2_;
};

// Bounded best-k collector using the (score desc, id asc) order.
class TopK {
 public:
    explicit TopK(std::size_t k) : k_(k) {}
    void push(const RetrievalCandidate& c);
    std::vector<RetrievalCandidate> take();

 private:
    std::size_t k_;
    std::vector<RetrievalCandidate> heap_;  // worst on top
};

struct IvfState {
    std::size_t dim = 0;
    Metric metric = Metric::kCosine;
    std::vector<Vector> centroids;
    std::vector<VectorList> lists;
    bool trained = false;

    std::size_t nlist() const { return centroids.size(); }
    std::size_t size() const;
};

struct KMeansParams {
    std::size_t max_iterations = 25;
    double tolerance = 1e-4;  // max centroid movement (L2) that counts as converged
};

// Seeded k-means++ followed by Lloyd iterations; nlist is clamped to the
// number of vectors. Under cosine the centroids are kept unit-norm.
IvfState ivf_build(std::span<const ChunkId> ids, std::span<const Vector> vectors, std::size_t nlist, Metric metric,
                   std::uint64_t seed, KMeansParams params = {});

// Scans the nprobe best centroids' lists. Tombstoned ids are counted as
// scanned but never returned.
pipeline::SearchResult ivf_search(const IvfState& state, const Vector& query, std::size_t k, std::size_t nprobe,
                        const std::unordered_set<ChunkId>* tombstones = nullptr);

// Indices of the nprobe closest centroids, best first.
std::vector<std::size_t> probe_order(const IvfState& state, const Vector& query, std::size_t nprobe);

// Exact scan of a list into a collector.
void scan_list(const VectorList& list, Metric metric, const Vector& query, double qq, TopK& top,
               const std::unordered_set<ChunkId>* tombstones = nullptr);

// Exact top-k over plain (id, vector) pairs.
std::vector<RetrievalCandidate> flat_search(std::span<const ChunkId> ids, std::span<const Vector> vectors,
                                            const Vector& query, std::size_t k, Metric metric);

}  // namespace ragbench::ref
