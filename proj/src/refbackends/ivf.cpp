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

#include "refbackends/ivf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "refbackends/vector_math.hpp"

namespace ragbench::ref {

void VectorList::append(ChunkId id, std::span<const double> v) {
    ids_.push_back(id);
    data_.insert(data_.end(), v.begin(), v.end());
    norms2_.push_back(dot(v, v));
}

void VectorList::remove_at(std::size_t i) {
    const std::size_t last = ids_.size() - 1;
    if (i != last) {
        ids_[i] = ids_[last];
        norms2_[i] = norms2_[last];
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(last * dim_), dim_,
                    data_.begin() + static_cast<std::ptrdiff_t>(i * dim_));
    }
    ids_.pop_back();
    norms2_.pop_back();
    data_.resize(last * dim_);
}

void VectorList::clear() {
    ids_.clear();
    data_.clear();
    norms2_.clear();
}

void TopK::push(const RetrievalCandidate& c) {
    if (k_ == 0) return;
    if (heap_.size() < k_) {
        heap_.push_back(c);
        std::push_heap(heap_.begin(), heap_.end(), ranks_before);
        return;
    }
    if (ranks_before(c, heap_.front())) {
        std::pop_heap(heap_.begin(), heap_.end(), ranks_before);
        heap_.back() = c;
        std::push_heap(heap_.begin(), heap_.end(), ranks_before);
    }
}

std::vector<RetrievalCandidate> TopK::take() {
    std::sort(heap_.begin(), heap_.end(), ranks_before);
    return std::move(heap_);
}

std::size_t IvfState::size() const {
    std::size_t n = 0;
    for (const auto& l : lists) n += l.size();
    return n;
}

namespace {

Vector normalized(const Vector& v) {
    const double n2 = dot(v, v);
    if (n2 <= 0.0) return v;
    Vector out(v);
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : out) x *= inv;
    return out;
}

std::size_t nearest_centroid(const std::vector<Vector>& centroids, std::span<const double> x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_l2(x, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

}  // namespace

IvfState ivf_build(std::span<const ChunkId> ids, std::span<const Vector> vectors, std::size_t nlist, Metric metric,
                   std::uint64_t seed, KMeansParams params) {
    if (ids.size() != vectors.size()) fail(Errc::kInvalidArgument, "ivf_build: ids/vectors length mismatch");
    if (vectors.empty()) fail(Errc::kInvalidArgument, "ivf_build: no vectors");
    if (nlist == 0) fail(Errc::kInvalidArgument, "ivf_build: nlist must be >= 1");
    const std::size_t n = vectors.size();
    const std::size_t dim = vectors[0].size();
    const std::size_t k = std::min(nlist, n);

    // Under cosine the clustering runs on unit vectors, where squared L2 and
    // negated cosine give the same nearest centroid.
    std::vector<Vector> points;
    points.reserve(n);
    for (const auto& v : vectors) {
        if (v.size() != dim) fail(Errc::kDimensionMismatch, "ivf_build: inconsistent vector dimensions");
        points.push_back(metric == Metric::kCosine ? normalized(v) : v);
    }

    Rng rng(seed);
    std::vector<Vector> centroids;
    centroids.reserve(k);
    std::vector<bool> chosen(n, false);
    std::size_t first = static_cast<std::size_t>(rng.below(n));
    centroids.push_back(points[first]);
    chosen[first] = true;
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_l2(points[i], centroids[0]);
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
        std::size_t pick = n;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i]) continue;
                target -= d2[i];
                if (target < 0.0) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {
                for (std::size_t i = n; i-- > 0;) {
                    if (!chosen[i] && d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        }
        if (pick == n) {
            // All remaining points coincide with a centroid.
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            }
        }
        chosen[pick] = true;
        centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_l2(points[i], centroids.back()));
    }

    std::vector<std::size_t> assign(n, 0);
    for (std::size_t iter = 0; iter < params.max_iterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i) assign[i] = nearest_centroid(centroids, points[i]);
        std::vector<Vector> sums(k, Vector(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& s = sums[assign[i]];
            for (std::size_t d = 0; d < dim; ++d) s[d] += points[i][d];
            ++counts[assign[i]];
        }
        double movement = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            Vector next = std::move(sums[c]);
            const double inv = 1.0 / static_cast<double>(counts[c]);
            for (double& x : next) x *= inv;
            if (metric == Metric::kCosine) {
                if (dot(next, next) <= 0.0) continue;
                next = normalized(next);
            }
            movement = std::max(movement, std::sqrt(squared_l2(next, centroids[c])));
            centroids[c] = std::move(next);
        }
        if (movement < params.tolerance) break;
    }

    IvfState state;
    state.dim = dim;
    state.metric = metric;
    state.lists.assign(k, VectorList(dim));
    for (std::size_t i = 0; i < n; ++i) {
        state.lists[nearest_centroid(centroids, points[i])].append(ids[i], vectors[i]);
    }
    state.centroids = std::move(centroids);
    state.trained = true;
    return state;
}

std::vector<std::size_t> probe_order(const IvfState& state, const Vector& query, std::size_t nprobe) {
    const Vector q = state.metric == Metric::kCosine ? normalized(query) : query;
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(state.centroids.size());
    for (std::size_t c = 0; c < state.centroids.size(); ++c) {
        scored.emplace_back(squared_l2(q, state.centroids[c]), c);
    }
    const std::size_t m = std::min(nprobe, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(m), scored.end());
    std::vector<std::size_t> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) out.push_back(scored[i].second);
    return out;
}

void scan_list(const VectorList& list, Metric metric, const Vector& query, double qq, TopK& top,
               const std::unordered_set<ChunkId>* tombstones) {
    const bool filter = tombstones != nullptr && !tombstones->empty();
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (filter && tombstones->count(list.id(i)) != 0) continue;
        top.push({list.id(i), similarity(metric, query, qq, list.row(i), list.norm2(i))});
    }
}

pipeline::SearchResult ivf_search(const IvfState& state, const Vector& query, std::size_t k, std::size_t nprobe,
                        const std::unordered_set<ChunkId>* tombstones) {
    if (!state.trained) fail(Errc::kNotTrained, "ivf index has not been built");
    if (query.size() != state.dim) fail(Errc::kDimensionMismatch, "query dimension does not match index");
    const double qq = dot(query, query);
    TopK top(k);
    pipeline::SearchResult result;
    for (std::size_t c : probe_order(state, query, nprobe)) {
        scan_list(state.lists[c], state.metric, query, qq, top, tombstones);
        result.scanned_vectors += state.lists[c].size();
    }
    result.candidates = top.take();
    return result;
}

std::vector<RetrievalCandidate> flat_search(std::span<const ChunkId> ids, std::span<const Vector> vectors,
                                            const Vector& query, std::size_t k, Metric metric) {
    const double qq = dot(query, query);
    TopK top(k);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        top.push({ids[i], similarity(metric, query, qq, vectors[i], dot(vectors[i], vectors[i]))});
    }
    return top.take();
}

}  // namespace ragbench::ref
