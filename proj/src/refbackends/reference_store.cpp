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

#include "refbackends/reference_store.hpp"

#include <algorithm>
#include <fstream>

#include "common/binio.hpp"
#include "common/clock.hpp"
#include "common/error.hpp"
#include "refbackends/vector_math.hpp"

namespace ragbench::ref {

namespace {
constexpr char kSnapshotMagic[4] = {'R', 'G', 'B', 'S'};
constexpr std::uint16_t kSnapshotVersion = 1;
}  // namespace

ReferenceStore::ReferenceStore(IndexSpec spec) : spec_(spec) { validate(spec_); }

ReferenceStore::ReferenceStore(ReferenceStore&& other) noexcept
    : spec_(other.spec_),
      dim_(other.dim_),
      state_(std::move(other.state_)),
      rebuild_count_(other.rebuild_count_),
      last_scanned_(other.last_scanned_.load()) {}

void ReferenceStore::create_collection(std::size_t dim, Metric metric) {
    if (dim == 0) fail(Errc::kInvalidArgument, "collection dimension must be > 0");
    std::scoped_lock wl(write_mu_);
    std::unique_lock sl(state_mu_);
    dim_ = dim;
    spec_.metric = metric;
    state_ = State{};
    state_.main.dim = dim;
    state_.main.metric = metric;
    state_.buffer = VectorList(dim);
    state_.pending = VectorList(dim);
    if (spec_.kind == IndexKind::kFlat) {
        state_.main.lists.assign(1, VectorList(dim));
        state_.main.trained = true;
    }
    rebuild_count_ = 0;
}

void ReferenceStore::check_dim(const Vector& v) const {
    if (dim_ == 0) fail(Errc::kInvalidArgument, "collection not created");
    if (v.size() != dim_) {
        fail(Errc::kDimensionMismatch,
             "vector dimension " + std::to_string(v.size()) + " does not match collection dimension " + std::to_string(dim_));
    }
}

bool ReferenceStore::trained() const {
    std::shared_lock sl(state_mu_);
    return state_.main.trained;
}

bool ReferenceStore::contains(ChunkId id) const {
    std::shared_lock sl(state_mu_);
    return state_.where.count(id) != 0;
}

VectorList& ReferenceStore::staging_list() {
    switch (spec_.kind) {
        case IndexKind::kFlat: return state_.main.lists[0];
        case IndexKind::kIvf: return state_.pending;
        case IndexKind::kHybridIvf: return state_.buffer;
    }
    return state_.buffer;
}

pipeline::StoreInsertOutcome ReferenceStore::insert(std::span<const ChunkId> ids, std::span<const Vector> vectors) {
    if (ids.size() != vectors.size()) fail(Errc::kInvalidArgument, "insert: ids/vectors length mismatch");
    std::scoped_lock wl(write_mu_);
    for (const auto& v : vectors) check_dim(v);
    {
        std::unordered_set<ChunkId> batch;
        for (ChunkId id : ids) {
            if (!batch.insert(id).second || state_.where.count(id) != 0) {
                fail(Errc::kDuplicateId, "chunk id " + std::to_string(id) + " already present");
            }
        }
    }
    pipeline::StoreInsertOutcome outcome;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        bool rebuild_due = false;
        {
            std::unique_lock sl(state_mu_);
            if (state_.tombstones.erase(ids[i]) != 0) {
                for (auto& list : state_.main.lists) remove_from_list(list, ids[i]);
            }
            VectorList& target = staging_list();
            target.append(ids[i], vectors[i]);
            const Where where = spec_.kind == IndexKind::kFlat ? Where::kMain
                                : spec_.kind == IndexKind::kIvf ? Where::kPending
                                                                 : Where::kBuffer;
            state_.where[ids[i]] = Loc{where, 0};
            rebuild_due = spec_.kind != IndexKind::kFlat && state_.main.trained && target.size() >= spec_.buffer_threshold;
        }
        if (rebuild_due) {
            outcome.rebuild_ns += rebuild();
            ++outcome.rebuilds;
            ++rebuild_count_;
        }
    }
    return outcome;
}

void ReferenceStore::remove_from_list(VectorList& list, ChunkId id) {
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (list.id(i) == id) {
            list.remove_at(i);
            return;
        }
    }
}

void ReferenceStore::remove(std::span<const ChunkId> ids) {
    std::scoped_lock wl(write_mu_);
    std::unique_lock sl(state_mu_);
    for (ChunkId id : ids) {
        if (state_.where.count(id) == 0) fail(Errc::kUnknownFileId, "unknown chunk id " + std::to_string(id));
    }
    for (ChunkId id : ids) {
        auto it = state_.where.find(id);
        if (it == state_.where.end()) continue;  // repeated id in the batch
        const Loc loc = it->second;
        state_.where.erase(it);
        switch (loc.where) {
            case Where::kMain:
                if (spec_.kind == IndexKind::kFlat) {
                    remove_from_list(state_.main.lists[0], id);
                } else {
                    state_.tombstones.insert(id);
                }
                break;
            case Where::kBuffer: remove_from_list(state_.buffer, id); break;
            case Where::kPending: remove_from_list(state_.pending, id); break;
        }
    }
}

std::int64_t ReferenceStore::rebuild() {
    const auto t0 = monotonic_ns();
    std::vector<std::pair<ChunkId, Vector>> rows;
    {
        std::shared_lock sl(state_mu_);
        auto collect = [&](const VectorList& list, bool filter) {
            for (std::size_t i = 0; i < list.size(); ++i) {
                if (filter && state_.tombstones.count(list.id(i)) != 0) continue;
                auto r = list.row(i);
                rows.emplace_back(list.id(i), Vector(r.begin(), r.end()));
            }
        };
        for (const auto& l : state_.main.lists) collect(l, true);
        collect(state_.buffer, false);
        collect(state_.pending, false);
    }
    // Training input order is fixed by id so the result depends only on the
    // live contents, not on the mutation history.
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<ChunkId> ids;
    std::vector<Vector> vecs;
    ids.reserve(rows.size());
    vecs.reserve(rows.size());
    for (auto& [id, v] : rows) {
        ids.push_back(id);
        vecs.push_back(std::move(v));
    }

    IvfState next;
    if (ids.empty()) {
        next.dim = dim_;
        next.metric = spec_.metric;
        next.trained = true;
    } else {
        next = ivf_build(ids, vecs, spec_.nlist, spec_.metric, spec_.seed);
    }

    std::unordered_map<ChunkId, Loc> where;
    where.reserve(ids.size());
    for (std::uint32_t l = 0; l < next.lists.size(); ++l) {
        for (ChunkId id : next.lists[l].ids()) where.emplace(id, Loc{Where::kMain, l});
    }
    {
        std::unique_lock sl(state_mu_);
        state_.main = std::move(next);
        state_.buffer.clear();
        state_.pending.clear();
        state_.tombstones.clear();
        state_.where = std::move(where);
    }
    return monotonic_ns() - t0;
}

void ReferenceStore::build_index() {
    std::scoped_lock wl(write_mu_);
    if (dim_ == 0) fail(Errc::kInvalidArgument, "collection not created");
    if (spec_.kind == IndexKind::kFlat) return;
    rebuild();
}

pipeline::SearchResult ReferenceStore::search(const Vector& query, std::size_t k) {
    return search(query, k, spec_.nprobe);
}

pipeline::SearchResult ReferenceStore::search(const Vector& query, std::size_t k, std::size_t nprobe) {
    if (k == 0) fail(Errc::kInvalidArgument, "search depth k must be >= 1");
    if (nprobe == 0) fail(Errc::kInvalidArgument, "nprobe must be >= 1");
    check_dim(query);
    std::shared_lock sl(state_mu_);
    auto result = search_locked(query, k, nprobe);
    last_scanned_.store(result.scanned_vectors);
    return result;
}

pipeline::SearchResult ReferenceStore::search_locked(const Vector& query, std::size_t k, std::size_t nprobe) const {
    const auto& st = state_;
    if (!st.main.trained) {
        if (spec_.kind == IndexKind::kIvf) fail(Errc::kNotTrained, "ivf index has not been built");
        if (st.buffer.empty()) fail(Errc::kEmptyIndex, "index is empty");
    } else if (st.main.size() == st.tombstones.size() && st.buffer.empty()) {
        fail(Errc::kEmptyIndex, "index is empty");
    }
    const double qq = dot(query, query);
    TopK top(k);
    pipeline::SearchResult result;
    if (st.main.trained) {
        if (spec_.kind == IndexKind::kFlat) {
            scan_list(st.main.lists[0], st.main.metric, query, qq, top);
            result.scanned_vectors += st.main.lists[0].size();
        } else if (!st.main.lists.empty()) {
            for (std::size_t c : probe_order(st.main, query, nprobe)) {
                scan_list(st.main.lists[c], st.main.metric, query, qq, top, &st.tombstones);
                result.scanned_vectors += st.main.lists[c].size();
            }
        }
    }
    if (spec_.kind == IndexKind::kHybridIvf) {
        scan_list(st.buffer, spec_.metric, query, qq, top);
        result.scanned_vectors += st.buffer.size();
    }
    result.candidates = top.take();
    return result;
}

std::vector<RetrievalCandidate> ReferenceStore::flat_search(const Vector& query, std::size_t k) const {
    check_dim(query);
    std::shared_lock sl(state_mu_);
    const double qq = dot(query, query);
    TopK top(k);
    for (const auto& l : state_.main.lists) scan_list(l, spec_.metric, query, qq, top, &state_.tombstones);
    scan_list(state_.buffer, spec_.metric, query, qq, top);
    scan_list(state_.pending, spec_.metric, query, qq, top);
    return top.take();
}

pipeline::StoreStats ReferenceStore::stats() const {
    std::shared_lock sl(state_mu_);
    pipeline::StoreStats s;
    s.live_vectors = state_.where.size();
    s.raw_vector_bytes = s.live_vectors * dim_ * sizeof(double);
    std::uint64_t bytes = state_.main.centroids.size() * dim_ * sizeof(double);
    for (const auto& l : state_.main.lists) bytes += l.bytes();
    bytes += state_.buffer.bytes() + state_.pending.bytes() + state_.tombstones.size() * sizeof(ChunkId);
    s.index_bytes = bytes;
    s.rebuild_count = rebuild_count_;
    s.buffer_size = state_.buffer.size();
    s.pending_size = state_.pending.size();
    s.scanned_vectors_last_search = last_scanned_.load();
    return s;
}

namespace {
std::vector<ChunkId> sorted(std::vector<ChunkId> v) {
    std::sort(v.begin(), v.end());
    return v;
}
}  // namespace

std::vector<ChunkId> ReferenceStore::main_ids() const {
    std::shared_lock sl(state_mu_);
    std::vector<ChunkId> out;
    for (const auto& l : state_.main.lists) {
        for (ChunkId id : l.ids()) {
            if (state_.tombstones.count(id) == 0) out.push_back(id);
        }
    }
    return sorted(std::move(out));
}

std::vector<ChunkId> ReferenceStore::buffer_ids() const {
    std::shared_lock sl(state_mu_);
    return sorted(state_.buffer.ids());
}

std::vector<ChunkId> ReferenceStore::pending_ids() const {
    std::shared_lock sl(state_mu_);
    return sorted(state_.pending.ids());
}

std::vector<ChunkId> ReferenceStore::tombstone_ids() const {
    std::shared_lock sl(state_mu_);
    return sorted({state_.tombstones.begin(), state_.tombstones.end()});
}

std::vector<ChunkId> ReferenceStore::live_ids() const {
    std::shared_lock sl(state_mu_);
    std::vector<ChunkId> out;
    out.reserve(state_.where.size());
    for (const auto& [id, loc] : state_.where) out.push_back(id);
    return sorted(std::move(out));
}

namespace {

void put_list(binio::Writer& w, const VectorList& list) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(list.size()));
    for (std::size_t i = 0; i < list.size(); ++i) {
        w.put<std::uint64_t>(list.id(i));
        for (double x : list.row(i)) w.put<double>(x);
    }
}

VectorList get_list(binio::Reader& r, std::size_t dim) {
    VectorList list(dim);
    const auto n = r.get<std::uint32_t>();
    Vector v(dim);
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto id = r.get<std::uint64_t>();
        for (auto& x : v) x = r.get<double>();
        list.append(id, v);
    }
    return list;
}

void put_section(binio::Writer& out, const binio::Writer& section) {
    out.put<std::uint64_t>(section.size());
    out.bytes(section.buffer());
}

binio::Reader get_section(binio::Reader& r) {
    const auto len = r.get<std::uint64_t>();
    return binio::Reader(r.take(static_cast<std::size_t>(len)));
}

}  // namespace

void ReferenceStore::save(const std::string& path) const {
    std::shared_lock sl(state_mu_);
    binio::Writer w;
    w.bytes(std::string_view(kSnapshotMagic, 4));
    w.put<std::uint16_t>(kSnapshotVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(dim_));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(spec_.metric));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(spec_.kind));

    binio::Writer params;
    params.put<std::uint32_t>(spec_.nlist);
    params.put<std::uint32_t>(spec_.nprobe);
    params.put<std::uint32_t>(spec_.buffer_threshold);
    params.put<std::uint64_t>(spec_.seed);
    params.put<std::uint64_t>(rebuild_count_);
    params.put<std::uint8_t>(state_.main.trained ? 1 : 0);
    put_section(w, params);

    binio::Writer centroids;
    centroids.put<std::uint32_t>(static_cast<std::uint32_t>(state_.main.centroids.size()));
    for (const auto& c : state_.main.centroids) {
        for (double x : c) centroids.put<double>(x);
    }
    put_section(w, centroids);

    binio::Writer lists;
    lists.put<std::uint32_t>(static_cast<std::uint32_t>(state_.main.lists.size()));
    for (const auto& l : state_.main.lists) put_list(lists, l);
    put_section(w, lists);

    binio::Writer buffer;
    put_list(buffer, state_.buffer);
    put_section(w, buffer);

    binio::Writer tomb;
    auto ts = std::vector<ChunkId>(state_.tombstones.begin(), state_.tombstones.end());
    std::sort(ts.begin(), ts.end());
    tomb.put<std::uint64_t>(ts.size());
    for (ChunkId id : ts) tomb.put<std::uint64_t>(id);
    put_section(w, tomb);

    binio::Writer pending;
    put_list(pending, state_.pending);
    put_section(w, pending);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::kIo, "cannot write snapshot " + path);
    out.write(reinterpret_cast<const char*>(w.buffer().data()), static_cast<std::streamsize>(w.size()));
    if (!out) fail(Errc::kIo, "short write on snapshot " + path);
}

ReferenceStore ReferenceStore::load(const std::string& path) {
    const auto bytes = binio::read_file(path);
    binio::Reader r(bytes);
    if (r.str(4) != std::string_view(kSnapshotMagic, 4)) fail(Errc::kParseError, path + ": not a store snapshot");
    if (r.get<std::uint16_t>() != kSnapshotVersion) fail(Errc::kSchemaVersionMismatch, path + ": unsupported snapshot version");
    IndexSpec spec;
    const auto dim = r.get<std::uint32_t>();
    spec.metric = static_cast<Metric>(r.get<std::uint8_t>());
    spec.kind = static_cast<IndexKind>(r.get<std::uint8_t>());
    if (spec.metric > Metric::kL2 || spec.kind > IndexKind::kHybridIvf) fail(Errc::kParseError, path + ": bad header");

    auto params = get_section(r);
    spec.nlist = params.get<std::uint32_t>();
    spec.nprobe = params.get<std::uint32_t>();
    spec.buffer_threshold = params.get<std::uint32_t>();
    spec.seed = params.get<std::uint64_t>();
    const auto rebuilds = params.get<std::uint64_t>();
    const bool trained = params.get<std::uint8_t>() != 0;

    ReferenceStore store(spec);
    store.create_collection(dim, spec.metric);
    auto& st = store.state_;

    auto cs = get_section(r);
    const auto ncent = cs.get<std::uint32_t>();
    st.main.centroids.assign(ncent, Vector(dim));
    for (auto& c : st.main.centroids) {
        for (auto& x : c) x = cs.get<double>();
    }
    auto ls = get_section(r);
    const auto nlists = ls.get<std::uint32_t>();
    st.main.lists.clear();
    for (std::uint32_t l = 0; l < nlists; ++l) st.main.lists.push_back(get_list(ls, dim));
    st.main.trained = trained;
    auto bs = get_section(r);
    st.buffer = get_list(bs, dim);
    auto tsec = get_section(r);
    const auto ntomb = tsec.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < ntomb; ++i) st.tombstones.insert(tsec.get<std::uint64_t>());
    auto ps = get_section(r);
    st.pending = get_list(ps, dim);

    for (std::uint32_t l = 0; l < st.main.lists.size(); ++l) {
        for (ChunkId id : st.main.lists[l].ids()) {
            if (st.tombstones.count(id) == 0) st.where.emplace(id, Loc{Where::kMain, l});
        }
    }
    for (ChunkId id : st.buffer.ids()) st.where.emplace(id, Loc{Where::kBuffer, 0});
    for (ChunkId id : st.pending.ids()) st.where.emplace(id, Loc{Where::kPending, 0});
    store.rebuild_count_ = rebuilds;
    return store;
}

}  // namespace ragbench::ref
