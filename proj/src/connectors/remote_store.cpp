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

#include "connectors/remote_store.hpp"

#include <nlohmann/json.hpp>

#include "common/error.hpp"

namespace ragbench::connectors {

namespace {

nlohmann::json call(HttpEndpoint& ep, const std::string& path, const nlohmann::json* body, bool idempotent) {
    const auto resp = body != nullptr ? ep.post(path, body->dump(), idempotent) : ep.get(path, idempotent);
    if (resp.status < 200 || resp.status >= 300) throw_remote(resp, "store " + path);
    if (resp.body.empty()) return nlohmann::json::object();
    auto j = nlohmann::json::parse(resp.body, nullptr, false);
    if (j.is_discarded()) fail(Errc::kRemoteError, "store " + path + ": response is not JSON");
    return j;
}

}  // namespace

RemoteStore::RemoteStore(std::shared_ptr<HttpEndpoint> endpoint) : endpoint_(std::move(endpoint)) {
    if (!endpoint_) fail(Errc::kInvalidArgument, "remote store needs an endpoint");
    const auto c = call(*endpoint_, "/capabilities", nullptr, true);
    caps_.insert = c.value("insert", true);
    caps_.remove = c.value("delete", true);
    caps_.search = c.value("search", true);
    caps_.build_index = c.value("build_index", true);
    caps_.stats = c.value("stats", true);
}

void RemoteStore::require(bool supported, const char* op) const {
    if (!supported) fail(Errc::kUnsupported, std::string("remote store does not support ") + op);
}

void RemoteStore::create_collection(std::size_t dim, Metric metric) {
    if (dim == 0) fail(Errc::kInvalidArgument, "collection dimension must be > 0");
    nlohmann::json b{{"dim", dim}, {"metric", metric_name(metric)}};
    call(*endpoint_, "/collections", &b, false);
    dim_ = dim;
}

pipeline::StoreInsertOutcome RemoteStore::insert(std::span<const ChunkId> ids, std::span<const Vector> vectors) {
    require(caps_.insert, "insert");
    if (ids.size() != vectors.size()) fail(Errc::kInvalidArgument, "insert: ids and vectors differ in length");
    for (const auto& v : vectors) {
        if (v.size() != dim_) fail(Errc::kDimensionMismatch, "insert: vector dimension does not match collection");
    }
    nlohmann::json b;
    b["ids"] = std::vector<ChunkId>(ids.begin(), ids.end());
    b["vectors"] = std::vector<Vector>(vectors.begin(), vectors.end());
    const auto r = call(*endpoint_, "/insert", &b, false);
    return {r.value("rebuilds", std::uint32_t{0}), r.value("rebuild_ns", std::int64_t{0})};
}

void RemoteStore::remove(std::span<const ChunkId> ids) {
    require(caps_.remove, "delete");
    nlohmann::json b;
    b["ids"] = std::vector<ChunkId>(ids.begin(), ids.end());
    call(*endpoint_, "/delete", &b, false);
}

pipeline::SearchResult RemoteStore::search(const Vector& query, std::size_t k) {
    require(caps_.search, "search");
    if (k == 0) fail(Errc::kInvalidArgument, "search: k must be >= 1");
    if (query.size() != dim_) fail(Errc::kDimensionMismatch, "search: query dimension does not match collection");
    nlohmann::json b{{"vector", query}, {"k", k}};
    const auto r = call(*endpoint_, "/search", &b, true);
    pipeline::SearchResult out;
    for (const auto& c : r.at("candidates")) out.candidates.push_back({c.at("id").get<ChunkId>(), c.at("score").get<double>()});
    if (out.candidates.size() > k) fail(Errc::kRemoteError, "search: store returned more than k candidates");
    out.scanned_vectors = r.value("scanned_vectors", std::uint64_t{0});
    return out;
}

void RemoteStore::build_index() {
    require(caps_.build_index, "build_index");
    const nlohmann::json b = nlohmann::json::object();
    call(*endpoint_, "/build_index", &b, false);
}

pipeline::StoreStats RemoteStore::stats() const {
    require(caps_.stats, "stats");
    const auto r = call(*endpoint_, "/stats", nullptr, true);
    pipeline::StoreStats s;
    s.live_vectors = r.value("live_vectors", std::uint64_t{0});
    s.index_bytes = r.value("index_bytes", std::uint64_t{0});
    s.raw_vector_bytes = r.value("raw_vector_bytes", std::uint64_t{0});
    s.rebuild_count = r.value("rebuild_count", std::uint64_t{0});
    s.buffer_size = r.value("buffer_size", std::uint64_t{0});
    s.pending_size = r.value("pending_size", std::uint64_t{0});
    s.scanned_vectors_last_search = r.value("scanned_vectors_last_search", std::uint64_t{0});
    return s;
}

}  // namespace ragbench::connectors
