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

#include <memory>
#include <string>

#include "connectors/endpoint.hpp"
#include "pipeline/interfaces.hpp"

namespace ragbench::connectors {

// Store adapter over the documented REST contract:
//   POST /collections {dim, metric}
//   POST /insert {ids, vectors} -> {rebuilds, rebuild_ns}
//   POST /delete {ids}
//   POST /search {vector, k} -> {candidates: [{id, score}], scanned_vectors}
//   POST /build_index
//   GET  /stats, GET /capabilities
// Errors come back as {"error": {"code", "message"}} and are mapped to the
// matching local error code.
class RemoteStore final : public pipeline::VectorStore {
 public:
    // Fetches the capability declaration once.
    explicit RemoteStore(std::shared_ptr<HttpEndpoint> endpoint);

    void create_collection(std::size_t dim, Metric metric) override;
    std::size_t dim() const override { return dim_; }
    pipeline::StoreInsertOutcome insert(std::span<const ChunkId> ids, std::span<const Vector> vectors) override;
    void remove(std::span<const ChunkId> ids) override;
    pipeline::SearchResult search(const Vector& query, std::size_t k) override;
    void build_index() override;
    pipeline::StoreStats stats() const override;
    pipeline::StoreCapabilities capabilities() const override { return caps_; }

 private:
    void require(bool supported, const char* op) const;

    std::shared_ptr<HttpEndpoint> endpoint_;
    pipeline::StoreCapabilities caps_;
    std::size_t dim_ = 0;
};

}  // namespace ragbench::connectors
