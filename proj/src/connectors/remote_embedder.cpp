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

#include "connectors/remote_embedder.hpp"

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "connectors/wire.hpp"

namespace ragbench::connectors {

RemoteEmbedder::RemoteEmbedder(std::shared_ptr<HttpEndpoint> endpoint, std::size_t dim)
    : endpoint_(std::move(endpoint)), dim_(dim) {
    if (!endpoint_) fail(Errc::kInvalidArgument, "remote embedder needs an endpoint");
}

std::vector<Vector> RemoteEmbedder::embed(std::span<const std::string> texts) {
    if (texts.empty()) return {};
    nlohmann::json req;
    req["model"] = endpoint_->config().model;
    req["input"] = std::vector<std::string>(texts.begin(), texts.end());
    const auto resp = endpoint_->post(std::string(wire::kEmbeddingsPath), req.dump(), true);
    if (resp.status < 200 || resp.status >= 300) throw_remote(resp, "embeddings");

    const auto body = nlohmann::json::parse(resp.body, nullptr, false);
    if (body.is_discarded() || !body.contains("data") || !body["data"].is_array()) {
        fail(Errc::kRemoteError, "embeddings: response has no data array");
    }
    const auto& data = body["data"];
    if (data.size() != texts.size()) {
        fail(Errc::kRemoteError, "embeddings: expected " + std::to_string(texts.size()) + " vectors, got " +
                                     std::to_string(data.size()));
    }
    std::vector<Vector> out(texts.size());
    std::vector<bool> seen(texts.size(), false);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& item = data[i];
        const std::size_t index = item.contains("index") ? item["index"].get<std::size_t>() : i;
        if (index >= out.size() || seen[index]) fail(Errc::kRemoteError, "embeddings: bad or repeated index");
        seen[index] = true;
        out[index] = item.at("embedding").get<Vector>();
        if (out[index].size() != dim_) {
            fail(Errc::kDimensionMismatch, "embeddings: service returned dimension " +
                                               std::to_string(out[index].size()) + ", collection expects " +
                                               std::to_string(dim_));
        }
    }
    return out;
}

}  // namespace ragbench::connectors
