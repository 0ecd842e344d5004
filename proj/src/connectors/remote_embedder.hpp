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

// Client for an embeddings service: POST {model, input: [text]} returning
// {data: [{index, embedding}]}.
class RemoteEmbedder final : public pipeline::Embedder {
 public:
    RemoteEmbedder(std::shared_ptr<HttpEndpoint> endpoint, std::size_t dim);

    std::size_t dim() const override { return dim_; }
    std::vector<Vector> embed(std::span<const std::string> texts) override;

 private:
    std::shared_ptr<HttpEndpoint> endpoint_;
    std::size_t dim_;
};

}  // namespace ragbench::connectors
