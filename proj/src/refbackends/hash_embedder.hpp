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
#include <string>
#include <vector>

#include "pipeline/interfaces.hpp"

namespace ragbench::ref {

struct HashEmbedderConfig {
    std::size_t dim = 384;
    std::uint64_t seed = 42;
    bool lowercase = true;
};

// Feature-hashing embedder: each token adds +-1 to coordinate hash % dim
// (sign from hash bit 63), then the vector is L2-normalized.
class HashEmbedder final : public pipeline::Embedder {
 public:
    explicit HashEmbedder(HashEmbedderConfig cfg);

    std::size_t dim() const override { return cfg_.dim; }
    std::vector<Vector> embed(std::span<const std::string> texts) override;
    Vector embed_one(std::string_view text) const;

    const HashEmbedderConfig& config() const { return cfg_; }

 private:
    HashEmbedderConfig cfg_;
};

}  // namespace ragbench::ref
