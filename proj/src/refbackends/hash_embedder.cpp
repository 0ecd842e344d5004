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

#include "refbackends/hash_embedder.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/text.hpp"

namespace ragbench::ref {

HashEmbedder::HashEmbedder(HashEmbedderConfig cfg) : cfg_(cfg) {
    if (cfg_.dim < 8) fail(Errc::kInvalidArgument, "hash embedder dim must be >= 8");
}

Vector HashEmbedder::embed_one(std::string_view text) const {
    if (text.empty()) fail(Errc::kEmptyInput, "cannot embed empty text");
    Vector v(cfg_.dim, 0.0);
    for (const auto& sp : text::word_spans(text)) {
        const auto raw = text.substr(sp.begin, sp.end - sp.begin);
        const std::uint64_t h = cfg_.lowercase ? seeded_hash64(text::to_lower(raw), cfg_.seed)
                                               : seeded_hash64(raw, cfg_.seed);
        v[h % cfg_.dim] += (h >> 63) ? -1.0 : 1.0;
    }
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& x : v) x *= inv;
    }
    return v;
}

std::vector<Vector> HashEmbedder::embed(std::span<const std::string> texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

}  // namespace ragbench::ref
