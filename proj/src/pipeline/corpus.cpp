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

#include "pipeline/corpus.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "common/hash.hpp"

namespace ragbench {

Corpus Corpus::from_documents(std::vector<Document> docs) {
    std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.file_id < b.file_id; });
    for (std::size_t i = 1; i < docs.size(); ++i) {
        if (docs[i].file_id == docs[i - 1].file_id) fail(Errc::kDuplicateId, "duplicate document id " + docs[i].file_id);
    }
    if (docs.size() > kMaxFileOrdinal) fail(Errc::kInvalidArgument, "corpus too large");
    return Corpus{std::move(docs)};
}

std::optional<std::size_t> Corpus::ordinal_of(std::string_view file_id) const {
    auto it = std::lower_bound(documents.begin(), documents.end(), file_id,
                               [](const Document& d, std::string_view id) { return d.file_id < id; });
    if (it == documents.end() || it->file_id != file_id) return std::nullopt;
    return static_cast<std::size_t>(it - documents.begin());
}

CorpusManifest manifest_of(const Corpus& corpus) {
    CorpusManifest m;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& d : corpus.documents) {
        m.entries.push_back({d.file_id, d.body.size()});
        h = fnv1a64(d.file_id, h);
        h = fnv1a64(std::string_view("\0", 1), h);
        h = fnv1a64(d.body, h);
        h = fnv1a64(std::string_view("\0", 1), h);
    }
    m.digest = hex64(h);
    return m;
}

}  // namespace ragbench
