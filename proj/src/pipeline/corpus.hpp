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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pipeline/types.hpp"

namespace ragbench {

// Documents sorted by file_id; a document's index is its file ordinal.
struct Corpus {
    std::vector<Document> documents;

    // Sorts by id and rejects duplicates (DuplicateId).
    static Corpus from_documents(std::vector<Document> docs);

    std::optional<std::size_t> ordinal_of(std::string_view file_id) const;
    std::size_t size() const { return documents.size(); }
};

struct CorpusManifest {
    struct Entry {
        std::string file_id;
        std::size_t bytes = 0;
    };
    std::vector<Entry> entries;
    std::string digest;  // hex FNV-1a over ids and bodies in order
};

CorpusManifest manifest_of(const Corpus& corpus);

}  // namespace ragbench
