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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "app/config.hpp"
#include "pipeline/corpus.hpp"

namespace ragbench::app {

// plain_dir: each regular file (non-recursive) is one document, file name =
// file_id. jsonl: one {id, title, text} object per line; title may be
// omitted. `limit` keeps the first documents by sorted id.
// Throws MalformedRecord (with line number), DuplicateId, Io.
Corpus ingest_corpus(const std::string& path, CorpusFormat format, std::optional<std::size_t> limit = std::nullopt);

// Resolves the corpus section, generating synthetic documents when asked.
Corpus load_corpus(const CorpusConfig& cfg);

// Encyclopedia-style documents whose sentences carry numbers and proper
// names, so every chunk has mutable tokens for update questions.
std::vector<Document> synthetic_documents(std::size_t count, std::uint64_t seed);

void write_jsonl_corpus(const std::string& path, const std::vector<Document>& docs);

nlohmann::ordered_json manifest_json(const CorpusManifest& m);

}  // namespace ragbench::app
