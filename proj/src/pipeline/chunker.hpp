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
#include <memory>
#include <string>
#include <vector>

#include "pipeline/types.hpp"

namespace ragbench::pipeline {

class Chunker {
 public:
    virtual ~Chunker() = default;
    // file_ordinal is the document's position in the sorted corpus manifest;
    // it seeds the chunk ids.
    virtual std::vector<Chunk> chunk(const Document& doc, std::uint64_t file_ordinal) const = 0;
};

// Fixed-length windows of `size` bytes advancing by size - overlap.
std::vector<Chunk> chunk_fixed(const Document& doc, std::size_t size, std::size_t overlap,
                               std::uint64_t file_ordinal = 0);

// Splits after each separator occurrence; the separator stays with the
// preceding segment so offsets remain lossless. Segments longer than max_len
// are split into fixed max_len windows. `overlap` previous segments are
// prepended to each chunk's retrieval text only.
std::vector<Chunk> chunk_separator(const Document& doc, const std::vector<std::string>& separators,
                                   std::size_t max_len, std::size_t overlap, std::uint64_t file_ordinal = 0);

class FixedChunker final : public Chunker {
 public:
    FixedChunker(std::size_t size, std::size_t overlap);
    std::vector<Chunk> chunk(const Document& doc, std::uint64_t file_ordinal) const override;

 private:
    std::size_t size_;
    std::size_t overlap_;
};

class SeparatorChunker final : public Chunker {
 public:
    SeparatorChunker(std::vector<std::string> separators, std::size_t max_len, std::size_t overlap);
    std::vector<Chunk> chunk(const Document& doc, std::uint64_t file_ordinal) const override;

 private:
    std::vector<std::string> separators_;
    std::size_t max_len_;
    std::size_t overlap_;
};

// Rebuilds a body from chunks by taking each chunk's span up to where the
// next one starts. Used for losslessness checks.
std::string reconstruct_body(const std::vector<Chunk>& chunks);

}  // namespace ragbench::pipeline
