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

#include "pipeline/chunker.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace ragbench::pipeline {

namespace {

Chunk make_chunk(const Document& doc, std::uint64_t file_ordinal, std::size_t index, std::size_t start,
                 std::size_t end) {
    Chunk c;
    c.chunk_id = make_chunk_id(file_ordinal, index, 0);
    c.file_id = doc.file_id;
    c.start = start;
    c.end = end;
    c.text = doc.body.substr(start, end - start);
    return c;
}

}  // namespace

std::vector<Chunk> chunk_fixed(const Document& doc, std::size_t size, std::size_t overlap,
                               std::uint64_t file_ordinal) {
    if (size == 0 || overlap >= size) {
        fail(Errc::kInvalidChunkParams, "fixed chunking requires size > overlap >= 0 (size " + std::to_string(size) +
                                            ", overlap " + std::to_string(overlap) + ")");
    }
    std::vector<Chunk> out;
    const std::size_t len = doc.body.size();
    const std::size_t stride = size - overlap;
    for (std::size_t start = 0; start < len; start += stride) {
        const std::size_t end = std::min(start + size, len);
        out.push_back(make_chunk(doc, file_ordinal, out.size(), start, end));
        if (end == len) break;
    }
    return out;
}

std::vector<Chunk> chunk_separator(const Document& doc, const std::vector<std::string>& separators,
                                   std::size_t max_len, std::size_t overlap, std::uint64_t file_ordinal) {
    if (separators.empty() || max_len == 0) {
        fail(Errc::kInvalidChunkParams, "separator chunking requires separators and max_len > 0");
    }
    for (const auto& s : separators) {
        if (s.empty()) fail(Errc::kInvalidChunkParams, "empty separator");
    }
    const std::string& body = doc.body;

    // Segment boundaries: position just past each separator match. At a
    // given position the longest matching separator wins.
    std::vector<std::pair<std::size_t, std::size_t>> segments;
    std::size_t seg_start = 0;
    std::size_t i = 0;
    while (i < body.size()) {
        std::size_t matched = 0;
        for (const auto& s : separators) {
            if (s.size() > matched && body.compare(i, s.size(), s) == 0) matched = s.size();
        }
        if (matched > 0) {
            segments.emplace_back(seg_start, i + matched);
            i += matched;
            seg_start = i;
        } else {
            ++i;
        }
    }
    if (seg_start < body.size()) segments.emplace_back(seg_start, body.size());

    std::vector<std::pair<std::size_t, std::size_t>> pieces;
    for (auto [b, e] : segments) {
        if (e - b <= max_len) {
            pieces.emplace_back(b, e);
            continue;
        }
        for (std::size_t s = b; s < e; s += max_len) pieces.emplace_back(s, std::min(s + max_len, e));
    }

    std::vector<Chunk> out;
    out.reserve(pieces.size());
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        Chunk c = make_chunk(doc, file_ordinal, k, pieces[k].first, pieces[k].second);
        if (overlap > 0) {
            const std::size_t first = k >= overlap ? k - overlap : 0;
            if (first < k) c.context_prefix = body.substr(pieces[first].first, pieces[k].first - pieces[first].first);
        }
        out.push_back(std::move(c));
    }
    return out;
}

FixedChunker::FixedChunker(std::size_t size, std::size_t overlap) : size_(size), overlap_(overlap) {
    if (size_ == 0 || overlap_ >= size_) fail(Errc::kInvalidChunkParams, "fixed chunking requires size > overlap >= 0");
}

std::vector<Chunk> FixedChunker::chunk(const Document& doc, std::uint64_t file_ordinal) const {
    return chunk_fixed(doc, size_, overlap_, file_ordinal);
}

SeparatorChunker::SeparatorChunker(std::vector<std::string> separators, std::size_t max_len, std::size_t overlap)
    : separators_(std::move(separators)), max_len_(max_len), overlap_(overlap) {
    if (separators_.empty() || max_len_ == 0) {
        fail(Errc::kInvalidChunkParams, "separator chunking requires separators and max_len > 0");
    }
}

std::vector<Chunk> SeparatorChunker::chunk(const Document& doc, std::uint64_t file_ordinal) const {
    return chunk_separator(doc, separators_, max_len_, overlap_, file_ordinal);
}

std::string reconstruct_body(const std::vector<Chunk>& chunks) {
    std::string out;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const auto& c = chunks[i];
        const std::size_t core_end = i + 1 < chunks.size() ? std::min(c.end, chunks[i + 1].start) : c.end;
        out.append(c.text, 0, core_end - c.start);
    }
    return out;
}

}  // namespace ragbench::pipeline
