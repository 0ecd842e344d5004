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

#include "app/ingest.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace ragbench::app {

namespace fs = std::filesystem;

namespace {

std::vector<Document> read_plain_dir(const std::string& path) {
    std::error_code ec;
    if (!fs::is_directory(path, ec)) fail(Errc::kIo, "corpus directory not found: " + path);
    std::vector<Document> docs;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        if (!in) fail(Errc::kIo, "cannot read " + entry.path().string());
        std::ostringstream ss;
        ss << in.rdbuf();
        const auto name = entry.path().filename().string();
        docs.push_back({name, entry.path().stem().string(), ss.str()});
    }
    return docs;
}

std::vector<Document> read_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::kIo, "cannot read corpus file " + path);
    std::vector<Document> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto where = path + ":" + std::to_string(lineno);
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) fail(Errc::kMalformedRecord, where + ": not a JSON object");
        auto str = [&](const char* key, bool required) -> std::string {
            auto it = j.find(key);
            if (it == j.end()) {
                if (required) fail(Errc::kMalformedRecord, where + ": missing '" + key + "'");
                return {};
            }
            if (!it->is_string()) fail(Errc::kMalformedRecord, where + ": '" + key + "' must be a string");
            return it->get<std::string>();
        };
        Document d{str("id", true), str("title", false), str("text", true)};
        if (d.file_id.empty()) fail(Errc::kMalformedRecord, where + ": empty 'id'");
        docs.push_back(std::move(d));
    }
    return docs;
}

}  // namespace

Corpus ingest_corpus(const std::string& path, CorpusFormat format, std::optional<std::size_t> limit) {
    std::vector<Document> docs;
    switch (format) {
        case CorpusFormat::kPlainDir: docs = read_plain_dir(path); break;
        case CorpusFormat::kJsonl: docs = read_jsonl(path); break;
        case CorpusFormat::kSynthetic: fail(Errc::kInvalidArgument, "synthetic corpora are generated, not ingested");
    }
    auto corpus = Corpus::from_documents(std::move(docs));
    if (limit && *limit < corpus.documents.size()) corpus.documents.resize(*limit);
    return corpus;
}

Corpus load_corpus(const CorpusConfig& cfg) {
    if (cfg.format == CorpusFormat::kSynthetic) {
        auto corpus = Corpus::from_documents(synthetic_documents(cfg.synthetic_documents, cfg.synthetic_seed));
        if (cfg.limit && *cfg.limit < corpus.documents.size()) corpus.documents.resize(*cfg.limit);
        return corpus;
    }
    return ingest_corpus(cfg.path, cfg.format, cfg.limit);
}

namespace {

constexpr std::array kSyllables = {"ar", "bel", "cor", "dun", "es", "fal", "gor", "hal", "is", "jor", "kel", "lor",
                                   "mar", "nor", "os", "pel", "quin", "ros", "sal", "tor", "ul", "vel", "wyn", "zan"};
constexpr std::array kThings = {"bridge",  "library", "harbor", "observatory", "railway", "canal",  "granary",
                                "academy", "lighthouse", "market", "foundry",  "cathedral", "archive", "mill"};
constexpr std::array kTemplates = {
    "The {thing} of {place} was completed in {year} under the direction of {person}.",
    "By {year} the town of {place} counted {num} residents and {small} schools run by {person}.",
    "{person} measured the {thing} at {num} meters in length during the {name} survey of {year}.",
    "A fire in {year} destroyed {small} wings of the {thing}, which {person} later rebuilt.",
    "The council of {place} approved a budget of {num} crowns for the {name} {thing} in {year}.",
    "Records kept by {person} list {num} visitors to the {thing} of {name} in its first season.",
    "In {year} the {thing} at {place} was connected to {small} districts including {name}.",
    "{person} served as keeper of the {name} {thing} for {small} years after {year}.",
    "The {place} {thing} holds {num} volumes, according to the {name} inventory of {year}.",
    "Trade through {place} grew to {num} shipments a year once the {thing} at {name} opened in {year}.",
};

template <std::size_t N>
const char* pick(Rng& rng, const std::array<const char*, N>& list) {
    return list[rng.below(N)];
}

// Invented proper name of two or three syllables.
std::string name(Rng& rng) {
    std::string out;
    const std::size_t n = 2 + rng.below(2);
    for (std::size_t i = 0; i < n; ++i) out += pick(rng, kSyllables);
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
    return out;
}

std::string fill(std::string_view tmpl, Rng& rng, const std::string& place) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find('{', pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        out.append(tmpl.substr(pos, open - pos));
        const auto close = tmpl.find('}', open);
        const auto slot = tmpl.substr(open + 1, close - open - 1);
        if (slot == "place") out += place;
        else if (slot == "person" || slot == "name") out += name(rng);
        else if (slot == "thing") out += pick(rng, kThings);
        else if (slot == "year") out += std::to_string(1700 + rng.below(320));
        else if (slot == "num") out += std::to_string(100 + rng.below(99900));
        else if (slot == "small") out += std::to_string(2 + rng.below(28));
        pos = close + 1;
    }
    return out;
}

}  // namespace

std::vector<Document> synthetic_documents(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Document> docs;
    docs.reserve(count);
    const int width = std::max<int>(5, static_cast<int>(std::to_string(count).size()));
    for (std::size_t i = 0; i < count; ++i) {
        std::string id = std::to_string(i);
        id = "doc-" + std::string(static_cast<std::size_t>(width) - std::min<std::size_t>(id.size(), width), '0') + id;
        const std::string place = name(rng);
        Document d;
        d.file_id = id;
        d.title = place + " " + pick(rng, kThings);
        const std::size_t paragraphs = 2 + rng.below(3);
        for (std::size_t p = 0; p < paragraphs; ++p) {
            if (p > 0) d.body += "\n\n";
            const std::size_t sentences = 3 + rng.below(4);
            for (std::size_t s = 0; s < sentences; ++s) {
                if (s > 0) d.body += ' ';
                d.body += fill(kTemplates[rng.below(kTemplates.size())], rng, place);
            }
        }
        docs.push_back(std::move(d));
    }
    return docs;
}

void write_jsonl_corpus(const std::string& path, const std::vector<Document>& docs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::kOutputUnwritable, "cannot write " + path);
    for (const auto& d : docs) {
        nlohmann::ordered_json j{{"id", d.file_id}, {"title", d.title}, {"text", d.body}};
        out << j.dump() << '\n';
    }
    out.flush();
    if (!out) fail(Errc::kOutputUnwritable, "write failed for " + path);
}

nlohmann::ordered_json manifest_json(const CorpusManifest& m) {
    nlohmann::ordered_json j;
    j["documents"] = m.entries.size();
    j["digest"] = m.digest;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : m.entries) entries.push_back({{"id", e.file_id}, {"bytes", e.bytes}});
    j["entries"] = std::move(entries);
    return j;
}

}  // namespace ragbench::app
