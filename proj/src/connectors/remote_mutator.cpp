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

#include "connectors/remote_mutator.hpp"

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "connectors/wire.hpp"

namespace ragbench::connectors {

RemoteMutator::RemoteMutator(std::shared_ptr<HttpEndpoint> endpoint) : endpoint_(std::move(endpoint)) {
    if (!endpoint_) fail(Errc::kInvalidArgument, "remote mutator needs an endpoint");
}

workload::MutationResult RemoteMutator::mutate(std::string_view text, Rng& rng) {
    nlohmann::json req{{"text", text}, {"seed", rng.next_u64()}};
    const auto resp = endpoint_->post(std::string(wire::kMutatePath), req.dump(), true);
    if (resp.status < 200 || resp.status >= 300) throw_remote(resp, "mutate");
    const auto j = nlohmann::json::parse(resp.body, nullptr, false);
    if (j.is_discarded()) fail(Errc::kRemoteError, "mutate: response is not JSON");
    workload::MutationResult m;
    m.mutated_text = j.at("mutated_text").get<std::string>();
    m.span_begin = j.at("span_begin").get<std::size_t>();
    m.span_end = j.at("span_end").get<std::size_t>();
    m.original_token = j.at("original_token").get<std::string>();
    m.replacement_token = j.at("replacement_token").get<std::string>();
    check_mutation(text, m);
    return m;
}

void check_mutation(std::string_view text, const workload::MutationResult& m) {
    auto bad = [](const char* why) { fail(Errc::kRemoteError, std::string("mutate: ") + why); };
    if (m.span_begin >= m.span_end || m.span_end > text.size()) bad("span out of range");
    if (text.substr(m.span_begin, m.span_end - m.span_begin) != m.original_token) bad("span does not hold original token");
    if (m.replacement_token.empty() || m.replacement_token == m.original_token) bad("replacement equals original");
    std::string expect(text.substr(0, m.span_begin));
    expect += m.replacement_token;
    expect += text.substr(m.span_end);
    if (expect != m.mutated_text) bad("mutated text differs outside the span");
}

}  // namespace ragbench::connectors
