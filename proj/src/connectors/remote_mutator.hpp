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

#include "connectors/endpoint.hpp"
#include "workload/mutator.hpp"

namespace ragbench::connectors {

// Delegates mutation to a service (for example a masked language model):
// POST {text, seed} -> {mutated_text, span_begin, span_end, original_token,
// replacement_token}. The response is checked against the mutation contract.
class RemoteMutator final : public workload::Mutator {
 public:
    explicit RemoteMutator(std::shared_ptr<HttpEndpoint> endpoint);
    workload::MutationResult mutate(std::string_view text, Rng& rng) override;

 private:
    std::shared_ptr<HttpEndpoint> endpoint_;
};

// Throws RemoteError when `m` is not a single-span replacement of `text`.
void check_mutation(std::string_view text, const workload::MutationResult& m);

}  // namespace ragbench::connectors
