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
#include <stdexcept>
#include <string>
#include <string_view>

namespace ragbench {

// Values are part of the C ABI (see ragbench.h); append only.
enum class Errc : int {
    kOk = 0,
    kInvalidArgument = 1,
    kInvalidMix = 2,
    kEmptyPopulation = 3,
    kNoMutableToken = 4,
    kExhaustedCorpus = 5,
    kEmptyQuestionPool = 6,
    kInvalidChunkParams = 7,
    kDimensionMismatch = 8,
    kEmptyIndex = 9,
    kUnknownFileId = 10,
    kBadTemplate = 11,
    kEmptyInput = 12,
    kNotTrained = 13,
    kDuplicateId = 14,
    kTimeout = 15,
    kRemoteError = 16,
    kStreamAborted = 17,
    kUnsupported = 18,
    kParseError = 19,
    kSchemaError = 20,
    kOutputUnwritable = 21,
    kAllProbesUnavailable = 22,
    kSecondStartRejected = 23,
    kProbeReadError = 24,
    kPartialFlush = 25,
    kEmptySamples = 26,
    kEmptyDenominator = 27,
    kCorruptLog = 28,
    kSchemaVersionMismatch = 29,
    kMissingSnapshot = 30,
    kMalformedRecord = 31,
    kDigestMismatch = 32,
    kIo = 33,
    kInterrupted = 34,
    kInternal = 35,
};

std::string_view errc_name(Errc code) noexcept;
std::optional<Errc> errc_from_name(std::string_view name) noexcept;

class Error : public std::runtime_error {
 public:
    Error(Errc code, const std::string& message, std::string stage = {})
        : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

    Errc code() const noexcept { return code_; }

    // Pipeline stage the failure is attributed to, empty when not stage-bound.
    const std::string& stage() const noexcept { return stage_; }

 private:
    Errc code_;
    std::string stage_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace ragbench
