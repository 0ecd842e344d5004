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

#include "common/error.hpp"

namespace ragbench {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::kOk: return "Ok";
        case Errc::kInvalidArgument: return "InvalidArgument";
        case Errc::kInvalidMix: return "InvalidMix";
        case Errc::kEmptyPopulation: return "EmptyPopulation";
        case Errc::kNoMutableToken: return "NoMutableToken";
        case Errc::kExhaustedCorpus: return "ExhaustedCorpus";
        case Errc::kEmptyQuestionPool: return "EmptyQuestionPool";
        case Errc::kInvalidChunkParams: return "InvalidChunkParams";
        case Errc::kDimensionMismatch: return "DimensionMismatch";
        case Errc::kEmptyIndex: return "EmptyIndex";
        case Errc::kUnknownFileId: return "UnknownFileId";
        case Errc::kBadTemplate: return "BadTemplate";
        case Errc::kEmptyInput: return "EmptyInput";
        case Errc::kNotTrained: return "NotTrained";
        case Errc::kDuplicateId: return "DuplicateId";
        case Errc::kTimeout: return "Timeout";
        case Errc::kRemoteError: return "RemoteError";
        case Errc::kStreamAborted: return "StreamAborted";
        case Errc::kUnsupported: return "Unsupported";
        case Errc::kParseError: return "ParseError";
        case Errc::kSchemaError: return "SchemaError";
        case Errc::kOutputUnwritable: return "OutputUnwritable";
        case Errc::kAllProbesUnavailable: return "AllProbesUnavailable";
        case Errc::kSecondStartRejected: return "SecondStartRejected";
        case Errc::kProbeReadError: return "ProbeReadError";
        case Errc::kPartialFlush: return "PartialFlush";
        case Errc::kEmptySamples: return "EmptySamples";
        case Errc::kEmptyDenominator: return "EmptyDenominator";
        case Errc::kCorruptLog: return "CorruptLog";
        case Errc::kSchemaVersionMismatch: return "SchemaVersionMismatch";
        case Errc::kMissingSnapshot: return "MissingSnapshot";
        case Errc::kMalformedRecord: return "MalformedRecord";
        case Errc::kDigestMismatch: return "DigestMismatch";
        case Errc::kIo: return "Io";
        case Errc::kInterrupted: return "Interrupted";
        case Errc::kInternal: return "Internal";
    }
    return "Unknown";
}

std::optional<Errc> errc_from_name(std::string_view name) noexcept {
    for (int i = 0; i <= static_cast<int>(Errc::kInternal); ++i) {
        if (errc_name(static_cast<Errc>(i)) == name) return static_cast<Errc>(i);
    }
    return std::nullopt;
}

}  // namespace ragbench
