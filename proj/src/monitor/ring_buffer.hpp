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
#include <mutex>
#include <vector>

#include "monitor/trace_format.hpp"

namespace ragbench::monitor {

// Fixed-capacity byte ring holding encoded trace records. The capacity need
// not be a multiple of the record size, so a record may straddle the end of
// the storage. When full, the oldest whole records are overwritten. Storage
// grows on demand up to the capacity.
class RecordRing {
 public:
    explicit RecordRing(std::size_t capacity_bytes);

    // Returns true when at least one older record was overwritten.
    bool push(const TraceRecord& r);
    // Appends all buffered records (oldest first) as encoded bytes and empties
    // the ring. Returns the number of records moved.
    std::size_t drain(std::vector<std::uint8_t>& out);

    std::uint64_t dropped() const;
    std::uint64_t pushed() const;
    std::size_t buffered_records() const;
    std::size_t capacity_bytes() const { return capacity_; }
    std::size_t allocated_bytes() const;

 private:
    mutable std::mutex mu_;
    std::size_t capacity_;
    std::vector<std::uint8_t> buf_;
    std::size_t head_ = 0;  // byte offset of the oldest record
    std::size_t size_ = 0;  // bytes in use, a multiple of kRecordBytes
    std::uint64_t dropped_ = 0;
    std::uint64_t pushed_ = 0;
};

}  // namespace ragbench::monitor
