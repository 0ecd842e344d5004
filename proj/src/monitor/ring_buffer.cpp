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

#include "monitor/ring_buffer.hpp"

#include <algorithm>
#include <cstring>

#include "common/error.hpp"

namespace ragbench::monitor {

namespace {
constexpr std::size_t kInitialBytes = 4096;
}  // namespace

RecordRing::RecordRing(std::size_t capacity_bytes) : capacity_(capacity_bytes) {
    if (capacity_ < kRecordBytes) fail(Errc::kInvalidArgument, "ring capacity smaller than one record");
}

bool RecordRing::push(const TraceRecord& r) {
    std::uint8_t enc[kRecordBytes];
    encode_record(r, enc);
    std::scoped_lock lk(mu_);
    // Storage grows geometrically up to capacity. Nothing has been dropped
    // before it is fully grown, so head_ is still 0 and the data is linear.
    if (buf_.size() < capacity_ && size_ + kRecordBytes > buf_.size()) {
        const std::size_t grown = std::min(capacity_, std::max({size_ + kRecordBytes, buf_.size() * 2, kInitialBytes}));
        buf_.reserve(grown);
        buf_.resize(grown);
    }
    bool dropped = false;
    while (capacity_ - size_ < kRecordBytes) {
        head_ = (head_ + kRecordBytes) % capacity_;
        size_ -= kRecordBytes;
        ++dropped_;
        dropped = true;
    }
    const std::size_t tail = (head_ + size_) % capacity_;
    const std::size_t first = std::min(kRecordBytes, capacity_ - tail);
    std::memcpy(buf_.data() + tail, enc, first);
    if (first < kRecordBytes) std::memcpy(buf_.data(), enc + first, kRecordBytes - first);
    size_ += kRecordBytes;
    ++pushed_;
    return dropped;
}

std::size_t RecordRing::drain(std::vector<std::uint8_t>& out) {
    std::scoped_lock lk(mu_);
    const std::size_t first = std::min(size_, capacity_ - head_);
    out.insert(out.end(), buf_.begin() + static_cast<std::ptrdiff_t>(head_),
               buf_.begin() + static_cast<std::ptrdiff_t>(head_ + first));
    out.insert(out.end(), buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(size_ - first));
    const std::size_t n = size_ / kRecordBytes;
    head_ = 0;
    size_ = 0;
    return n;
}

std::uint64_t RecordRing::dropped() const {
    std::scoped_lock lk(mu_);
    return dropped_;
}

std::uint64_t RecordRing::pushed() const {
    std::scoped_lock lk(mu_);
    return pushed_;
}

std::size_t RecordRing::buffered_records() const {
    std::scoped_lock lk(mu_);
    return size_ / kRecordBytes;
}

std::size_t RecordRing::allocated_bytes() const {
    std::scoped_lock lk(mu_);
    return buf_.capacity();
}

}  // namespace ragbench::monitor
