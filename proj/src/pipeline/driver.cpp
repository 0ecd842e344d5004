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

#include "pipeline/driver.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>

#include "common/clock.hpp"
#include "common/error.hpp"

namespace ragbench::pipeline {

namespace {

using workload::OperationKind;
using workload::Request;

class WorkerPool {
 public:
    explicit WorkerPool(std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) threads_.emplace_back([this] { loop(); });
    }

    ~WorkerPool() {
        {
            std::scoped_lock lk(mu_);
            done_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    // Blocks while `limit` tasks are already queued or running.
    void submit(std::function<void()> task, std::size_t limit) {
        std::unique_lock lk(mu_);
        idle_cv_.wait(lk, [&] { return outstanding_ < limit; });
        ++outstanding_;
        queue_.push_back(std::move(task));
        cv_.notify_one();
    }

    void drain() {
        std::unique_lock lk(mu_);
        idle_cv_.wait(lk, [&] { return outstanding_ == 0; });
    }

 private:
    void loop() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock lk(mu_);
                cv_.wait(lk, [&] { return done_ || !queue_.empty(); });
                if (queue_.empty()) return;
                task = std::move(queue_.front());
                queue_.pop_front();
            }
            task();
            {
                std::scoped_lock lk(mu_);
                --outstanding_;
            }
            idle_cv_.notify_all();
        }
    }

    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    std::deque<std::function<void()>> queue_;
    std::size_t outstanding_ = 0;
    bool done_ = false;
    std::vector<std::thread> threads_;
};

std::vector<StageTiming> rebase(std::vector<StageTiming> timings, std::int64_t origin) {
    for (auto& t : timings) {
        t.start_ns -= origin;
        t.end_ns -= origin;
    }
    return timings;
}

}  // namespace

DriverResult run_requests(Pipeline& pipeline, const RequestSource& source, const DriverOptions& options,
                          RequestLogWriter* log) {
    if (options.workers == 0) fail(Errc::kInvalidArgument, "driver needs at least one worker");
    if (options.batch_size == 0) fail(Errc::kInvalidArgument, "batch size must be >= 1");

    DriverResult result;
    std::mutex result_mu;
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};

    const std::int64_t origin = monotonic_ns();
    result.run_start_ns = origin;
    const std::optional<std::int64_t> deadline =
        options.duration_s ? std::optional<std::int64_t>(origin + static_cast<std::int64_t>(*options.duration_s * 1e9))
                           : std::nullopt;

    auto publish = [&](RequestRecord rec) {
        if (log != nullptr) log->submit(rec);
        std::scoped_lock lk(result_mu);
        ++result.completed;
        if (rec.kind == OperationKind::kQuery) ++result.completed_queries;
        result.records.push_back(std::move(rec));
    };

    auto record_error = [&](const std::exception_ptr& e) {
        std::scoped_lock lk(result_mu);
        if (!first_error) first_error = e;
        failed = true;
    };

    auto run_batch = [&](std::vector<Request> batch) {
        try {
            std::vector<workload::QAEntry> qas;
            qas.reserve(batch.size());
            for (const auto& r : batch) qas.push_back(*r.qa);
            auto outs = pipeline.handle_query_batch(qas);
            for (std::size_t i = 0; i < batch.size(); ++i) {
                RequestRecord rec;
                rec.sequence_no = batch[i].sequence_no;
                rec.kind = OperationKind::kQuery;
                rec.target = batch[i].qa->target_file_id;
                rec.qa = batch[i].qa;
                rec.retrieved_ids = std::move(outs[i].retrieved_ids);
                rec.reranked_ids = std::move(outs[i].reranked_ids);
                rec.answer_text = std::move(outs[i].answer_text);
                rec.scanned_vectors = outs[i].scanned_vectors;
                rec.stages = rebase(std::move(outs[i].timings), origin);
                rec.start_ns = outs[i].start_ns - origin;
                rec.end_ns = outs[i].end_ns - origin;
                if (batch[i].scheduled_at_ns) rec.scheduled_ns = batch[i].scheduled_at_ns;
                rec.ttft_ms = outs[i].ttft_ms;
                rec.tpot_ms = outs[i].tpot_ms;
                publish(std::move(rec));
            }
        } catch (...) {
            record_error(std::current_exception());
        }
    };

    {
        WorkerPool pool(options.workers);
        std::vector<Request> pending;
        auto flush_pending = [&] {
            if (pending.empty()) return;
            pool.submit([&run_batch, b = std::move(pending)]() mutable { run_batch(std::move(b)); }, options.workers);
            pending.clear();
        };

        std::optional<Request> lookahead;
        for (;;) {
            if (failed || (options.stop != nullptr && options.stop->load())) {
                result.interrupted = options.stop != nullptr && options.stop->load();
                break;
            }
            if (deadline && monotonic_ns() >= *deadline) break;

            std::optional<Request> req = lookahead ? std::move(lookahead) : source();
            lookahead.reset();
            if (!req) break;

            if (options.open_loop && req->scheduled_at_ns) {
                const std::int64_t due = origin + *req->scheduled_at_ns;
                if (monotonic_ns() < due) {
                    flush_pending();
                    std::this_thread::sleep_until(Clock::time_point(std::chrono::nanoseconds(due)));
                }
            }

            if (req->kind == OperationKind::kQuery) {
                if (!req->qa) fail(Errc::kInternal, "query request without a question");
                pending.push_back(std::move(*req));
                if (pending.size() >= options.batch_size) flush_pending();
                continue;
            }

            flush_pending();
            pool.drain();
            if (failed) break;
            try {
                auto out = pipeline.apply_update(*req);
                RequestRecord rec;
                rec.sequence_no = req->sequence_no;
                rec.kind = req->kind;
                rec.target = req->kind == OperationKind::kInsert ? req->insert_file_id.value_or("")
                                                                  : req->target_file_id.value_or("");
                rec.rebuilds = out.rebuilds;
                rec.rebuild_ns = out.rebuild_ns;
                rec.stages = rebase(out.timings, origin);
                rec.start_ns = out.start_ns - origin;
                rec.end_ns = out.end_ns - origin;
                if (req->scheduled_at_ns) rec.scheduled_ns = req->scheduled_at_ns;
                publish(std::move(rec));
                if (options.on_write) options.on_write(*req, out);
            } catch (...) {
                record_error(std::current_exception());
                break;
            }
        }
        flush_pending();
        pool.drain();
    }

    result.wall_ns = monotonic_ns() - origin;
    std::sort(result.records.begin(), result.records.end(),
              [](const RequestRecord& a, const RequestRecord& b) { return a.sequence_no < b.sequence_no; });
    if (first_error) std::rethrow_exception(first_error);
    return result;
}

}  // namespace ragbench::pipeline
