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

#include "monitor/signal_flush.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <csignal>
#include <map>
#include <mutex>
#include <thread>

#include "common/error.hpp"

namespace ragbench::monitor {

namespace {

int g_pipe[2] = {-1, -1};

struct Registry {
    std::recursive_mutex mu;  // held while callbacks run; callbacks may unregister
    std::map<int, SignalCallback> callbacks;
    int next_token = 1;
    bool installed = false;
};

Registry& registry() {
    static Registry* r = new Registry();  // outlives static destruction order
    return *r;
}

extern "C" void on_signal(int signo) {
    const unsigned char b = static_cast<unsigned char>(signo);
    [[maybe_unused]] auto n = ::write(g_pipe[1], &b, 1);
}

void watcher() {
    for (;;) {
        unsigned char b = 0;
        const auto n = ::read(g_pipe[0], &b, 1);
        if (n <= 0) continue;
        const int signo = b;
        bool reraise = false;
        {
            std::scoped_lock lk(registry().mu);
            const auto cbs = registry().callbacks;
            for (const auto& [token, cb] : cbs) reraise = cb(signo) || reraise;
        }
        if (reraise) {
            std::signal(signo, SIG_DFL);
            std::raise(signo);
        }
    }
}

void install_locked(Registry& r) {
    if (r.installed) return;
    if (::pipe2(g_pipe, O_CLOEXEC) != 0) fail(Errc::kIo, "cannot create signal pipe");
    struct sigaction sa {};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    sa.sa_flags = SA_RESTART;
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);
    std::thread(watcher).detach();
    r.installed = true;
}

}  // namespace

int add_signal_callback(SignalCallback cb) {
    auto& r = registry();
    std::scoped_lock lk(r.mu);
    install_locked(r);
    const int token = r.next_token++;
    r.callbacks.emplace(token, std::move(cb));
    return token;
}

void remove_signal_callback(int token) {
    auto& r = registry();
    std::scoped_lock lk(r.mu);
    r.callbacks.erase(token);
}

}  // namespace ragbench::monitor
