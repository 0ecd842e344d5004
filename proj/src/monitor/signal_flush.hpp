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

#include <functional>

namespace ragbench::monitor {

// Process-wide SIGINT/SIGTERM handling. The handler only writes the signal
// number to a pipe; a watcher thread then runs the registered callbacks in
// registration order, outside signal context. If any callback returns true
// the default disposition is restored and the signal re-raised.
using SignalCallback = std::function<bool(int signo)>;

int add_signal_callback(SignalCallback cb);
void remove_signal_callback(int token);

}  // namespace ragbench::monitor
