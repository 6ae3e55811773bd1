// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/parallel.hpp"

namespace rgs {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads = n < 0 ? 0 : n; }

int thread_count() {
    const int n = g_threads.load();
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace rgs
