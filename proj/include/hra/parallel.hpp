// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hra {

/// 0 means "all hardware threads".
inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Splits [0, n) into `threads` contiguous blocks and calls fn(begin, end, block)
/// for each. Block boundaries depend only on n and the thread count, so callers
/// that merge per-block results in block order get thread-count independent output
/// as long as they never reduce across blocks in a thread-dependent way.
template <class Fn>
void parallel_for(unsigned threads, std::size_t n, Fn &&fn) {
    threads = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1)));
    if (threads <= 1 || n < 2) {
        fn(std::size_t{0}, n, 0u);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    auto run = [&](unsigned block) {
        const std::size_t begin = n * block / threads;
        const std::size_t end   = n * (block + 1) / threads;
        try {
            fn(begin, end, block);
        } catch (...) {
            errors[block] = std::current_exception();
        }
    };
    for (unsigned b = 1; b < threads; ++b) pool.emplace_back(run, b);
    run(0);
    for (auto &t : pool) t.join();
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace hra
