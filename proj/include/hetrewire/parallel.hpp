#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hetrewire {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
    static std::atomic<unsigned> n{0};
    return n;
}
}  // namespace detail

/// 0 means "available parallelism".
inline void set_num_threads(unsigned n) { detail::thread_setting().store(n); }

inline unsigned num_threads() {
    const unsigned n = detail::thread_setting().load();
    if (n != 0) return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `fn(begin, end)` over fixed-size chunks of [0, n).
///
/// Chunk boundaries depend only on `grain`, never on the thread count, so any
/// per-chunk computation produces bit-identical output regardless of how many
/// workers execute it. Workers write to disjoint outputs; no reduction happens
/// here.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t grain, Fn&& fn) {
    if (n == 0) return;
    grain = std::max<std::size_t>(grain, 1);
    const std::size_t chunks = (n + grain - 1) / grain;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(num_threads(), chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) fn(c * grain, std::min(n, (c + 1) * grain));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            try {
                fn(c * grain, std::min(n, (c + 1) * grain));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace hetrewire
