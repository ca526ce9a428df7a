#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "kwcdf/errors.hpp"

namespace kwcdf {

/// Result of one task: a value, or the message of a NumericError it raised.
template <class T>
struct Outcome {
    std::optional<T> value;
    std::string error;

    bool ok() const { return value.has_value(); }
};

/// Runs f(0..n-1) on `jobs` workers that pull indices from a shared counter.
/// Results are stored by index, so the output never depends on scheduling.
/// NumericErrors are captured per task; any other exception is rethrown after
/// all workers have stopped.
template <class T, class F>
std::vector<Outcome<T>> parallel_map(std::size_t n, std::size_t jobs, F&& f) {
    std::vector<Outcome<T>> out(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr fatal;
    std::atomic_flag fatal_set = ATOMIC_FLAG_INIT;

    auto worker = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i].value.emplace(f(i));
            } catch (const NumericError& e) {
                out[i].error = e.what();
            } catch (...) {
                if (!fatal_set.test_and_set()) fatal = std::current_exception();
                stop = true;
            }
        }
    };

    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (fatal) std::rethrow_exception(fatal);
    return out;
}

inline std::size_t default_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace kwcdf
