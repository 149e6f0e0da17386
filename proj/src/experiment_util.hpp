#pragma once

// Internal helpers shared by the command implementations. Not installed.

#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace todlab::detail {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Returns one
// exception_ptr per index (null = success). Deterministic outputs are the
// caller's job: fn must write only to its own slot.
template <typename Fn>
std::vector<std::exception_ptr> parallel_map(std::size_t n, int jobs, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    if (n == 0) return errors;
    const std::size_t workers =
        jobs <= 1 ? 1 : std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
        return errors;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        threads.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (std::thread& t : threads) t.join();
    return errors;
}

inline std::string describe(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& ex) {
        return ex.what();
    } catch (...) {
        return "unknown error";
    }
}

struct Stats {
    double mean = 0.0;
    double stddev = 0.0;  // population
};

inline Stats stats(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    double sq = 0.0;
    for (double x : v) sq += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(v.size()));
    return s;
}

}  // namespace todlab::detail
