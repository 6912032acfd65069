#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ambientloc/error.hpp"

namespace ambientloc {

/// Shortest round-trip decimal form of a double (used by all file writers,
/// so that identical values always serialize to identical bytes).
inline std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& what = "value") {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        fail("invalid number for " + what + ": '" + std::string(s) + "'");
    return v;
}

inline long long parse_int(std::string_view s, const std::string& what = "value") {
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        fail("invalid integer for " + what + ": '" + std::string(s) + "'");
    return v;
}

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Thread cap for internal parallelism. AMBIENTLOC_THREADS overrides; 0 or
/// unset means hardware concurrency.
inline unsigned max_threads() {
    if (const char* env = std::getenv("AMBIENTLOC_THREADS")) {
        char* end = nullptr;
        long n = std::strtol(env, &end, 10);
        if (end != env && n > 0)
            return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Index-parallel loop. Results must be written to per-index slots so that
/// parallel and serial schedules agree bit-for-bit.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    unsigned threads = max_threads();
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    if (threads > count)
        threads = static_cast<unsigned>(count);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += threads)
                body(i);
        });
    }
    for (auto& th : pool)
        th.join();
}

}
