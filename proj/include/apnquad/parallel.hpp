// parallel.hpp
//
// Static-partition parallel loops over index ranges, plus the fixed PRNG used
// by every sampled mode (splitmix64, so --seed reproduces across platforms).

#pragma once

#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace apnquad {

inline unsigned worker_count(unsigned requested = 0) {
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("APNQUAD_THREADS")) {
        long v = std::atol(env);
        if (v > 0)
            return unsigned(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// fn(worker_id, begin, end) over a static partition of [begin, end);
// the first worker exception is rethrown on the calling thread
template <class Fn>
void parallel_chunks(std::uint64_t begin, std::uint64_t end, Fn&& fn, unsigned threads = 0) {
    if (end <= begin)
        return;
    std::uint64_t total = end - begin;
    unsigned nw = worker_count(threads);
    if (nw > total)
        nw = unsigned(total);
    if (nw <= 1) {
        fn(0u, begin, end);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nw);
    pool.reserve(nw);
    std::uint64_t chunk = total / nw, extra = total % nw, lo = begin;
    for (unsigned w = 0; w < nw; ++w) {
        std::uint64_t hi = lo + chunk + (w < extra ? 1 : 0);
        pool.emplace_back([&fn, &errors, w, lo, hi] {
            try {
                fn(w, lo, hi);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
        lo = hi;
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

// per-index fn(i); convenience wrapper
template <class Fn>
void parallel_for(std::uint64_t begin, std::uint64_t end, Fn&& fn, unsigned threads = 0) {
    parallel_chunks(
        begin, end,
        [&fn](unsigned, std::uint64_t lo, std::uint64_t hi) {
            for (std::uint64_t i = lo; i < hi; ++i)
                fn(i);
        },
        threads);
}

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, bound) by rejection; bound > 0
    std::uint64_t below(std::uint64_t bound) {
        std::uint64_t limit = ~0ull - ~0ull % bound;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % bound;
    }
};

} // namespace apnquad
