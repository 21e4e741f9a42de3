#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace lqglab {

// Philox4x32-10 counter-based generator. A (seed, stream) pair selects the key,
// so independent streams can be handed to workers without coordination.
class Philox {
public:
    using result_type = std::uint64_t;

    Philox(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ == 2) refill();
        return buf_[pos_++];
    }

    // Random access: the i-th 64-bit word of the block stream, without touching state.
    static std::uint64_t at(std::uint64_t seed, std::uint64_t stream, std::uint64_t i) noexcept {
        std::array<std::uint32_t, 2> k{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
        std::array<std::uint32_t, 4> c{static_cast<std::uint32_t>(i >> 1), static_cast<std::uint32_t>(i >> 33),
                                       static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        auto out = block(c, k);
        return (i & 1) ? (std::uint64_t(out[3]) << 32 | out[2]) : (std::uint64_t(out[1]) << 32 | out[0]);
    }

private:
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) noexcept {
        constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u, W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
        for (int r = 0; r < 10; ++r) {
            std::uint64_t p0 = std::uint64_t(M0) * c[0];
            std::uint64_t p1 = std::uint64_t(M1) * c[2];
            c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ c[3] ^ k[1],
                 std::uint32_t(p0)};
            k[0] += W0;
            k[1] += W1;
        }
        return c;
    }

    void refill() noexcept {
        auto out = block(ctr_, key_);
        buf_[0] = std::uint64_t(out[1]) << 32 | out[0];
        buf_[1] = std::uint64_t(out[3]) << 32 | out[2];
        pos_ = 0;
        if (++ctr_[0] == 0) ++ctr_[1];
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint64_t, 2> buf_{};
    int pos_ = 2;
};

inline double uniform01(Philox& g) { return (g() >> 11) * 0x1.0p-53; }

inline std::uint64_t uniform_below(Philox& g, std::uint64_t n) {
    // rejection against the largest multiple of n, exact for every n > 0
    constexpr std::uint64_t top = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t lim = top - top % n;
    for (;;) {
        std::uint64_t x = g();
        if (x < lim) return x % n;
    }
}

// Standard normal by Marsaglia polar method; portable across standard libraries.
inline double normal01(Philox& g) {
    for (;;) {
        double u = 2.0 * uniform01(g) - 1.0, v = 2.0 * uniform01(g) - 1.0;
        double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

inline int thread_count(int requested = 0) {
    if (const char* env = std::getenv("LQGLAB_THREADS")) {
        int t = std::atoi(env);
        if (t > 0) return t;
    }
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

// Static block partition; fn(i, worker) for i in [0, n).
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    threads = std::max(1, std::min<int>(threads, int(n ? n : 1)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i, 0);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            std::size_t lo = n * t / threads, hi = n * (t + 1) / threads;
            for (std::size_t i = lo; i < hi; ++i) fn(i, t);
        });
    for (auto& th : pool) th.join();
}

}  // namespace lqglab
