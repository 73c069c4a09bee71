#pragma once

#include <cstdint>

namespace harmonet {

/// Counter-based splittable generator (Philox4x32-10). Streams are keyed by
/// (seed, stream, worker, replicate); draws advance only the counter, so any
/// (key, counter) pair is reproducible independently of call order.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint32_t worker,
               std::uint32_t replicate) {
        std::uint64_t k = splitmix(seed ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
        key0_ = static_cast<std::uint32_t>(k);
        key1_ = static_cast<std::uint32_t>(k >> 32);
        ctr2_ = worker;
        ctr3_ = replicate;
    }

    std::uint32_t next_u32() {
        if (avail_ == 0) refill();
        return buf_[--avail_];
    }

    std::uint64_t next_u64() {
        std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in {0, ..., n-1} (rejection sampling; unbiased).
    std::uint32_t next_below(std::uint32_t n) {
        std::uint64_t bound = (std::uint64_t(1) << 32) - ((std::uint64_t(1) << 32) % n);
        for (;;) {
            std::uint32_t r = next_u32();
            if (r < bound) return r % n;
        }
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    void refill() {
        std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
        std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
        std::uint32_t c2 = ctr2_, c3 = ctr3_;
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = 0xD2511F53ull * c0;
            std::uint64_t p1 = 0xCD9E8D57ull * c2;
            std::uint32_t h0 = static_cast<std::uint32_t>(p0 >> 32);
            std::uint32_t l0 = static_cast<std::uint32_t>(p0);
            std::uint32_t h1 = static_cast<std::uint32_t>(p1 >> 32);
            std::uint32_t l1 = static_cast<std::uint32_t>(p1);
            c0 = h1 ^ c1 ^ k0;
            c1 = l1;
            c2 = h0 ^ c3 ^ k1;
            c3 = l0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_[0] = c0;
        buf_[1] = c1;
        buf_[2] = c2;
        buf_[3] = c3;
        avail_ = 4;
        ++counter_;
    }

    std::uint32_t key0_, key1_;
    std::uint32_t ctr2_, ctr3_;
    std::uint64_t counter_ = 0;
    std::uint32_t buf_[4]{};
    int avail_ = 0;
};

}  // namespace harmonet
