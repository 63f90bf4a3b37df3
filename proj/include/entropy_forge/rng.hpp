#pragma once

#include <cstdint>
#include <string_view>

#include "entropy_forge/bits.hpp"

namespace ef {

/**
 * Deterministic counter-based seed stream.
 *
 * A stream is (key, counter); each output word is a strong mix of the two, so
 * streams can be split by deriving child keys from labels without perturbing
 * the parent's sequence. One master seed therefore pins every random draw of
 * a run, and adding a draw inside one module does not shift another module's
 * stream.
 */
class SeedStream {
public:
    explicit SeedStream(uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc908ull)) {}

    SeedStream child(std::string_view label) const {
        uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the label
        for (char c : label) {
            h ^= (uint8_t)c;
            h *= 0x100000001b3ull;
        }
        return SeedStream(key_ ^ mix(h), 0);
    }
    SeedStream child(uint64_t tag) const { return SeedStream(key_ ^ mix(tag ^ 0x9e3779b97f4a7c15ull), 0); }

    uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

    // Uniform in [0, n) by rejection; exact.
    uint64_t below(uint64_t n) {
        if (n == 0) throw ParamError("SeedStream::below(0)");
        if ((n & (n - 1)) == 0) return next_u64() & (n - 1);
        uint64_t lim = ~uint64_t(0) - ~uint64_t(0) % n;
        for (;;) {
            uint64_t v = next_u64();
            if (v < lim) return v % n;
        }
    }

    // Exact Bernoulli(num/den).
    bool bernoulli(uint64_t num, uint64_t den) { return below(den) < num; }

    Bits bits(int width) {
        Bits out = Bits::zeros(width);
        uint64_t word = 0;
        int have = 0;
        for (int i = 0; i < width; ++i) {
            if (have == 0) {
                word = next_u64();
                have = 64;
            }
            if (word & 1) out.set_bit(i, 1);
            word >>= 1;
            --have;
        }
        return out;
    }

private:
    SeedStream(uint64_t key, uint64_t ctr) : key_(key), ctr_(ctr) {}

    static uint64_t mix(uint64_t z) {  // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t key_;
    uint64_t ctr_ = 0;
};

}  // namespace ef
