#include "entropy_forge/gf2.hpp"

#include <array>

namespace ef {

namespace {

// Low-weight irreducible polynomial per degree, encoded as the mask of the
// low s coefficients (x^s implicit). Trinomials where they exist, else
// pentanomials; degrees <= 16 are re-verified exhaustively on construction
// and the full table is covered by a unit test.
constexpr uint64_t kIrreducibleTail[65] = {
    0,
    0x0000000000000001ull,  // s=1   x + 1
    0x0000000000000003ull,  // s=2
    0x0000000000000003ull,  // s=3   x^3 + x + 1
    0x0000000000000003ull,  // s=4
    0x0000000000000005ull,  // s=5
    0x0000000000000003ull,  // s=6
    0x0000000000000003ull,  // s=7
    0x000000000000001bull,  // s=8   x^8 + x^4 + x^3 + x + 1
    0x0000000000000003ull,  // s=9
    0x0000000000000009ull,  // s=10
    0x0000000000000005ull,  // s=11
    0x0000000000000009ull,  // s=12
    0x000000000000001bull,  // s=13
    0x0000000000000021ull,  // s=14
    0x0000000000000003ull,  // s=15
    0x000000000000002bull,  // s=16
    0x0000000000000009ull,  // s=17
    0x0000000000000009ull,  // s=18
    0x0000000000000027ull,  // s=19
    0x0000000000000009ull,  // s=20
    0x0000000000000005ull,  // s=21
    0x0000000000000003ull,  // s=22
    0x0000000000000021ull,  // s=23
    0x000000000000001bull,  // s=24
    0x0000000000000009ull,  // s=25
    0x000000000000001bull,  // s=26
    0x0000000000000027ull,  // s=27
    0x0000000000000003ull,  // s=28
    0x0000000000000005ull,  // s=29
    0x0000000000000003ull,  // s=30
    0x0000000000000009ull,  // s=31
    0x000000000000008dull,  // s=32
    0x0000000000000401ull,  // s=33
    0x0000000000000081ull,  // s=34
    0x0000000000000005ull,  // s=35
    0x0000000000000201ull,  // s=36
    0x0000000000000053ull,  // s=37
    0x0000000000000063ull,  // s=38
    0x0000000000000011ull,  // s=39
    0x0000000000000039ull,  // s=40
    0x0000000000000009ull,  // s=41
    0x0000000000000081ull,  // s=42
    0x0000000000000059ull,  // s=43
    0x0000000000000021ull,  // s=44
    0x000000000000001bull,  // s=45
    0x0000000000000003ull,  // s=46
    0x0000000000000021ull,  // s=47
    0x000000000000002dull,  // s=48
    0x0000000000000201ull,  // s=49
    0x000000000000001dull,  // s=50
    0x000000000000004bull,  // s=51
    0x0000000000000009ull,  // s=52
    0x0000000000000047ull,  // s=53
    0x0000000000000201ull,  // s=54
    0x0000000000000081ull,  // s=55
    0x0000000000000095ull,  // s=56
    0x0000000000000011ull,  // s=57
    0x0000000000080001ull,  // s=58
    0x0000000000000095ull,  // s=59
    0x0000000000000003ull,  // s=60
    0x0000000000000027ull,  // s=61
    0x0000000020000001ull,  // s=62
    0x0000000000000003ull,  // s=63
    0x000000000000001bull,  // s=64
};

// Degree of a polynomial with the degree-s term explicit in bit s.
int poly_deg(unsigned __int128 p) {
    int d = -1;
    for (int i = 0; i < 128; ++i)
        if ((p >> i) & 1) d = i;
    return d;
}

unsigned __int128 poly_mod(unsigned __int128 a, unsigned __int128 b) {
    int db = poly_deg(b);
    for (int da = poly_deg(a); da >= db; da = poly_deg(a)) a ^= b << (da - db);
    return a;
}

}  // namespace

bool poly_irreducible_smalldeg(int s, uint64_t tail) {
    if (s < 1 || s > 16) throw ParamError("poly_irreducible_smalldeg: degree out of range");
    unsigned __int128 f = ((unsigned __int128)1 << s) | tail;
    if (s == 1) return true;  // x and x+1
    if ((tail & 1) == 0) return false;  // divisible by x
    for (int d = 1; 2 * d <= s; ++d) {
        for (uint64_t t = 0; t < (uint64_t(1) << d); ++t) {
            unsigned __int128 div = ((unsigned __int128)1 << d) | t;
            if (poly_mod(f, div) == 0) return false;
        }
    }
    return true;
}

FieldSpec FieldSpec::with_modulus(int s, uint64_t tail) {
    if (s < 1 || s > 64) throw ParamError("FieldSpec: degree must be in [1,64]");
    FieldSpec f{s, tail & (s == 64 ? ~uint64_t(0) : ((uint64_t(1) << s) - 1))};
    if (s <= 16 && !poly_irreducible_smalldeg(s, f.modulus))
        throw ParamError("FieldSpec: modulus is reducible");
    return f;
}

FieldSpec FieldSpec::standard(int s) {
    if (s < 1 || s > 64) throw ParamError("FieldSpec: degree must be in [1,64]");
    // verify the small-degree entries once, then serve from the cache;
    // hash evaluation calls this in tight enumeration loops
    static const std::array<FieldSpec, 65> cache = [] {
        std::array<FieldSpec, 65> table{};
        for (int d = 1; d <= 64; ++d) table[d] = with_modulus(d, kIrreducibleTail[d]);
        return table;
    }();
    return cache[s];
}

uint64_t gf_mul_raw(uint64_t a, uint64_t b, const FieldSpec& f) {
    uint64_t r = 0;
    uint64_t hi = uint64_t(1) << (f.s - 1);
    uint64_t mask = f.mask();
    a &= mask;
    for (int i = 0; i < f.s; ++i) {
        if (b & 1) r ^= a;
        b >>= 1;
        bool carry = (a & hi) != 0;
        a = (a << 1) & mask;
        if (carry) a ^= f.modulus;
    }
    return r;
}

FieldElement gf_mul(FieldElement a, FieldElement b, const FieldSpec& f) {
    uint64_t mask = f.mask();
    if ((a.bits & ~mask) || (b.bits & ~mask)) throw ParamError("gf_mul: element outside field");
    return {gf_mul_raw(a.bits, b.bits, f)};
}

FieldElement gf_add(FieldElement a, FieldElement b, const FieldSpec& f) {
    uint64_t mask = f.mask();
    if ((a.bits & ~mask) || (b.bits & ~mask)) throw ParamError("gf_add: element outside field");
    return {a.bits ^ b.bits};
}

FieldElement gf_pow(FieldElement a, uint64_t e, const FieldSpec& f) {
    uint64_t r = 1, base = a.bits & f.mask();
    while (e) {
        if (e & 1) r = gf_mul_raw(r, base, f);
        base = gf_mul_raw(base, base, f);
        e >>= 1;
    }
    return {r};
}

}  // namespace ef
