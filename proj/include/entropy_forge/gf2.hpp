#pragma once

#include <cstdint>

#include "entropy_forge/errors.hpp"

namespace ef {

/**
 * Binary field GF(2^s), 1 <= s <= 64. Elements are s-bit values whose bits
 * are the coefficients of a polynomial over GF(2); arithmetic is carry-less
 * multiplication reduced modulo an irreducible polynomial of degree s.
 *
 * The modulus is stored as the mask of its low s coefficients (the x^s term
 * is implicit). standard() picks a fixed low-weight irreducible per degree;
 * for s <= 16 irreducibility is re-verified by an exhaustive divisor sweep at
 * construction, larger degrees trust the built-in table.
 */
struct FieldSpec {
    int s = 1;
    uint64_t modulus = 1;  // low-s coefficient mask

    static FieldSpec standard(int s);
    static FieldSpec with_modulus(int s, uint64_t modulus_low_bits);

    uint64_t mask() const { return s == 64 ? ~uint64_t(0) : ((uint64_t(1) << s) - 1); }
    bool operator==(const FieldSpec&) const = default;
};

struct FieldElement {
    uint64_t bits = 0;
};

// Carry-less product reduced modulo f. Raw u64 form for inner loops.
uint64_t gf_mul_raw(uint64_t a, uint64_t b, const FieldSpec& f);

FieldElement gf_mul(FieldElement a, FieldElement b, const FieldSpec& f);
FieldElement gf_add(FieldElement a, FieldElement b, const FieldSpec& f);
FieldElement gf_pow(FieldElement a, uint64_t e, const FieldSpec& f);

// Exhaustive divisor test, practical for degree <= 16.
bool poly_irreducible_smalldeg(int s, uint64_t modulus_low_bits);

}  // namespace ef
