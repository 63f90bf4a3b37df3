#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entropy_forge/bits.hpp"
#include "entropy_forge/frac.hpp"
#include "entropy_forge/gf2.hpp"
#include "entropy_forge/rng.hpp"

namespace ef {

/**
 * Keyed hash families used by the protocols.
 *
 *  boolean-matrix          h(x) = M x over GF(2), key = range x domain matrix
 *  field-multiply-truncate h(x) = k * x over GF(2^domain), low range bits
 *  poly-ell-wise           h(x) = sum h_i x^i over GF(2^domain), low range bits
 *  inner-product-bit       h(x) = <k, x> mod 2
 *  tcr-standin             keyed compressing stand-in for a target-collision-
 *                          resistant family; see TcrMode
 *
 * Truncation convention everywhere: "first t bits" of a field element are the
 * t least-significant coefficient bits.
 */
enum class HashKind {
    BooleanMatrix,
    FieldMultiplyTruncate,
    PolyEllWise,
    InnerProductBit,
    TcrStandin,
};

// tcr-standin instantiations: an oracle-backed lazily-tabulated random
// function per key (statistically TCR at desk scale), or a cheap keyed
// xor-rotate-multiply mix for protocol plumbing. Computational TCR strength
// is an assumption either way, not a tested property.
enum class TcrMode { OracleBacked, KeyedMix };

const char* hash_kind_name(HashKind k);
HashKind hash_kind_from_name(const std::string& name);

struct HashFamilySpec {
    HashKind kind = HashKind::BooleanMatrix;
    int domain_bits = 0;
    int range_bits = 0;
    int ell = 1;                            // poly-ell-wise independence order
    TcrMode tcr_mode = TcrMode::OracleBacked;
    uint64_t tcr_instance = 0;              // seeds the oracle-backed table

    int key_bits() const;
    FieldSpec field() const;                // for the field-based kinds
    void validate() const;
    bool operator==(const HashFamilySpec&) const = default;
};

struct HashFunction {
    HashFamilySpec family;
    Bits key;
};

HashFunction sample_hash(const HashFamilySpec& family, SeedStream& rng);
Bits eval_hash(const HashFunction& h, const Bits& x);

// Fast path for exhaustive sweeps; requires domain, range and key widths
// all <= 64. The slow Bits path delegates here when it can.
uint64_t eval_hash_raw(const HashFamilySpec& family, uint64_t key, uint64_t x);

// Exact Pr_h[h(x) = h(x2)] by full key enumeration (key space <= 2^24).
Frac exact_collision_probability(const HashFamilySpec& family, const Bits& x, const Bits& x2);

// Exact SD((H, H(X)), (H, U_range)) for X uniform on `subset`, by full
// enumeration of keys and subset elements.
Frac leftover_hash_distance(const HashFamilySpec& family, const std::vector<Bits>& subset);

// 1/2 * 2^((range - k)/2): the extractor budget for a source of Renyi
// entropy k hashed to range bits.
double leftover_hash_budget(int range_bits, double renyi2_entropy);

// Exact joint-uniformity check for an ell-wise family: over all keys, the
// tuple (h(x_1),...,h(x_ell)) must hit every value combination equally often.
bool ell_wise_joint_uniform_exact(const HashFamilySpec& family, const std::vector<Bits>& inputs);

// tcr-standin surface.
HashFunction tcr_sample(const HashFamilySpec& family, SeedStream& rng);
Bits tcr_eval(const HashFunction& h, const Bits& x);

// The TCR experiment at desk scale: fix target x, sample a key, search the
// whole domain for a collider. Unbounded search wins almost always, so the
// report carries both the find rate and the per-query collision rate (whose
// expectation is 2^-range for the oracle-backed family).
struct TcrExperimentReport {
    uint64_t trials = 0;
    uint64_t found = 0;
    double find_rate = 0.0;
    double per_query_collision_rate = 0.0;
};
TcrExperimentReport tcr_experiment(const HashFamilySpec& family, const Bits& target,
                                   uint64_t trials, SeedStream& rng);

}  // namespace ef
