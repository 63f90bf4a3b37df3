#include "entropy_forge/hashing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <unordered_map>

#include "entropy_forge/errors.hpp"

namespace ef {

const char* hash_kind_name(HashKind k) {
    switch (k) {
        case HashKind::BooleanMatrix: return "boolean-matrix";
        case HashKind::FieldMultiplyTruncate: return "field-multiply-truncate";
        case HashKind::PolyEllWise: return "poly-ell-wise";
        case HashKind::InnerProductBit: return "inner-product-bit";
        case HashKind::TcrStandin: return "tcr-standin";
    }
    throw ParamError("hash_kind_name: bad kind");
}

HashKind hash_kind_from_name(const std::string& name) {
    if (name == "boolean-matrix") return HashKind::BooleanMatrix;
    if (name == "field-multiply-truncate") return HashKind::FieldMultiplyTruncate;
    if (name == "poly-ell-wise") return HashKind::PolyEllWise;
    if (name == "inner-product-bit") return HashKind::InnerProductBit;
    if (name == "tcr-standin") return HashKind::TcrStandin;
    throw ParamError("unknown hash family kind: " + name);
}

FieldSpec HashFamilySpec::field() const {
    if (kind != HashKind::FieldMultiplyTruncate && kind != HashKind::PolyEllWise)
        throw ParamError("HashFamilySpec::field: not a field-based family");
    return FieldSpec::standard(domain_bits);
}

int HashFamilySpec::key_bits() const {
    switch (kind) {
        case HashKind::BooleanMatrix: return domain_bits * range_bits;
        case HashKind::FieldMultiplyTruncate: return domain_bits;
        case HashKind::PolyEllWise: return ell * domain_bits;
        case HashKind::InnerProductBit: return domain_bits;
        case HashKind::TcrStandin: return 64;
    }
    throw ParamError("HashFamilySpec::key_bits: bad kind");
}

void HashFamilySpec::validate() const {
    if (domain_bits < 0 || range_bits < 0) throw ParamError("hash family: negative widths");
    switch (kind) {
        case HashKind::BooleanMatrix:
            break;
        case HashKind::FieldMultiplyTruncate:
            if (domain_bits < 1 || domain_bits > 64)
                throw ParamError("field-multiply-truncate: domain must be a field degree in [1,64]");
            if (range_bits > domain_bits)
                throw ParamError("field-multiply-truncate: range exceeds domain");
            break;
        case HashKind::PolyEllWise:
            if (domain_bits < 1 || domain_bits > 64)
                throw ParamError("poly-ell-wise: domain must be a field degree in [1,64]");
            if (range_bits > domain_bits) throw ParamError("poly-ell-wise: range exceeds domain");
            if (ell < 1) throw ParamError("poly-ell-wise: ell must be >= 1");
            break;
        case HashKind::InnerProductBit:
            if (range_bits != 1) throw ParamError("inner-product-bit: range must be 1 bit");
            break;
        case HashKind::TcrStandin:
            if (domain_bits > 64) throw ParamError("tcr-standin: domain limited to 64 bits");
            if (range_bits >= domain_bits)
                throw ParamError("tcr-standin: family must compress (range < domain)");
            break;
    }
}

HashFunction sample_hash(const HashFamilySpec& family, SeedStream& rng) {
    family.validate();
    return HashFunction{family, rng.bits(family.key_bits())};
}

HashFunction tcr_sample(const HashFamilySpec& family, SeedStream& rng) {
    if (family.kind != HashKind::TcrStandin) throw ParamError("tcr_sample: family is not tcr-standin");
    return sample_hash(family, rng);
}

namespace {

uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Insert-once memo for the oracle-backed tcr-standin. Entries are derived
// deterministically from (instance, key, x), so the table is a cache of a
// fixed random function rather than shared mutable behavior; the lock makes
// concurrent evaluation safe.
class TcrOracleTable {
public:
    uint64_t value(uint64_t instance, uint64_t key, uint64_t x, int range_bits) {
        uint64_t cell = mix64(mix64(mix64(instance) ^ key) ^ x);
        std::string k;
        k.reserve(24);
        for (uint64_t w : {instance, key, x})
            for (int i = 0; i < 8; ++i) k.push_back(char((w >> (8 * i)) & 0xff));
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto [it, inserted] = memo_.try_emplace(std::move(k), cell);
            cell = it->second;
        }
        return range_bits >= 64 ? cell : (cell & ((uint64_t(1) << range_bits) - 1));
    }

private:
    std::mutex mu_;
    std::unordered_map<std::string, uint64_t> memo_;
};

TcrOracleTable& tcr_table() {
    static TcrOracleTable t;
    return t;
}

uint64_t keyed_mix(uint64_t key, uint64_t x, int range_bits) {
    uint64_t v = x ^ key;
    v = (v << 23 | v >> 41) * 0x2545f4914f6cdd1dull;
    v ^= key;
    v = (v << 17 | v >> 47) * 0x9e3779b97f4a7c15ull;
    v ^= v >> 29;
    return range_bits >= 64 ? v : (v & ((uint64_t(1) << range_bits) - 1));
}

}  // namespace

uint64_t eval_hash_raw(const HashFamilySpec& family, uint64_t key, uint64_t x) {
    switch (family.kind) {
        case HashKind::BooleanMatrix: {
            // row r of the matrix = key bits [r*domain, (r+1)*domain), first
            // bit of a row = its highest-order position, matching Bits order.
            uint64_t out = 0;
            int d = family.domain_bits;
            uint64_t dmask = d >= 64 ? ~uint64_t(0) : ((uint64_t(1) << d) - 1);
            for (int r = 0; r < family.range_bits; ++r) {
                uint64_t row = (key >> ((family.range_bits - 1 - r) * d)) & dmask;
                out = (out << 1) | uint64_t(std::popcount(row & x) & 1);
            }
            return out;
        }
        case HashKind::FieldMultiplyTruncate: {
            FieldSpec f = family.field();
            uint64_t prod = gf_mul_raw(key, x, f);
            return family.range_bits >= 64 ? prod : (prod & ((uint64_t(1) << family.range_bits) - 1));
        }
        case HashKind::PolyEllWise: {
            FieldSpec f = family.field();
            int s = family.domain_bits;
            uint64_t smask = f.mask();
            // Horner over coefficients h_0..h_{ell-1}; coefficient i sits in
            // key bits [i*s, (i+1)*s) counted from the front of the key, so
            // h_{ell-1} occupies the lowest integer slice.
            uint64_t acc = key & smask;
            for (int i = family.ell - 2; i >= 0; --i) {
                uint64_t coeff = (key >> ((family.ell - 1 - i) * s)) & smask;
                acc = gf_mul_raw(acc, x, f) ^ coeff;
            }
            return family.range_bits >= 64 ? acc : (acc & ((uint64_t(1) << family.range_bits) - 1));
        }
        case HashKind::InnerProductBit:
            return uint64_t(std::popcount(key & x) & 1);
        case HashKind::TcrStandin:
            return family.tcr_mode == TcrMode::OracleBacked
                       ? tcr_table().value(family.tcr_instance, key, x, family.range_bits)
                       : keyed_mix(key, x, family.range_bits);
    }
    throw ParamError("eval_hash_raw: bad kind");
}

Bits eval_hash(const HashFunction& h, const Bits& x) {
    h.family.validate();
    if (x.size() != h.family.domain_bits) throw ParamError("eval_hash: input width mismatch");
    if (h.key.size() != h.family.key_bits()) throw ParamError("eval_hash: key width mismatch");

    int kb = h.family.key_bits();
    if (kb <= 64 && h.family.domain_bits <= 64)
        return Bits(eval_hash_raw(h.family, kb ? h.key.to_u64() : 0, x.empty() ? 0 : x.to_u64()),
                    h.family.range_bits);

    // Wide path: only boolean-matrix (big matrices) and inner-product over
    // long strings land here.
    switch (h.family.kind) {
        case HashKind::BooleanMatrix: {
            Bits out = Bits::zeros(h.family.range_bits);
            for (int r = 0; r < h.family.range_bits; ++r) {
                Bits row = h.key.slice(r * h.family.domain_bits, h.family.domain_bits);
                out.set_bit(r, x.parity_and(row));
            }
            return out;
        }
        case HashKind::InnerProductBit:
            return Bits(uint64_t(x.parity_and(h.key)), 1);
        case HashKind::PolyEllWise: {
            FieldSpec f = h.family.field();
            int s = h.family.domain_bits;
            uint64_t xv = x.to_u64();
            uint64_t acc = h.key.slice((h.family.ell - 1) * s, s).to_u64();
            for (int i = h.family.ell - 2; i >= 0; --i)
                acc = gf_mul_raw(acc, xv, f) ^ h.key.slice(i * s, s).to_u64();
            return Bits(h.family.range_bits >= 64
                            ? acc
                            : (acc & ((uint64_t(1) << h.family.range_bits) - 1)),
                        h.family.range_bits);
        }
        default:
            throw ParamError("eval_hash: key too wide for this family");
    }
}

Bits tcr_eval(const HashFunction& h, const Bits& x) {
    if (h.family.kind != HashKind::TcrStandin) throw ParamError("tcr_eval: family is not tcr-standin");
    return eval_hash(h, x);
}

Frac exact_collision_probability(const HashFamilySpec& family, const Bits& x, const Bits& x2) {
    family.validate();
    if (x == x2) throw ParamError("exact_collision_probability: inputs must differ");
    if (x.size() != family.domain_bits || x2.size() != family.domain_bits)
        throw ParamError("exact_collision_probability: input width mismatch");
    int kb = family.key_bits();
    if (family.kind == HashKind::TcrStandin || kb > 24)
        throw RegimeError("exact_collision_probability: key space exceeds 2^24, use Monte-Carlo");

    uint64_t keys = uint64_t(1) << kb;
    uint64_t xv = x.empty() ? 0 : x.to_u64();
    uint64_t x2v = x2.empty() ? 0 : x2.to_u64();
    uint64_t coll = 0;
    for (uint64_t k = 0; k < keys; ++k)
        if (eval_hash_raw(family, k, xv) == eval_hash_raw(family, k, x2v)) ++coll;
    return Frac(coll, keys);
}

Frac leftover_hash_distance(const HashFamilySpec& family, const std::vector<Bits>& subset) {
    family.validate();
    int kb = family.key_bits();
    if (family.kind == HashKind::TcrStandin || kb > 24)
        throw RegimeError("leftover_hash_distance: key space exceeds 2^24");
    if (subset.empty()) throw ParamError("leftover_hash_distance: empty subset");
    if (family.range_bits > 24) throw RegimeError("leftover_hash_distance: range too wide");

    uint64_t keys = uint64_t(1) << kb;
    uint64_t n = subset.size();
    uint64_t ranges = uint64_t(1) << family.range_bits;
    std::vector<uint64_t> xs;
    xs.reserve(subset.size());
    for (const Bits& b : subset) {
        if (b.size() != family.domain_bits)
            throw ParamError("leftover_hash_distance: subset element width mismatch");
        xs.push_back(b.to_u64());
    }

    // SD = (1/K) sum_h (1/2) sum_v |c_{h,v}/N - 2^-m|
    //    = sum_h sum_v |c_{h,v} * 2^m - N| / (K * N * 2^{m+1})
    unsigned __int128 total = 0;
    std::vector<uint64_t> counts(ranges);
    for (uint64_t k = 0; k < keys; ++k) {
        std::fill(counts.begin(), counts.end(), 0);
        for (uint64_t xv : xs) ++counts[eval_hash_raw(family, k, xv)];
        for (uint64_t c : counts) {
            uint64_t lhs = c << family.range_bits;
            total += lhs >= n ? lhs - n : n - lhs;
        }
    }
    unsigned __int128 denom = (unsigned __int128)keys * n * ranges * 2;
    unsigned __int128 a = total, b = denom;
    while (b) {
        auto t = a % b;
        a = b;
        b = t;
    }
    if (a == 0) return Frac::zero();
    return Frac(uint64_t(total / a), uint64_t(denom / a));
}

double leftover_hash_budget(int range_bits, double renyi2_entropy) {
    return 0.5 * std::exp2((double(range_bits) - renyi2_entropy) / 2.0);
}

bool ell_wise_joint_uniform_exact(const HashFamilySpec& family, const std::vector<Bits>& inputs) {
    family.validate();
    if (family.kind != HashKind::PolyEllWise) throw ParamError("joint uniformity: poly-ell-wise only");
    if ((int)inputs.size() != family.ell)
        throw ParamError("joint uniformity: need exactly ell distinct inputs");
    for (size_t i = 0; i < inputs.size(); ++i)
        for (size_t j = i + 1; j < inputs.size(); ++j)
            if (inputs[i] == inputs[j]) throw ParamError("joint uniformity: inputs must be distinct");
    int kb = family.key_bits();
    if (kb > 24) throw RegimeError("joint uniformity: key space exceeds 2^24");

    uint64_t keys = uint64_t(1) << kb;
    uint64_t cells = uint64_t(1) << (family.range_bits * family.ell);
    if (keys % cells != 0) return false;
    uint64_t expect = keys / cells;
    std::vector<uint64_t> counts(cells, 0);
    for (uint64_t k = 0; k < keys; ++k) {
        uint64_t cell = 0;
        for (const Bits& x : inputs)
            cell = (cell << family.range_bits) | eval_hash_raw(family, k, x.to_u64());
        ++counts[cell];
    }
    for (uint64_t c : counts)
        if (c != expect) return false;
    return true;
}

TcrExperimentReport tcr_experiment(const HashFamilySpec& family, const Bits& target,
                                   uint64_t trials, SeedStream& rng) {
    if (family.kind != HashKind::TcrStandin) throw ParamError("tcr_experiment: family is not tcr-standin");
    family.validate();
    if (family.domain_bits > 20) throw RegimeError("tcr_experiment: domain exceeds 2^20");

    TcrExperimentReport rep;
    rep.trials = trials;
    uint64_t domain = uint64_t(1) << family.domain_bits;
    uint64_t tv = target.to_u64();
    uint64_t queries = 0, query_hits = 0;
    for (uint64_t t = 0; t < trials; ++t) {
        HashFunction h = sample_hash(family, rng);
        uint64_t kv = h.key.to_u64();
        uint64_t want = eval_hash_raw(family, kv, tv);
        bool found = false;
        for (uint64_t x = 0; x < domain; ++x) {
            if (x == tv) continue;
            ++queries;
            if (eval_hash_raw(family, kv, x) == want) {
                ++query_hits;
                found = true;
            }
        }
        if (found) ++rep.found;
    }
    rep.find_rate = trials ? double(rep.found) / double(trials) : 0.0;
    rep.per_query_collision_rate = queries ? double(query_hits) / double(queries) : 0.0;
    return rep;
}

}  // namespace ef
