#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entropy_forge/bits.hpp"
#include "entropy_forge/distribution.hpp"
#include "entropy_forge/frac.hpp"
#include "entropy_forge/rng.hpp"

namespace ef {

/** Explicit function table f : {0,1}^in_bits -> {0,1}^out_bits. */
struct FunctionTable {
    int in_bits = 0;
    int out_bits = 0;
    std::vector<uint64_t> table;  // size 2^in_bits

    uint64_t operator()(uint64_t x) const { return table.at(x); }
    Bits apply(const Bits& x) const { return Bits(table.at(x.to_u64()), out_bits); }

    static FunctionTable identity(int n);
    static FunctionTable constant(int n, uint64_t c);
    static FunctionTable drop_last_bit(int n);   // 2-to-1: clears the last bit
    static FunctionTable random_function(int n, uint64_t seed);
    // "builtin:<name>" forms used by the CLI: identity, constant0, drop-last, random.
    static FunctionTable builtin(const std::string& name, int n, uint64_t seed = 0);
    void validate() const;
};

/**
 * An m-block generator: a total deterministic map from (public parameter,
 * seed) to m ordered blocks with declared widths. All desk-scale instances
 * have pp_bits = 0; the slot exists so public-parameter generators keep the
 * same shape.
 */
class BlockGenerator {
public:
    virtual ~BlockGenerator() = default;

    int n() const { return n_; }
    int pp_bits() const { return pp_bits_; }
    int seed_bits() const { return seed_bits_; }
    int block_count() const { return (int)block_bits_.size(); }
    const std::vector<int>& block_bits() const { return block_bits_; }
    int max_block_bits() const;

    virtual std::vector<Bits> eval(const Bits& z, const Bits& x) const = 0;
    std::vector<Bits> eval_seed(uint64_t x) const { return eval(Bits::zeros(pp_bits_), Bits(x, seed_bits_)); }

    virtual nlohmann::json to_json() const = 0;

protected:
    BlockGenerator(int n, int pp_bits, int seed_bits, std::vector<int> block_bits)
        : n_(n), pp_bits_(pp_bits), seed_bits_(seed_bits), block_bits_(std::move(block_bits)) {}

    int n_;
    int pp_bits_;
    int seed_bits_;
    std::vector<int> block_bits_;
};

using GenPtr = std::shared_ptr<const BlockGenerator>;

// f(x) chopped into ceil(log2 n)-bit chunks followed by x itself; f's output
// is zero-padded up to a whole number of chunks and the pad width recorded.
GenPtr owf_generator(FunctionTable f, int n);
int owf_generator_pad_bits(const GenPtr& g);     // 0 for non-owf generators

GenPtr bit_blocks_generator(int n);              // x split into n 1-bit blocks
GenPtr table_generator(int n, int seed_bits, std::vector<int> block_bits,
                       std::vector<std::vector<Bits>> rows);

GenPtr pad_to_block_count(GenPtr g, int target_m);  // constant trailing blocks
GenPtr pad_block_lengths(GenPtr g);                 // zero-pad blocks to a common width

// Truncated sequential repetition with a random offset: w independent copies,
// window of (w-1)*m blocks starting at offset j (part of the seed), first
// output block tagged with j. Requires m to be a power of two.
GenPtr equalize(GenPtr g, int w);

// v-fold direct product, blockwise. Blocks are padded to a common width
// first so every copy's block i has the same length.
GenPtr direct_product(GenPtr g, int v);

GenPtr generator_from_json(const nlohmann::json& spec);

/**
 * Exact output statistics of a generator, by full seed enumeration
 * (seed_bits <= 20). Outputs are stored sorted so that any block-prefix is a
 * contiguous range; conditional queries are binary searches.
 */
class OutputSupport {
public:
    OutputSupport(GenPtr g, Bits z);
    explicit OutputSupport(GenPtr g) : OutputSupport(std::move(g), Bits()) {}

    const GenPtr& generator() const { return gen_; }
    uint64_t seed_count() const { return uint64_t(1) << gen_->seed_bits(); }
    size_t support_size() const { return tuples_.size(); }

    bool contains(const std::vector<Bits>& tuple) const;
    bool contains_prefix(const std::vector<Bits>& prefix) const;
    uint64_t prefix_count(const std::vector<Bits>& prefix) const;
    // Conditional table of block i (0-based) given the first i blocks.
    std::vector<std::pair<Bits, uint64_t>> next_block_counts(const std::vector<Bits>& prefix) const;
    // Uniform draw from the seeds consistent with a prefix.
    std::optional<uint64_t> sample_consistent_seed(const std::vector<Bits>& prefix,
                                                   SeedStream& rng) const;
    std::vector<uint64_t> consistent_seeds(const std::vector<Bits>& prefix) const;

    // Sum over the prefix of -log2 Pr[Y_j = y_j | Y_<j]; +inf off support.
    double real_sample_entropy(const std::vector<Bits>& prefix) const;
    double real_shannon_entropy() const;                 // H(Y | Z = z)
    double block_conditional_shannon(int i) const;       // H(Y_i | Y_<i)
    double block_conditional_min_entropy(int i) const;   // min over support
    double tuple_min_entropy() const;                    // min -log2 Pr[Y = y]

    // The full output distribution as an entropy-oracle joint.
    JointDistribution to_joint() const;

    const std::vector<std::vector<Bits>>& tuples() const { return tuples_; }
    const std::vector<uint64_t>& counts() const { return counts_; }

private:
    GenPtr gen_;
    Bits z_;
    std::vector<std::vector<Bits>> tuples_;   // sorted, distinct
    std::vector<uint64_t> counts_;            // seeds per tuple
    std::vector<std::vector<uint64_t>> seeds_;  // seeds per tuple (sorted)

    std::pair<size_t, size_t> prefix_range(const std::vector<Bits>& prefix) const;
};

using SupportPtr = std::shared_ptr<const OutputSupport>;
SupportPtr shared_support(GenPtr g, Bits z = Bits());

}  // namespace ef
