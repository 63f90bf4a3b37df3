#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "entropy_forge/bits.hpp"
#include "entropy_forge/frac.hpp"
#include "entropy_forge/generators.hpp"
#include "entropy_forge/rng.hpp"

namespace ef {

/**
 * Online (adversarial) block generators as exact branching machines.
 *
 * Per-round conditional block distributions are not always dyadic (a
 * resampler conditions on consistent-seed sets of arbitrary size), so rounds
 * are not modeled as fixed-width uniform coins. Instead each round exposes a
 * finite list of (exact probability, block, next state) branches in a stable
 * order; a transcript records the branch index chosen per round. Replay,
 * causality (block i is a function of branches <= i by construction) and
 * conditioning on prior coins are all exact. The r0 preprocessing slot is
 * always present; machines that do not use it expose a single unit branch.
 */
struct OnlineState {
    std::shared_ptr<const void> payload;
    std::string key;  // canonical: distinct reachable states have distinct keys
};

struct OnlineBranch {
    Frac prob;
    Bits block;
    OnlineState next;
};

class OnlineGenerator {
public:
    virtual ~OnlineGenerator() = default;

    int pp_bits() const { return pp_bits_; }
    int block_count() const { return (int)block_bits_.size(); }
    const std::vector<int>& block_bits() const { return block_bits_; }

    virtual OnlineState start(const Bits& z) const = 0;
    // r0 draw; trivial single branch by default (v0 = 0).
    virtual std::vector<std::pair<Frac, OnlineState>> preprocessing(const OnlineState& s) const {
        return {{Frac::one(), s}};
    }
    virtual std::vector<OnlineBranch> round(const OnlineState& s, int i) const = 0;  // i in [1, m]

protected:
    OnlineGenerator(int pp_bits, std::vector<int> block_bits)
        : pp_bits_(pp_bits), block_bits_(std::move(block_bits)) {}
    int pp_bits_;
    std::vector<int> block_bits_;
};

using OnlinePtr = std::shared_ptr<const OnlineGenerator>;

struct TranscriptRound {
    uint64_t branch = 0;  // index into the round's branch list
    Bits block;
};

struct Transcript {
    Bits z;
    uint64_t r0_branch = 0;
    std::vector<TranscriptRound> rounds;

    std::vector<Bits> blocks() const {
        std::vector<Bits> out;
        out.reserve(rounds.size());
        for (const auto& r : rounds) out.push_back(r.block);
        return out;
    }
    nlohmann::json to_json(const OnlineGenerator& a) const;
};

Transcript run_online(const OnlineGenerator& a, SeedStream& rng, Bits z = Bits());

// Sum over rounds of -log2 Pr[Y_i = y_i | z, r_0, r_<i]; the conditional is
// the value-marginal of the round's branch list at the replayed state.
// Throws ConsistencyError if the transcript does not replay.
double accessible_sample_entropy(const OnlineGenerator& a, const Transcript& t);

// Exact expectation of the above over a random transcript, by merging-state
// dynamic programming (linearity makes merging sound).
double expected_accessible_entropy(const OnlineGenerator& a, Bits z = Bits(),
                                   uint64_t work_cap = uint64_t(1) << 24);

// The same expectation under the convention that preprocessing coins are
// part of round 1 (the first block is charged against its full marginal
// rather than conditioned on r0). Whether the two coincide in general is
// open; measurements report both.
double expected_accessible_entropy_merged_r0(const OnlineGenerator& a, Bits z = Bits(),
                                             uint64_t work_cap = uint64_t(1) << 24);

// Exact finite distribution of the accessible sample-entropy (full path
// enumeration; gated by work_cap).
std::vector<std::pair<Frac, double>> accessible_entropy_atoms(const OnlineGenerator& a,
                                                              Bits z = Bits(),
                                                              uint64_t work_cap = uint64_t(1) << 24);

// Exhaustive consistency audit: every reachable emitted tuple lies in the
// base generator's support.
bool consistent_with(const OnlineGenerator& a, const OutputSupport& support,
                     uint64_t work_cap = uint64_t(1) << 24);

// --- canonical adversaries -------------------------------------------------

// Whole seed drawn in round 1, blocks emitted deterministically afterwards.
OnlinePtr honest_upfront(SupportPtr support);

// The honest strategy run block by block: round i draws from the exact
// conditional of block i given the emitted prefix. This is the unbounded
// uniform-consistent-seed resampler packaged as an online generator.
OnlinePtr honest_blockwise(SupportPtr support);
OnlinePtr brute_force_resampler(SupportPtr support);  // same machine, attack-facing name

// Reduction from a cheater against equalize(g, w) to a cheater against g:
// draw an offset copy v in {2..w-1} (preprocessing coins), run the cheater
// past the blocks before the v-th embedded copy (also preprocessing), then
// re-emit that copy's m blocks.
OnlinePtr equalization_reduction(OnlinePtr cheater, GenPtr base, int w);

// Reduction from a cheater against direct_product(g, v) to a cheater against
// the (length-padded) g: draw a coordinate j in preprocessing, then project
// every emitted block to coordinate j.
OnlinePtr product_reduction(OnlinePtr cheater, GenPtr padded_base, int v);

// Scripted product cheater: copy 1 committed upfront, the other copies
// resampled per round. Gets strictly between the honest-upfront and
// resampler extremes; used by the reduction test suites.
OnlinePtr mixed_product_cheater(SupportPtr base_support, int v);

// --- measurements ------------------------------------------------------------

struct EntropyMeasurement {
    std::string kind;
    double value = 0.0;
    std::optional<double> tail_prob;      // accessible-max-tail only
    std::string method;                   // "exact" | "sampled"
    uint64_t budget = 0;                  // samples used (sampled mode)
    std::optional<double> ci_halfwidth;   // Hoeffding, 99% confidence
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const;
};

double hoeffding_halfwidth(double range, uint64_t n, double confidence = 0.99);

// budget == 0 requests exact mode (and throws RegimeError when impossible).
EntropyMeasurement measure_real_shannon(GenPtr g, uint64_t budget, SeedStream& rng);
EntropyMeasurement measure_real_min_per_block(GenPtr g, int block_index);  // -1 = min over blocks
EntropyMeasurement measure_accessible_expected(const OnlinePtr& a, uint64_t budget, SeedStream& rng);
EntropyMeasurement measure_accessible_max_tail(const OnlinePtr& a, double threshold,
                                               uint64_t budget, SeedStream& rng);

}  // namespace ef
