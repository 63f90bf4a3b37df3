#pragma once

#include <functional>
#include <map>
#include <optional>

#include <json.hpp>

#include "entropy_forge/generators.hpp"
#include "entropy_forge/online.hpp"

namespace ef {

/**
 * Inversion machinery: the exact brute-force preimage oracle, the rewinding
 * attack that turns a high-accessible-entropy adversary into an inverter,
 * and the converse construction of a consistent online generator from an
 * inverter of the prefix maps.
 */

// Uniform preimage sampler by full table inspection. A nonzero xi degrades
// it: with probability xi it returns the lexicographically smallest preimage
// instead of a uniform one (a valid but wrong-distribution answer), so the
// downstream reduction can be studied as a function of xi.
class FunctionInverter {
public:
    explicit FunctionInverter(FunctionTable f, Frac xi = Frac::zero());

    // Uniform element of f^-1(y); empty when y has no preimage.
    std::optional<uint64_t> invert(uint64_t y, SeedStream& rng) const;
    // Exact output distribution on y (for oracle-level audits).
    std::vector<std::pair<Frac, uint64_t>> branches(uint64_t y) const;

    const FunctionTable& target() const { return f_; }

private:
    FunctionTable f_;
    Frac xi_;
    std::map<uint64_t, std::vector<uint64_t>> preimages_;
};

// Per-round retry-limited rewinding against an online adversary for
// owf_generator(f, n): per chunk block, redraw the round until it matches
// the corresponding chunk of y (at most retry_limit draws per block), then
// read the final block as the preimage. retry_limit counts draws, so 0
// fails immediately.
struct EntropyInversionResult {
    std::optional<uint64_t> preimage;
    bool aborted = false;
    std::vector<uint64_t> per_block_draws;  // one entry per chunk block
};

EntropyInversionResult invert_via_entropy(const OnlineGenerator& adversary, const GenPtr& owf_gen,
                                          uint64_t y, uint64_t retry_limit, SeedStream& rng);

// Same attack with the retry limit pinned to ceil(n^3 / epsilon).
EntropyInversionResult invert_via_entropy_max(const OnlineGenerator& adversary,
                                              const GenPtr& owf_gen, uint64_t y, double epsilon,
                                              SeedStream& rng);

// One record bundling a target with an inversion strategy, the shape the CLI
// and the report plumbing pass around. BruteForceExact inspects the table
// (optionally xi-degraded); the entropy strategies rewind the supplied
// adversary with the stated retry limit (draws per block) or the
// ceil(n^3/epsilon) preset.
struct InverterOracle {
    enum class Strategy { BruteForceExact, EntropyRewind, EntropyRewindMax };

    FunctionTable target;
    Strategy strategy = Strategy::BruteForceExact;
    uint64_t retry_limit = 0;
    double epsilon = 1.0;
    Frac xi = Frac::zero();
    OnlinePtr adversary;  // entropy strategies only
    GenPtr owf_gen;       // entropy strategies only

    EntropyInversionResult invert(uint64_t y, SeedStream& rng) const;
};

struct AttackReport {
    uint64_t trials = 0;
    uint64_t successes = 0;
    uint64_t aborts = 0;
    double success_rate = 0.0;
    double ci_halfwidth = 0.0;            // Hoeffding, 99%
    double mean_rewinds_per_block = 0.0;  // mean draws per chunk block
    nlohmann::json to_json() const;
};

// Pr over y <- f(U) that the attack returns a verified preimage. Every
// reported success is re-checked by evaluating f.
using InversionAttack =
    std::function<EntropyInversionResult(uint64_t y, SeedStream& rng)>;
AttackReport owf_success_probability(const FunctionTable& f, const InversionAttack& attack,
                                     uint64_t trials, SeedStream& rng);
// Exhaustive variant: one attack per image point y = f(x), all x.
AttackReport owf_success_exhaustive(const FunctionTable& f, const InversionAttack& attack,
                                    SeedStream& rng);

// The consistent online generator built around an inverter of the prefix
// maps x -> G(x)_{<i}: each round re-inverts the current prefix and emits
// the fresh seed's next block; on inverter failure the seed freezes.
enum class PrefixInverterMode { Exact, Noisy, AlwaysFail };
OnlinePtr consistent_generator_from_inverter(SupportPtr support, PrefixInverterMode mode,
                                             Frac xi = Frac::zero());

// Exact KL divergence between the adversary's standalone transcript
// distribution and its distribution embedded in the (unbounded) rewinding
// inverter run on y <- f(U). Finite whenever the adversary is G^f-consistent.
double standalone_embedded_kl(const OnlineGenerator& adversary, const GenPtr& owf_gen);

}  // namespace ef
