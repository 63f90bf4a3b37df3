#include "entropy_forge/owf_attacks.hpp"

#include <algorithm>
#include <cmath>

#include "entropy_forge/errors.hpp"

namespace ef {

using nlohmann::json;

FunctionInverter::FunctionInverter(FunctionTable f, Frac xi) : f_(std::move(f)), xi_(xi) {
    f_.validate();
    if (Frac::one() < xi_) throw ParamError("FunctionInverter: xi must be in [0,1]");
    for (uint64_t x = 0; x < f_.table.size(); ++x) preimages_[f_.table[x]].push_back(x);
}

std::optional<uint64_t> FunctionInverter::invert(uint64_t y, SeedStream& rng) const {
    auto it = preimages_.find(y);
    if (it == preimages_.end()) return std::nullopt;
    if (!xi_.is_zero() && rng.bernoulli(xi_.num, xi_.den)) return it->second.front();
    return it->second[rng.below(it->second.size())];
}

std::vector<std::pair<Frac, uint64_t>> FunctionInverter::branches(uint64_t y) const {
    auto it = preimages_.find(y);
    if (it == preimages_.end()) return {};
    const auto& pre = it->second;
    std::vector<std::pair<Frac, uint64_t>> out;
    Frac uniform = (Frac::one() - xi_) / Frac(pre.size(), 1);
    for (size_t i = 0; i < pre.size(); ++i) {
        Frac p = uniform;
        if (i == 0) p = p + xi_;
        out.emplace_back(p, pre[i]);
    }
    return out;
}

namespace {

struct ChunkView {
    int chunk_bits = 0;
    int chunks = 0;
    int pad = 0;
    int out_bits = 0;

    static ChunkView of(const GenPtr& owf_gen) {
        ChunkView v;
        v.chunks = owf_gen->block_count() - 1;
        v.chunk_bits = owf_gen->block_bits()[0];
        v.pad = owf_generator_pad_bits(owf_gen);
        v.out_bits = v.chunks * v.chunk_bits - v.pad;
        return v;
    }
    Bits chunk(uint64_t y, int i) const {  // i in [0, chunks)
        Bits padded = Bits(y, out_bits).concat(Bits::zeros(pad));
        return padded.slice(i * chunk_bits, chunk_bits);
    }
};

}  // namespace

EntropyInversionResult invert_via_entropy(const OnlineGenerator& adversary, const GenPtr& owf_gen,
                                          uint64_t y, uint64_t retry_limit, SeedStream& rng) {
    if (adversary.block_count() != owf_gen->block_count())
        throw ParamError("invert_via_entropy: adversary block count mismatch");
    ChunkView view = ChunkView::of(owf_gen);

    EntropyInversionResult res;
    res.per_block_draws.assign(view.chunks, 0);

    OnlineState s = adversary.start(Bits());
    {
        auto pre = adversary.preprocessing(s);
        uint64_t den = 1;
        for (const auto& [p, st] : pre) den = std::lcm(den, p.den);
        uint64_t u = rng.below(den), acc = 0;
        for (const auto& [p, st] : pre) {
            acc += p.num * (den / p.den);
            if (u < acc) {
                s = st;
                break;
            }
        }
    }

    for (int i = 1; i <= view.chunks; ++i) {
        Bits want = view.chunk(y, i - 1);
        bool matched = false;
        auto branches = adversary.round(s, i);
        uint64_t den = 1;
        for (const auto& b : branches) den = std::lcm(den, b.prob.den);
        for (uint64_t attempt = 0; attempt < retry_limit; ++attempt) {
            ++res.per_block_draws[i - 1];
            uint64_t u = rng.below(den), acc = 0;
            const OnlineBranch* chosen = nullptr;
            for (const auto& b : branches) {
                acc += b.prob.num * (den / b.prob.den);
                if (u < acc) {
                    chosen = &b;
                    break;
                }
            }
            if (chosen && chosen->block == want) {
                s = chosen->next;
                matched = true;
                break;
            }
        }
        if (!matched) {
            res.aborted = true;
            return res;
        }
    }

    // final round: fresh coins, the emitted block is the candidate preimage
    auto branches = adversary.round(s, adversary.block_count());
    uint64_t den = 1;
    for (const auto& b : branches) den = std::lcm(den, b.prob.den);
    uint64_t u = rng.below(den), acc = 0;
    for (const auto& b : branches) {
        acc += b.prob.num * (den / b.prob.den);
        if (u < acc) {
            res.preimage = b.block.to_u64();
            return res;
        }
    }
    throw ConsistencyError("invert_via_entropy: final round probabilities do not sum to 1");
}

EntropyInversionResult invert_via_entropy_max(const OnlineGenerator& adversary,
                                              const GenPtr& owf_gen, uint64_t y, double epsilon,
                                              SeedStream& rng) {
    if (epsilon <= 0.0) throw ParamError("invert_via_entropy_max: epsilon must be positive");
    int n = owf_gen->n();
    double budget = double(n) * n * n / epsilon;
    if (budget < 1.0) throw ParamError("invert_via_entropy_max: retry limit degenerates below 1");
    return invert_via_entropy(adversary, owf_gen, y, uint64_t(std::ceil(budget)), rng);
}

EntropyInversionResult InverterOracle::invert(uint64_t y, SeedStream& rng) const {
    switch (strategy) {
        case Strategy::BruteForceExact: {
            FunctionInverter inv(target, xi);
            EntropyInversionResult res;
            res.preimage = inv.invert(y, rng);
            res.aborted = !res.preimage;
            return res;
        }
        case Strategy::EntropyRewind:
            return invert_via_entropy(*adversary, owf_gen, y, retry_limit, rng);
        case Strategy::EntropyRewindMax:
            return invert_via_entropy_max(*adversary, owf_gen, y, epsilon, rng);
    }
    throw ParamError("InverterOracle: bad strategy");
}

json AttackReport::to_json() const {
    return json{{"trials", trials},
                {"successes", successes},
                {"aborts", aborts},
                {"success_rate", success_rate},
                {"ci_halfwidth", ci_halfwidth},
                {"mean_rewinds_per_block", mean_rewinds_per_block}};
}

namespace {

AttackReport run_attack_over(const FunctionTable& f, const InversionAttack& attack,
                             const std::vector<uint64_t>& targets, SeedStream& rng) {
    AttackReport rep;
    rep.trials = targets.size();
    uint64_t draws = 0, blocks = 0;
    for (uint64_t y : targets) {
        EntropyInversionResult r = attack(y, rng);
        for (uint64_t d : r.per_block_draws) draws += d;
        blocks += r.per_block_draws.size();
        if (r.aborted) ++rep.aborts;
        if (r.preimage && f.table[*r.preimage] == y) ++rep.successes;  // verified success
    }
    rep.success_rate = rep.trials ? double(rep.successes) / double(rep.trials) : 0.0;
    rep.ci_halfwidth = hoeffding_halfwidth(1.0, rep.trials);
    rep.mean_rewinds_per_block = blocks ? double(draws) / double(blocks) : 0.0;
    return rep;
}

}  // namespace

AttackReport owf_success_probability(const FunctionTable& f, const InversionAttack& attack,
                                     uint64_t trials, SeedStream& rng) {
    std::vector<uint64_t> targets;
    targets.reserve(trials);
    for (uint64_t t = 0; t < trials; ++t)
        targets.push_back(f.table[rng.below(uint64_t(1) << f.in_bits)]);
    return run_attack_over(f, attack, targets, rng);
}

AttackReport owf_success_exhaustive(const FunctionTable& f, const InversionAttack& attack,
                                    SeedStream& rng) {
    std::vector<uint64_t> targets;
    targets.reserve(f.table.size());
    for (uint64_t x = 0; x < f.table.size(); ++x) targets.push_back(f.table[x]);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    return run_attack_over(f, attack, targets, rng);
}

// --- generator from inverter ------------------------------------------------------

namespace {

struct InvGenPayload {
    uint64_t seed = 0;
    bool failed = false;
};

class InverterGenerator final : public OnlineGenerator {
public:
    InverterGenerator(SupportPtr support, PrefixInverterMode mode, Frac xi)
        : OnlineGenerator(support->generator()->pp_bits(), support->generator()->block_bits()),
          support_(std::move(support)),
          mode_(mode),
          xi_(xi) {
        if (Frac::one() < xi_) throw ParamError("consistent_generator_from_inverter: xi in [0,1]");
    }

    OnlineState start(const Bits&) const override {
        auto payload = std::make_shared<InvGenPayload>();  // x_0 = 0^n
        return OnlineState{payload, "x=0"};
    }

    std::vector<OnlineBranch> round(const OnlineState& s, int i) const override {
        const auto* p = static_cast<const InvGenPayload*>(s.payload.get());
        const auto* gen = support_->generator().get();
        if (p->failed || mode_ == PrefixInverterMode::AlwaysFail) {
            bool failed_now = true;
            auto next = std::make_shared<InvGenPayload>(InvGenPayload{p->seed, failed_now});
            Bits y = gen->eval_seed(p->seed)[i - 1];
            return {OnlineBranch{Frac::one(), y,
                                 OnlineState{next, "x=" + std::to_string(p->seed) + "!F"}}};
        }
        // invert the (i-1)-block prefix of the current seed's output
        std::vector<Bits> prefix = gen->eval_seed(p->seed);
        prefix.resize(i - 1);
        std::vector<uint64_t> consistent = support_->consistent_seeds(prefix);
        // the current seed witnesses the prefix, so the set is never empty
        uint64_t k = consistent.size();
        std::vector<OnlineBranch> out;
        out.reserve(k);
        Frac uniform = (Frac::one() - xi_) / Frac(k, 1);
        for (size_t idx = 0; idx < consistent.size(); ++idx) {
            Frac prob = uniform;
            if (idx == 0) prob = prob + xi_;  // lexicographically smallest preimage
            if (prob.is_zero()) continue;
            uint64_t x = consistent[idx];
            auto next = std::make_shared<InvGenPayload>(InvGenPayload{x, false});
            out.push_back({prob, gen->eval_seed(x)[i - 1],
                           OnlineState{next, "x=" + std::to_string(x)}});
        }
        return out;
    }

private:
    SupportPtr support_;
    PrefixInverterMode mode_;
    Frac xi_;
};

}  // namespace

OnlinePtr consistent_generator_from_inverter(SupportPtr support, PrefixInverterMode mode, Frac xi) {
    if (mode != PrefixInverterMode::Noisy && !xi.is_zero())
        throw ParamError("consistent_generator_from_inverter: xi requires Noisy mode");
    return std::make_shared<InverterGenerator>(std::move(support), mode, xi);
}

// --- exact transcript KL ------------------------------------------------------------

namespace {

struct KlWalker {
    const OnlineGenerator& adversary;
    const ChunkView view;
    const std::map<std::vector<Bits>, uint64_t>& image_counts;
    uint64_t n_inputs;
    double kl = 0.0;

    void walk(const OnlineState& s, int i, double path_prob, double logq_sum,
              std::vector<Bits>& emitted) {
        if (i > adversary.block_count()) {
            auto it = image_counts.find(emitted);
            if (it == image_counts.end())
                throw ConsistencyError("standalone_embedded_kl: emitted prefix outside image");
            double log_pf = std::log2(double(it->second)) - std::log2(double(n_inputs));
            kl += path_prob * (logq_sum - log_pf);
            return;
        }
        auto branches = adversary.round(s, i);
        std::map<Bits, Frac> marginal;
        for (const auto& b : branches) {
            auto mit = marginal.find(b.block);
            if (mit == marginal.end())
                marginal.emplace(b.block, b.prob);
            else
                mit->second = mit->second + b.prob;
        }
        bool is_chunk_round = i <= view.chunks;
        for (const auto& b : branches) {
            if (b.prob.is_zero()) continue;
            double q = marginal.at(b.block).to_double();
            if (is_chunk_round) emitted.push_back(b.block);
            walk(b.next, i + 1, path_prob * b.prob.to_double(),
                 logq_sum + (is_chunk_round ? std::log2(q) : 0.0), emitted);
            if (is_chunk_round) emitted.pop_back();
        }
    }
};

}  // namespace

double standalone_embedded_kl(const OnlineGenerator& adversary, const GenPtr& owf_gen) {
    ChunkView view = ChunkView::of(owf_gen);
    // chunked image distribution of f(U)
    OutputSupport support(owf_gen);
    std::map<std::vector<Bits>, uint64_t> image_counts;
    for (size_t i = 0; i < support.tuples().size(); ++i) {
        std::vector<Bits> chunks(support.tuples()[i].begin(),
                                 support.tuples()[i].begin() + view.chunks);
        image_counts[chunks] += support.counts()[i];
    }

    double total = 0.0;
    OnlineState s0 = adversary.start(Bits());
    for (const auto& [p, s] : adversary.preprocessing(s0)) {
        if (p.is_zero()) continue;
        KlWalker walker{adversary, view, image_counts, uint64_t(1) << owf_gen->seed_bits()};
        std::vector<Bits> emitted;
        walker.walk(s, 1, 1.0, 0.0, emitted);
        total += p.to_double() * walker.kl;
    }
    return total;
}

}  // namespace ef
