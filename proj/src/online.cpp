#include "entropy_forge/online.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "entropy_forge/errors.hpp"

namespace ef {

using nlohmann::json;

namespace {

// Sample one branch with its exact probability.
template <typename BranchList>
size_t sample_branch(const BranchList& branches, SeedStream& rng,
                     Frac (*prob_of)(const typename BranchList::value_type&)) {
    uint64_t den = 1;
    for (const auto& b : branches) den = std::lcm(den, prob_of(b).den);
    uint64_t u = rng.below(den);
    uint64_t acc = 0;
    for (size_t i = 0; i < branches.size(); ++i) {
        acc += prob_of(branches[i]).num * (den / prob_of(branches[i]).den);
        if (u < acc) return i;
    }
    throw ConsistencyError("sample_branch: probabilities do not sum to 1");
}

Frac branch_prob(const OnlineBranch& b) { return b.prob; }
Frac pre_prob(const std::pair<Frac, OnlineState>& b) { return b.first; }

double value_marginal_entropy(const std::vector<OnlineBranch>& branches) {
    std::map<Bits, Frac> marginal;
    for (const auto& b : branches) {
        auto it = marginal.find(b.block);
        if (it == marginal.end())
            marginal.emplace(b.block, b.prob);
        else
            it->second = it->second + b.prob;
    }
    double h = 0.0;
    for (const auto& [y, q] : marginal) {
        double p = q.to_double();
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

Frac value_probability(const std::vector<OnlineBranch>& branches, const Bits& y) {
    Frac q = Frac::zero();
    for (const auto& b : branches)
        if (b.block == y) q = q + b.prob;
    return q;
}

}  // namespace

json Transcript::to_json(const OnlineGenerator& a) const {
    json rounds_json = json::array();
    OnlineState s = a.start(z);
    auto pre = a.preprocessing(s);
    int r0_width = std::max(1, (int)std::ceil(std::log2(double(std::max<size_t>(pre.size(), 2)))));
    s = pre.at(r0_branch).second;
    for (size_t i = 0; i < rounds.size(); ++i) {
        auto branches = a.round(s, (int)i + 1);
        int width = std::max(1, (int)std::ceil(std::log2(double(std::max<size_t>(branches.size(), 2)))));
        rounds_json.push_back({{"r_hex", Bits(rounds[i].branch, width).to_hex()},
                               {"y_hex", rounds[i].block.to_hex()},
                               {"y_bits", rounds[i].block.size()}});
        s = branches.at(rounds[i].branch).next;
    }
    return json{{"z_hex", z.to_hex()},
                {"r0_hex", Bits(r0_branch, r0_width).to_hex()},
                {"rounds", rounds_json}};
}

Transcript run_online(const OnlineGenerator& a, SeedStream& rng, Bits z) {
    if (z.empty() && a.pp_bits() > 0) z = rng.bits(a.pp_bits());
    if (z.size() != a.pp_bits()) throw ParamError("run_online: public parameter width");
    Transcript t;
    t.z = z;
    OnlineState s = a.start(z);
    auto pre = a.preprocessing(s);
    t.r0_branch = sample_branch(pre, rng, pre_prob);
    s = pre[t.r0_branch].second;
    for (int i = 1; i <= a.block_count(); ++i) {
        auto branches = a.round(s, i);
        size_t pick = sample_branch(branches, rng, branch_prob);
        t.rounds.push_back({pick, branches[pick].block});
        s = branches[pick].next;
    }
    return t;
}

double accessible_sample_entropy(const OnlineGenerator& a, const Transcript& t) {
    if ((int)t.rounds.size() != a.block_count())
        throw ConsistencyError("accessible_sample_entropy: round count mismatch");
    OnlineState s = a.start(t.z);
    auto pre = a.preprocessing(s);
    if (t.r0_branch >= pre.size())
        throw ConsistencyError("accessible_sample_entropy: bad preprocessing branch");
    s = pre[t.r0_branch].second;
    double acc = 0.0;
    for (int i = 1; i <= a.block_count(); ++i) {
        auto branches = a.round(s, i);
        const auto& rec = t.rounds[i - 1];
        if (rec.branch >= branches.size() || !(branches[rec.branch].block == rec.block))
            throw ConsistencyError("accessible_sample_entropy: transcript does not replay");
        Frac q = value_probability(branches, rec.block);
        acc += -std::log2(q.to_double());
        s = branches[rec.branch].next;
    }
    return acc;
}

double expected_accessible_entropy(const OnlineGenerator& a, Bits z, uint64_t work_cap) {
    if (z.empty() && a.pp_bits() > 0)
        throw ParamError("expected_accessible_entropy: public parameter required");
    uint64_t work = 0;
    std::map<std::string, std::pair<OnlineState, Frac>> frontier;
    {
        OnlineState s0 = a.start(z);
        for (const auto& [p, s] : a.preprocessing(s0)) {
            auto it = frontier.find(s.key);
            if (it == frontier.end())
                frontier.emplace(s.key, std::make_pair(s, p));
            else
                it->second.second = it->second.second + p;
            if (++work > work_cap) throw RegimeError("expected_accessible_entropy: work cap hit");
        }
    }
    double total = 0.0;
    for (int i = 1; i <= a.block_count(); ++i) {
        std::map<std::string, std::pair<OnlineState, Frac>> next;
        for (const auto& [key, sp] : frontier) {
            const auto& [state, p] = sp;
            auto branches = a.round(state, i);
            total += p.to_double() * value_marginal_entropy(branches);
            for (const auto& b : branches) {
                if (b.prob.is_zero()) continue;
                Frac mass = p * b.prob;
                auto it = next.find(b.next.key);
                if (it == next.end())
                    next.emplace(b.next.key, std::make_pair(b.next, mass));
                else
                    it->second.second = it->second.second + mass;
                if (++work > work_cap) throw RegimeError("expected_accessible_entropy: work cap hit");
            }
        }
        frontier = std::move(next);
    }
    return total;
}

double expected_accessible_entropy_merged_r0(const OnlineGenerator& a, Bits z,
                                             uint64_t work_cap) {
    // difference from the conditioned form: the round-1 charge uses the
    // block-1 marginal over (r0, r1) jointly
    double conditioned = expected_accessible_entropy(a, z, work_cap);
    OnlineState s0 = a.start(z);
    auto pre = a.preprocessing(s0);
    double h1_conditioned = 0.0;
    std::map<Bits, Frac> marginal;
    uint64_t work = 0;
    for (const auto& [p, s] : pre) {
        if (p.is_zero()) continue;
        auto branches = a.round(s, 1);
        std::map<Bits, Frac> local;
        for (const auto& b : branches) {
            if (++work > work_cap)
                throw RegimeError("expected_accessible_entropy_merged_r0: work cap hit");
            auto it = local.find(b.block);
            if (it == local.end())
                local.emplace(b.block, b.prob);
            else
                it->second = it->second + b.prob;
        }
        double h = 0.0;
        for (const auto& [y, q] : local) {
            double pv = q.to_double();
            if (pv > 0.0) h -= pv * std::log2(pv);
            Frac mass = p * q;
            auto it = marginal.find(y);
            if (it == marginal.end())
                marginal.emplace(y, mass);
            else
                it->second = it->second + mass;
        }
        h1_conditioned += p.to_double() * h;
    }
    double h1_marginal = 0.0;
    for (const auto& [y, q] : marginal) {
        double pv = q.to_double();
        if (pv > 0.0) h1_marginal -= pv * std::log2(pv);
    }
    return conditioned - h1_conditioned + h1_marginal;
}

namespace {

void atoms_dfs(const OnlineGenerator& a, const OnlineState& s, int i, Frac prob, double acc,
               std::vector<std::pair<Frac, double>>& out, uint64_t& work, uint64_t cap) {
    if (i > a.block_count()) {
        out.emplace_back(prob, acc);
        return;
    }
    auto branches = a.round(s, i);
    for (const auto& b : branches) {
        if (b.prob.is_zero()) continue;
        if (++work > cap) throw RegimeError("accessible_entropy_atoms: work cap hit");
        Frac q = value_probability(branches, b.block);
        atoms_dfs(a, b.next, i + 1, prob * b.prob, acc - std::log2(q.to_double()), out, work, cap);
    }
}

}  // namespace

std::vector<std::pair<Frac, double>> accessible_entropy_atoms(const OnlineGenerator& a, Bits z,
                                                              uint64_t work_cap) {
    if (z.empty() && a.pp_bits() > 0)
        throw ParamError("accessible_entropy_atoms: public parameter required");
    std::vector<std::pair<Frac, double>> out;
    uint64_t work = 0;
    OnlineState s0 = a.start(z);
    for (const auto& [p, s] : a.preprocessing(s0))
        if (!p.is_zero()) atoms_dfs(a, s, 1, p, 0.0, out, work, work_cap);
    return out;
}

namespace {

bool consistency_dfs(const OnlineGenerator& a, const OutputSupport& support, const OnlineState& s,
                     std::vector<Bits>& prefix, uint64_t& work, uint64_t cap) {
    int i = (int)prefix.size() + 1;
    if (i > a.block_count()) return support.contains(prefix);
    auto branches = a.round(s, i);
    for (const auto& b : branches) {
        if (b.prob.is_zero()) continue;
        if (++work > cap) throw RegimeError("consistent_with: work cap hit");
        prefix.push_back(b.block);
        if (!support.contains_prefix(prefix)) {
            prefix.pop_back();
            return false;
        }
        bool ok = consistency_dfs(a, support, b.next, prefix, work, cap);
        prefix.pop_back();
        if (!ok) return false;
    }
    return true;
}

}  // namespace

bool consistent_with(const OnlineGenerator& a, const OutputSupport& support, uint64_t work_cap) {
    Bits z = a.pp_bits() ? Bits::zeros(a.pp_bits()) : Bits();
    uint64_t work = 0;
    OnlineState s0 = a.start(z);
    std::vector<Bits> prefix;
    for (const auto& [p, s] : a.preprocessing(s0)) {
        if (p.is_zero()) continue;
        if (!consistency_dfs(a, support, s, prefix, work, work_cap)) return false;
    }
    return true;
}

// --- canonical adversaries -----------------------------------------------------

namespace {

struct UpfrontPayload {
    std::vector<Bits> blocks;
};

class HonestUpfront final : public OnlineGenerator {
public:
    explicit HonestUpfront(SupportPtr support)
        : OnlineGenerator(support->generator()->pp_bits(), support->generator()->block_bits()),
          support_(std::move(support)) {}

    OnlineState start(const Bits&) const override { return OnlineState{nullptr, "start"}; }

    std::vector<OnlineBranch> round(const OnlineState& s, int i) const override {
        if (i == 1) {
            uint64_t seeds = support_->seed_count();
            std::vector<OnlineBranch> out;
            out.reserve(seeds);
            const auto* gen = support_->generator().get();
            for (uint64_t x = 0; x < seeds; ++x) {
                auto payload = std::make_shared<UpfrontPayload>();
                payload->blocks = gen->eval_seed(x);
                Bits y = payload->blocks[0];
                out.push_back({Frac(1, seeds), y,
                               OnlineState{payload, "x=" + std::to_string(x)}});
            }
            return out;
        }
        const auto* p = static_cast<const UpfrontPayload*>(s.payload.get());
        return {OnlineBranch{Frac::one(), p->blocks[i - 1], s}};
    }

private:
    SupportPtr support_;
};

struct PrefixPayload {
    std::vector<Bits> prefix;
};

class HonestBlockwise final : public OnlineGenerator {
public:
    explicit HonestBlockwise(SupportPtr support)
        : OnlineGenerator(support->generator()->pp_bits(), support->generator()->block_bits()),
          support_(std::move(support)) {}

    OnlineState start(const Bits&) const override {
        return OnlineState{std::make_shared<PrefixPayload>(), ""};
    }

    std::vector<OnlineBranch> round(const OnlineState& s, int i) const override {
        const auto* p = static_cast<const PrefixPayload*>(s.payload.get());
        if ((int)p->prefix.size() != i - 1)
            throw ConsistencyError("resampler: state does not match round");
        auto counts = support_->next_block_counts(p->prefix);
        uint64_t total = 0;
        for (const auto& [y, c] : counts) total += c;
        std::vector<OnlineBranch> out;
        out.reserve(counts.size());
        for (const auto& [y, c] : counts) {
            auto payload = std::make_shared<PrefixPayload>();
            payload->prefix = p->prefix;
            payload->prefix.push_back(y);
            out.push_back({Frac(c, total), y, OnlineState{payload, s.key + "|" + y.to_hex()}});
        }
        return out;
    }

private:
    SupportPtr support_;
};

// ---- reductions ----

struct EqRedPayload {
    int v = 0;                 // which embedded copy is re-emitted
    int f = 0;                 // cheater round index of that copy's first block
    OnlineState cheater;       // cheater state positioned before round f
};

class EqualizationReduction final : public OnlineGenerator {
public:
    EqualizationReduction(OnlinePtr cheater, GenPtr base, int w)
        : OnlineGenerator(base->pp_bits(), base->block_bits()),
          cheater_(std::move(cheater)),
          base_m_(base->block_count()),
          w_(w) {
        if (w_ < 3) throw ParamError("equalization_reduction: w must be >= 3");
        if (cheater_->block_count() != (w_ - 1) * base_m_)
            throw ParamError("equalization_reduction: cheater block count mismatch");
        for (int b : base->block_bits())
            if (b != base->block_bits()[0])
                throw ParamError("equalization_reduction: base blocks must share one width");
    }

    OnlineState start(const Bits& z) const override { return cheater_->start(expand_pp(z)); }

    std::vector<std::pair<Frac, OnlineState>> preprocessing(const OnlineState& s0) const override {
        // r0 = (v, the cheater's preprocessing, its rounds before block f).
        std::vector<std::pair<Frac, OnlineState>> out;
        Frac pv(1, uint64_t(w_ - 2));
        for (int v = 2; v <= w_ - 1; ++v)
            for (const auto& [pc, sc] : cheater_->preprocessing(s0))
                expand(v, sc, 1, pv * pc, out);
        return out;
    }

    std::vector<OnlineBranch> round(const OnlineState& s, int i) const override {
        const auto* p = static_cast<const EqRedPayload*>(s.payload.get());
        auto branches = cheater_->round(p->cheater, p->f + i - 1);
        std::vector<OnlineBranch> out;
        out.reserve(branches.size());
        for (auto& b : branches) {
            auto payload = std::make_shared<EqRedPayload>();
            payload->v = p->v;
            payload->f = p->f;
            payload->cheater = b.next;
            out.push_back({b.prob, b.block,
                           OnlineState{payload, state_key(p->v, p->f, b.next.key)}});
        }
        return out;
    }

private:
    Bits expand_pp(const Bits& z) const {
        // desk-scale generators carry no public parameter; a nonzero pp would
        // need the z-vector sampling step of the proof.
        if (pp_bits_ != 0) throw ParamError("equalization_reduction: public parameters unsupported");
        return z;
    }

    static std::string state_key(int v, int f, const std::string& inner) {
        return "v" + std::to_string(v) + ":f" + std::to_string(f) + ":" + inner;
    }

    // Run the cheater through rounds 1..f-1 (f depends on its first block's
    // offset tag), folding the walked branches into preprocessing mass.
    void expand(int v, const OnlineState& sc, int next_round, Frac prob,
                std::vector<std::pair<Frac, OnlineState>>& out) const {
        if (next_round == 1) {
            for (const auto& b : cheater_->round(sc, 1)) {
                if (b.prob.is_zero()) continue;
                // first cheater block is (j, y_j); the tag occupies the extra
                // leading bits relative to a plain block.
                int jbits = b.block.size() - block_bits_[first_plain_width_index()];
                int j = (int)b.block.slice(0, jbits).to_u64() + 1;
                int f = (v - 1) * base_m_ + 2 - j;
                expand_tail(v, f, b.next, 2, prob * b.prob, out);
            }
            return;
        }
        throw ConsistencyError("equalization_reduction: bad expansion");
    }

    void expand_tail(int v, int f, const OnlineState& sc, int round, Frac prob,
                     std::vector<std::pair<Frac, OnlineState>>& out) const {
        if (round == f) {
            auto payload = std::make_shared<EqRedPayload>();
            payload->v = v;
            payload->f = f;
            payload->cheater = sc;
            out.emplace_back(prob, OnlineState{payload, state_key(v, f, sc.key)});
            return;
        }
        for (const auto& b : cheater_->round(sc, round)) {
            if (b.prob.is_zero()) continue;
            expand_tail(v, f, b.next, round + 1, prob * b.prob, out);
        }
    }

    int first_plain_width_index() const {
        // all base blocks share one width after padding; use the last one.
        return (int)block_bits_.size() - 1;
    }

    OnlinePtr cheater_;
    int base_m_;
    int w_;
};

struct ProdRedPayload {
    int j = 0;  // projected coordinate, 1-based
    OnlineState cheater;
};

class ProductReduction final : public OnlineGenerator {
public:
    ProductReduction(OnlinePtr cheater, GenPtr padded_base, int v)
        : OnlineGenerator(padded_base->pp_bits(), padded_base->block_bits()),
          cheater_(std::move(cheater)),
          v_(v),
          ell_(padded_base->max_block_bits()) {
        if (v_ < 1) throw ParamError("product_reduction: v must be >= 1");
        if (cheater_->block_count() != (int)block_bits_.size())
            throw ParamError("product_reduction: cheater block count mismatch");
        for (int b : padded_base->block_bits())
            if (b != ell_) throw ParamError("product_reduction: base blocks must share one width");
    }

    OnlineState start(const Bits& z) const override {
        if (pp_bits_ != 0) throw ParamError("product_reduction: public parameters unsupported");
        return cheater_->start(z);
    }

    std::vector<std::pair<Frac, OnlineState>> preprocessing(const OnlineState& s0) const override {
        std::vector<std::pair<Frac, OnlineState>> out;
        Frac pj(1, uint64_t(v_));
        for (int j = 1; j <= v_; ++j) {
            for (const auto& [pc, sc] : cheater_->preprocessing(s0)) {
                auto payload = std::make_shared<ProdRedPayload>();
                payload->j = j;
                payload->cheater = sc;
                out.emplace_back(pj * pc,
                                 OnlineState{payload, "j" + std::to_string(j) + ":" + sc.key});
            }
        }
        return out;
    }

    std::vector<OnlineBranch> round(const OnlineState& s, int i) const override {
        const auto* p = static_cast<const ProdRedPayload*>(s.payload.get());
        auto branches = cheater_->round(p->cheater, i);
        std::vector<OnlineBranch> out;
        out.reserve(branches.size());
        for (auto& b : branches) {
            Bits projected = b.block.slice((p->j - 1) * ell_, ell_);
            auto payload = std::make_shared<ProdRedPayload>();
            payload->j = p->j;
            payload->cheater = b.next;
            out.push_back({b.prob, projected,
                           OnlineState{payload, "j" + std::to_string(p->j) + ":" + b.next.key}});
        }
        return out;
    }

private:
    OnlinePtr cheater_;
    int v_;
    int ell_;
};

struct MixedPayload {
    std::vector<Bits> committed;              // copy 1's blocks, fixed upfront
    std::vector<std::vector<Bits>> prefixes;  // per-copy prefixes for copies 2..v
};

class MixedProductCheater final : public OnlineGenerator {
public:
    MixedProductCheater(SupportPtr base, int v)
        : OnlineGenerator(0, product_blocks(*base->generator(), v)),
          base_(std::move(base)),
          v_(v) {
        if (v_ < 2) throw ParamError("mixed_product_cheater: v must be >= 2");
    }

    OnlineState start(const Bits&) const override { return OnlineState{nullptr, "start"}; }

    std::vector<std::pair<Frac, OnlineState>> preprocessing(const OnlineState&) const override {
        // copy 1's whole seed is preprocessing randomness
        uint64_t seeds = base_->seed_count();
        std::vector<std::pair<Frac, OnlineState>> out;
        out.reserve(seeds);
        for (uint64_t x = 0; x < seeds; ++x) {
            auto payload = std::make_shared<MixedPayload>();
            payload->committed = base_->generator()->eval_seed(x);
            payload->prefixes.assign(v_ - 1, {});
            out.emplace_back(Frac(1, seeds), OnlineState{payload, "x=" + std::to_string(x)});
        }
        return out;
    }

    std::vector<OnlineBranch> round(const OnlineState& s, int i) const override {
        const auto* p = static_cast<const MixedPayload*>(s.payload.get());
        // cartesian product of the conditional draws of copies 2..v
        std::vector<std::vector<std::pair<Bits, uint64_t>>> options;
        std::vector<uint64_t> totals;
        for (int c = 0; c < v_ - 1; ++c) {
            options.push_back(base_->next_block_counts(p->prefixes[c]));
            uint64_t t = 0;
            for (const auto& [y, cnt] : options.back()) t += cnt;
            totals.push_back(t);
        }
        std::vector<OnlineBranch> out;
        std::vector<size_t> pick(v_ - 1, 0);
        for (;;) {
            Bits block = p->committed[i - 1];
            Frac prob = Frac::one();
            auto payload = std::make_shared<MixedPayload>();
            payload->committed = p->committed;
            payload->prefixes = p->prefixes;
            std::string key = s.key;
            for (int c = 0; c < v_ - 1; ++c) {
                const auto& [y, cnt] = options[c][pick[c]];
                block = block.concat(y);
                prob = prob * Frac(cnt, totals[c]);
                payload->prefixes[c].push_back(y);
                key += "|" + y.to_hex();
            }
            out.push_back({prob, block, OnlineState{payload, key}});
            int c = v_ - 2;
            while (c >= 0 && ++pick[c] == options[c].size()) pick[c--] = 0;
            if (c < 0) break;
        }
        return out;
    }

private:
    static std::vector<int> product_blocks(const BlockGenerator& base, int v) {
        std::vector<int> out;
        for (int b : base.block_bits()) out.push_back(b * v);
        return out;
    }
    SupportPtr base_;
    int v_;
};

}  // namespace

OnlinePtr honest_upfront(SupportPtr support) {
    return std::make_shared<HonestUpfront>(std::move(support));
}
OnlinePtr honest_blockwise(SupportPtr support) {
    return std::make_shared<HonestBlockwise>(std::move(support));
}
OnlinePtr brute_force_resampler(SupportPtr support) { return honest_blockwise(std::move(support)); }

OnlinePtr equalization_reduction(OnlinePtr cheater, GenPtr base, int w) {
    return std::make_shared<EqualizationReduction>(std::move(cheater), std::move(base), w);
}
OnlinePtr product_reduction(OnlinePtr cheater, GenPtr padded_base, int v) {
    return std::make_shared<ProductReduction>(std::move(cheater), std::move(padded_base), v);
}
OnlinePtr mixed_product_cheater(SupportPtr base_support, int v) {
    return std::make_shared<MixedProductCheater>(std::move(base_support), v);
}

// --- measurements ----------------------------------------------------------------

json EntropyMeasurement::to_json() const {
    json out{{"kind", kind}, {"value", value}, {"method", method}, {"budget", budget}};
    if (tail_prob) out["tail_prob"] = *tail_prob;
    if (ci_halfwidth) out["ci_halfwidth"] = *ci_halfwidth;
    if (!extra.empty()) out["extra"] = extra;
    return out;
}

double hoeffding_halfwidth(double range, uint64_t n, double confidence) {
    if (n == 0) return range;
    return range * std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * double(n)));
}

EntropyMeasurement measure_real_shannon(GenPtr g, uint64_t budget, SeedStream& rng) {
    EntropyMeasurement m;
    m.kind = "real-shannon";
    if (budget == 0) {
        OutputSupport support(g);
        m.value = support.real_shannon_entropy();
        m.method = "exact";
        return m;
    }
    // plug-in estimate over sampled seeds
    std::map<std::string, uint64_t> counts;
    for (uint64_t t = 0; t < budget; ++t) {
        uint64_t x = rng.below(uint64_t(1) << g->seed_bits());
        std::string key;
        for (const Bits& y : g->eval_seed(x)) key += y.key();
        ++counts[key];
    }
    double h = 0.0;
    for (const auto& [k, c] : counts) {
        double p = double(c) / double(budget);
        h -= p * std::log2(p);
    }
    m.value = h;
    m.method = "sampled";
    m.budget = budget;
    m.ci_halfwidth = hoeffding_halfwidth(double(g->seed_bits()), budget);
    return m;
}

EntropyMeasurement measure_real_min_per_block(GenPtr g, int block_index) {
    OutputSupport support(g);
    EntropyMeasurement m;
    m.kind = "real-min-per-block";
    m.method = "exact";
    json per_block = json::array();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g->block_count(); ++i) {
        double h = support.block_conditional_min_entropy(i);
        per_block.push_back(h);
        best = std::min(best, h);
    }
    m.extra["per_block"] = per_block;
    m.value = block_index >= 0 ? per_block[block_index].get<double>() : best;
    return m;
}

EntropyMeasurement measure_accessible_expected(const OnlinePtr& a, uint64_t budget,
                                               SeedStream& rng) {
    EntropyMeasurement m;
    m.kind = "accessible-expected";
    if (budget == 0) {
        m.value = expected_accessible_entropy(*a);
        m.method = "exact";
        m.extra["merged_preprocessing_value"] = expected_accessible_entropy_merged_r0(*a);
        return m;
    }
    double sum = 0.0;
    double range = 0.0;
    for (int b : a->block_bits()) range += double(b);
    for (uint64_t t = 0; t < budget; ++t) {
        Transcript tr = run_online(*a, rng);
        sum += accessible_sample_entropy(*a, tr);
    }
    m.value = sum / double(budget);
    m.method = "sampled";
    m.budget = budget;
    m.ci_halfwidth = hoeffding_halfwidth(range, budget);
    return m;
}

EntropyMeasurement measure_accessible_max_tail(const OnlinePtr& a, double threshold,
                                               uint64_t budget, SeedStream& rng) {
    EntropyMeasurement m;
    m.kind = "accessible-max-tail";
    m.value = threshold;
    double eps;
    if (budget == 0) {
        auto atoms = accessible_entropy_atoms(*a);
        Frac tail = Frac::zero();
        for (const auto& [p, h] : atoms)
            if (h > threshold + 1e-9) tail = tail + p;
        eps = tail.to_double();
        m.method = "exact";
    } else {
        uint64_t hits = 0;
        for (uint64_t t = 0; t < budget; ++t) {
            Transcript tr = run_online(*a, rng);
            if (accessible_sample_entropy(*a, tr) > threshold + 1e-9) ++hits;
        }
        eps = double(hits) / double(budget);
        m.method = "sampled";
        m.budget = budget;
        m.ci_halfwidth = hoeffding_halfwidth(1.0, budget);
    }
    m.tail_prob = eps;
    // derived bound on the expected accessible entropy implied by the tail:
    // (1-eps)k + eps(sum of block widths - log eps)
    double ml = 0.0;
    for (int b : a->block_bits()) ml += double(b);
    double derived = eps > 0.0 ? (1.0 - eps) * threshold + eps * (ml - std::log2(eps))
                               : threshold;
    m.extra["derived_expected_bound"] = derived;
    return m;
}

}  // namespace ef
