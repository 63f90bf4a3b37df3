#include "entropy_forge/lemma_checks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "entropy_forge/entropy.hpp"
#include "entropy_forge/frac.hpp"

namespace ef {

using nlohmann::json;

namespace {

constexpr double kTol = 1e-9;
constexpr size_t kExactSupportCap = size_t(1) << 20;

void check_regime(size_t support) {
    if (support > kExactSupportCap)
        throw RegimeError("verify_lemma: support exceeds 2^20, supply a sampling budget");
}

// prefix-sum sampler over a distribution's weight table
struct OutcomeSampler {
    const Distribution& d;
    std::vector<uint64_t> cum;
    explicit OutcomeSampler(const Distribution& dist) : d(dist) {
        cum.reserve(d.weight_num().size());
        uint64_t acc = 0;
        for (uint64_t w : d.weight_num()) cum.push_back(acc += w);
    }
    size_t draw(SeedStream& rng) const {
        uint64_t u = rng.below(uint64_t(1) << d.denom_log2());
        return size_t(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    }
};

double hoeffding99(double range, uint64_t n) {
    return n ? range * std::sqrt(std::log(2.0 / 0.01) / (2.0 * double(n))) : range;
}

double dget(const json& p, const char* k, double dflt) {
    return p.contains(k) ? p.at(k).get<double>() : dflt;
}
int iget(const json& p, const char* k, int dflt) {
    return p.contains(k) ? p.at(k).get<int>() : dflt;
}

std::vector<int> all_coords(const JointDistribution& j) {
    std::vector<int> J(j.arity());
    for (int i = 0; i < j.arity(); ++i) J[i] = i;
    return J;
}

std::vector<int> coords_from(const json& p, const JointDistribution& j) {
    if (!p.contains("J")) return all_coords(j);
    return p.at("J").get<std::vector<int>>();
}

VerificationReport make(const std::string& tag, double bound, double measured, bool pass,
                        json params) {
    return VerificationReport{tag, bound, measured, pass, std::move(params)};
}

// --- individual checkers --------------------------------------------------

VerificationReport support_size_identity_sampled(const Distribution& d, const json& p) {
    uint64_t budget = p.at("budget").get<uint64_t>();
    if (budget == 0) throw ParamError("support-size-identity: zero budget");
    SeedStream rng = SeedStream(p.value("seed", uint64_t(1))).child("lemma-sample");
    OutcomeSampler sampler(d);
    uint64_t min_w = ~uint64_t(0);
    for (uint64_t w : d.weight_num()) min_w = std::min(min_w, w);
    double range = std::exp2(double(d.denom_log2())) / double(min_w);  // max of 2^H
    double sum = 0.0;
    for (uint64_t t = 0; t < budget; ++t) {
        size_t i = sampler.draw(rng);
        sum += std::exp2(double(d.denom_log2())) / double(d.weight_num()[i]);
    }
    double est = sum / double(budget);
    double ci = hoeffding99(range, budget);
    double bound = double(d.support_size());
    json params = p;
    params["method"] = "sampled";
    params["ci_halfwidth"] = ci;
    return make("support-size-identity", bound, est, std::abs(est - bound) <= ci + kTol, params);
}

VerificationReport high_entropy_tail_sampled(const Distribution& d, const json& p) {
    uint64_t budget = p.at("budget").get<uint64_t>();
    if (budget == 0) throw ParamError("high-entropy-tail: zero budget");
    SeedStream rng = SeedStream(p.value("seed", uint64_t(1))).child("lemma-sample");
    OutcomeSampler sampler(d);
    double k = dget(p, "k", 0.5 * (min_entropy(d) + shannon_entropy(d)));
    double h0 = max_entropy(d);
    double hsum = 0.0;
    uint64_t tail = 0;
    for (uint64_t t = 0; t < budget; ++t) {
        size_t i = sampler.draw(rng);
        double h = double(d.denom_log2()) - std::log2(double(d.weight_num()[i]));
        hsum += h;
        if (h > k) ++tail;
    }
    double eps_hi = std::min(1.0, double(tail) / double(budget) + hoeffding99(1.0, budget));
    double ci_h = hoeffding99(double(d.denom_log2()), budget);
    double est = hsum / double(budget);
    double bound = k + eps_hi * h0 + 1.0;
    json params = p;
    params["method"] = "sampled";
    params["k"] = k;
    params["eps_upper"] = eps_hi;
    params["ci_halfwidth"] = ci_h;
    return make("high-entropy-tail", bound, est, est - ci_h <= bound + kTol, params);
}

VerificationReport support_size_identity(const Distribution& d, const json& p) {
    if (p.contains("budget")) return support_size_identity_sampled(d, p);
    check_regime(d.support_size());
    double denom = std::exp2(double(d.denom_log2()));
    double e = 0.0;
    for (uint64_t w : d.weight_num()) e += (double(w) / denom) * (denom / double(w));
    double bound = double(d.support_size());
    bool pass = std::abs(e - bound) <= kTol * std::max(1.0, bound);

    // Markov tail at a few eps values, exact.
    double h0 = max_entropy(d);
    json tails = json::array();
    for (int te = 1; te <= 3; ++te) {
        double eps = std::exp2(double(-te));
        double thr = -std::log2(eps) + h0;
        uint64_t tail_num = 0;
        for (size_t i = 0; i < d.outcomes().size(); ++i) {
            double h = double(d.denom_log2()) - std::log2(double(d.weight_num()[i]));
            if (h > thr + kTol) tail_num += d.weight_num()[i];
        }
        Frac tailp(tail_num, uint64_t(1) << d.denom_log2());
        pass = pass && tailp.to_double() < eps + kTol;
        tails.push_back({{"eps", eps}, {"tail", tailp.to_double()}});
    }
    json params = p;
    params["tails"] = tails;
    return make("support-size-identity", bound, e, pass, params);
}

VerificationReport high_entropy_tail(const Distribution& d, const json& p) {
    if (p.contains("budget")) return high_entropy_tail_sampled(d, p);
    check_regime(d.support_size());
    double k = dget(p, "k", 0.5 * (min_entropy(d) + shannon_entropy(d)));
    uint64_t eps_num = 0;
    for (size_t i = 0; i < d.outcomes().size(); ++i) {
        double h = double(d.denom_log2()) - std::log2(double(d.weight_num()[i]));
        if (h > k) eps_num += d.weight_num()[i];
    }
    double e = Frac(eps_num, uint64_t(1) << d.denom_log2()).to_double();
    double h0 = max_entropy(d);
    double bound = e > 0.0 ? (1.0 - e) * k + e * (h0 - std::log2(e)) : k;
    double weak = k + e * h0 + 1.0;
    double measured = shannon_entropy(d);
    bool pass = measured <= bound + kTol && bound <= weak + kTol;
    json params = p;
    params["k"] = k;
    params["eps"] = e;
    params["weak_bound"] = weak;
    return make("high-entropy-tail", bound, measured, pass, params);
}

VerificationReport conditioning_drop(const JointDistribution& j, const json& p) {
    check_regime(j.dist().support_size());
    if (j.arity() != 2) throw ParamError("conditioning-drop: want an (X,Y) pair");
    int t = iget(p, "t", 3);
    double k = min_entropy(j.marginal({0}).dist());
    double ell = max_entropy(j.marginal({1}).dist());
    double thr = k - ell - double(t);

    Frac tail = Frac::zero();
    const auto& outs = j.dist().outcomes();
    const auto& ws = j.dist().weight_num();
    for (size_t i = 0; i < outs.size(); ++i) {
        double h = cond_sample_entropy(j, j.coord(outs[i], 0), j.coord(outs[i], 1));
        if (h < thr - kTol) tail = tail + Frac(ws[i], uint64_t(1) << j.dist().denom_log2());
    }
    double bound = std::exp2(double(-t));
    bool pass = tail.to_double() < bound + kTol;
    json params = p;
    params["t"] = t;
    params["min_entropy_x"] = k;
    params["max_entropy_y"] = ell;
    return make("conditioning-drop", bound, tail.to_double(), pass, params);
}

VerificationReport smoothing(const Distribution& d, const json& p) {
    check_regime(d.support_size());
    int L = d.denom_log2();
    int k = iget(p, "k", std::max(0, (int)std::floor(min_entropy(d)) + 1));
    if (k > L) k = L;
    uint64_t cap = uint64_t(1) << (L - k);

    // The witness: cap every weight at 2^-k and push the removed mass onto
    // fresh padding outcomes, none heavier than 2^-k.
    uint64_t removed = 0;
    std::vector<std::pair<std::string, uint64_t>> counts;
    for (size_t i = 0; i < d.outcomes().size(); ++i) {
        uint64_t w = d.weight_num()[i];
        counts.emplace_back(d.outcomes()[i], std::min(w, cap));
        if (w > cap) removed += w - cap;
    }
    Frac tail = Frac::zero();
    for (uint64_t w : d.weight_num())
        if (w > cap) tail = tail + Frac(w, uint64_t(1) << L);

    int pads = 0;
    uint64_t left = removed;
    while (left > 0) {
        uint64_t take = std::min(left, cap);
        counts.emplace_back(std::string("\x01pad") + std::to_string(pads++), take);
        left -= take;
    }
    // counts still totals 2^L, so the witness is a valid distribution.
    Distribution smoothed = Distribution::from_counts(counts);
    Frac sd = statistical_distance(d, smoothed);
    double hmin = min_entropy(smoothed);
    bool pass = sd <= tail && hmin >= double(k) - kTol;
    json params = p;
    params["k"] = k;
    params["witness_min_entropy"] = hmin;
    params["pad_outcomes"] = pads;
    return make("smoothing", tail.to_double(), sd.to_double(), pass, params);
}

// t-fold exact convolution of the sample-entropy distribution. Classes are
// keyed by the exact probability of the class member, so equal entropies
// merge without floating-point grouping.
std::map<std::pair<uint64_t, uint64_t>, Frac> convolve_entropy(
    const std::vector<std::pair<Frac, Frac>>& atoms, int t) {
    // atoms: (probability of drawing the class, pointwise probability value)
    std::map<std::pair<uint64_t, uint64_t>, Frac> acc;
    acc[{1, 1}] = Frac::one();  // product of zero probabilities
    for (int step = 0; step < t; ++step) {
        std::map<std::pair<uint64_t, uint64_t>, Frac> next;
        for (const auto& [prod, mass] : acc) {
            Frac prodf(prod.first, prod.second);
            for (const auto& [pa, va] : atoms) {
                Frac np = prodf * va;
                auto key = std::make_pair(np.num, np.den);
                auto it = next.find(key);
                if (it == next.end())
                    next.emplace(key, mass * pa);
                else
                    it->second = it->second + mass * pa;
            }
            if (next.size() > 500000)
                throw RegimeError("flattening: exact convolution too large, lower t");
        }
        acc = std::move(next);
    }
    return acc;
}

VerificationReport flattening_common(const std::string& tag,
                                     const std::vector<std::pair<Frac, Frac>>& atoms,
                                     double mean_h, const json& p) {
    // default depth backs off with the class count (map growth) and with the
    // atom denominators (64-bit exact products), staying exact either way
    int den_bits = 1;
    for (const auto& [pa, va] : atoms) {
        int b = 0;
        while ((uint64_t(1) << b) < va.den && b < 63) ++b;
        den_bits = std::max(den_bits, b);
    }
    int t_default = atoms.size() <= 8 ? 8 : atoms.size() <= 24 ? 5 : 3;
    t_default = std::max(1, std::min(t_default, 62 / den_bits));
    int t = iget(p, "t", t_default);
    double eps = dget(p, "eps", 1.0 / std::exp2(4));
    if (t < 1 || eps <= 0.0 || eps > 1.0) throw ParamError(tag + ": bad t/eps");
    if (atoms.size() > 64 || t > 12) throw RegimeError(tag + ": convolution too large");
    if (t * den_bits > 62) throw RegimeError(tag + ": t too deep for exact 64-bit products");

    double var = 0.0;
    for (const auto& [pa, va] : atoms) {
        double h = -std::log2(va.to_double());
        var += pa.to_double() * (h - mean_h) * (h - mean_h);
    }
    double dev = std::sqrt(double(t) * var / eps);

    auto conv = convolve_entropy(atoms, t);
    double thr = double(t) * mean_h - dev;
    Frac tail = Frac::zero();
    for (const auto& [prod, mass] : conv) {
        double h = -std::log2(Frac(prod.first, prod.second).to_double());
        if (h < thr - kTol) tail = tail + mass;
    }
    bool pass = tail.to_double() <= eps + kTol;
    json params = p;
    params["t"] = t;
    params["eps"] = eps;
    params["deviation"] = dev;
    params["variance"] = var;
    return make(tag, eps, tail.to_double(), pass, params);
}

VerificationReport flattening(const Distribution& d, const json& p) {
    check_regime(d.support_size());
    std::vector<std::pair<Frac, Frac>> atoms;
    std::map<uint64_t, uint64_t> by_weight;  // weight value -> total mass numerator
    for (uint64_t w : d.weight_num()) by_weight[w] += w;
    for (const auto& [w, mass] : by_weight)
        atoms.emplace_back(Frac(mass, uint64_t(1) << d.denom_log2()),
                           Frac(w, uint64_t(1) << d.denom_log2()));
    return flattening_common("flattening", atoms, shannon_entropy(d), p);
}

VerificationReport flattening_conditional(const JointDistribution& j, const json& p) {
    check_regime(j.dist().support_size());
    if (j.arity() != 2) throw ParamError("flattening-conditional: want an (X,Y) pair");
    // conditional probability p(x|y) = w(x,y)/w(y)
    std::map<std::string, uint64_t> wy;
    const auto& outs = j.dist().outcomes();
    const auto& ws = j.dist().weight_num();
    for (size_t i = 0; i < outs.size(); ++i) wy[j.coord(outs[i], 1)] += ws[i];
    std::map<std::pair<uint64_t, uint64_t>, Frac> by_cond;
    for (size_t i = 0; i < outs.size(); ++i) {
        Frac cond(ws[i], wy[j.coord(outs[i], 1)]);
        auto key = std::make_pair(cond.num, cond.den);
        Frac mass(ws[i], uint64_t(1) << j.dist().denom_log2());
        auto it = by_cond.find(key);
        if (it == by_cond.end())
            by_cond.emplace(key, mass);
        else
            it->second = it->second + mass;
    }
    std::vector<std::pair<Frac, Frac>> atoms;
    double mean = 0.0;
    for (const auto& [cond, mass] : by_cond) {
        Frac c(cond.first, cond.second);
        atoms.emplace_back(mass, c);
        mean += mass.to_double() * -std::log2(c.to_double());
    }
    return flattening_common("flattening-conditional", atoms, mean, p);
}

VerificationReport block_sum_expectation(const JointDistribution& j, const json& p) {
    check_regime(j.dist().support_size());
    auto J = coords_from(p, j);
    const auto& outs = j.dist().outcomes();
    const auto& ws = j.dist().weight_num();
    double denom = std::exp2(double(j.dist().denom_log2()));
    double expect = 0.0;
    for (size_t i = 0; i < outs.size(); ++i)
        expect += (double(ws[i]) / denom) * block_entropy_sum(j, J, outs[i]);

    // sum of conditional Shannon entropies via prefix marginals
    double cond_sum = 0.0;
    for (int c : J) {
        std::vector<int> upto;
        for (int i = 0; i <= c; ++i) upto.push_back(i);
        std::vector<int> strict(upto.begin(), upto.end() - 1);
        double h_all = shannon_entropy(j.marginal(upto).dist());
        double h_prev = strict.empty() ? 0.0 : shannon_entropy(j.marginal(strict).dist());
        cond_sum += h_all - h_prev;
    }
    double h0 = max_entropy(j.marginal(J).dist());
    bool pass = std::abs(expect - cond_sum) <= kTol && cond_sum <= h0 + kTol;
    json params = p;
    params["J"] = J;
    params["h0_of_selected"] = h0;
    return make("block-sum-expectation", cond_sum, expect, pass, params);
}

VerificationReport block_sum_tail(const JointDistribution& j, const json& p) {
    check_regime(j.dist().support_size());
    auto J = coords_from(p, j);
    const auto& outs = j.dist().outcomes();
    const auto& ws = j.dist().weight_num();
    double denom = std::exp2(double(j.dist().denom_log2()));

    std::vector<double> sums(outs.size());
    double expect = 0.0;
    for (size_t i = 0; i < outs.size(); ++i) {
        sums[i] = block_entropy_sum(j, J, outs[i]);
        expect += (double(ws[i]) / denom) * sums[i];
    }
    double k = dget(p, "k", expect);
    double eps = 0.0;
    for (size_t i = 0; i < outs.size(); ++i)
        if (sums[i] > k + kTol) eps += double(ws[i]) / denom;
    double h0 = max_entropy(j.marginal(J).dist());
    double bound = k + eps * h0 + 1.0;
    bool pass = expect <= bound + kTol;
    json params = p;
    params["J"] = J;
    params["k"] = k;
    params["eps"] = eps;
    return make("block-sum-tail", bound, expect, pass, params);
}

VerificationReport block_sum_support_size(const JointDistribution& j, const json& p) {
    check_regime(j.dist().support_size());
    auto J = coords_from(p, j);
    const auto& outs = j.dist().outcomes();
    const auto& ws = j.dist().weight_num();
    double denom = std::exp2(double(j.dist().denom_log2()));
    double e = 0.0;
    for (size_t i = 0; i < outs.size(); ++i)
        e += (double(ws[i]) / denom) * std::exp2(block_entropy_sum(j, J, outs[i]));
    double bound = double(j.marginal(J).dist().support_size());
    bool pass = e <= bound * (1.0 + kTol) + kTol;
    json params = p;
    params["J"] = J;
    return make("block-sum-support-size", bound, e, pass, params);
}

VerificationReport subadditivity(const JointDistribution& j, const json& p) {
    check_regime(j.dist().support_size());
    const auto& outs = j.dist().outcomes();
    const auto& ws = j.dist().weight_num();
    double denom = std::exp2(double(j.dist().denom_log2()));

    std::vector<std::map<std::string, uint64_t>> marg(j.arity());
    for (size_t i = 0; i < outs.size(); ++i)
        for (int c = 0; c < j.arity(); ++c) marg[c][j.coord(outs[i], c)] += ws[i];

    // E[2^{H(x) - sum_i H_i(x_i)}] = sum_x prod_i Pr[X_i = x_i]
    double e = 0.0;
    for (size_t i = 0; i < outs.size(); ++i) {
        double prod = 1.0;
        for (int c = 0; c < j.arity(); ++c)
            prod *= double(marg[c][j.coord(outs[i], c)]) / denom;
        e += prod;
    }
    bool pass = e <= 1.0 + kTol;
    return make("subadditivity", 1.0, e, pass, p);
}

}  // namespace

json VerificationReport::to_json() const {
    return json{{"lemma", lemma}, {"bound", bound}, {"measured", measured}, {"pass", pass},
                {"params", params}};
}

std::vector<std::string> lemma_tags() {
    return {"support-size-identity", "high-entropy-tail",      "conditioning-drop",
            "smoothing",             "flattening",             "flattening-conditional",
            "block-sum-expectation", "block-sum-tail",         "block-sum-support-size",
            "subadditivity"};
}

bool lemma_wants_joint(const std::string& tag) {
    return tag == "conditioning-drop" || tag == "flattening-conditional" ||
           tag == "block-sum-expectation" || tag == "block-sum-tail" ||
           tag == "block-sum-support-size" || tag == "subadditivity";
}

VerificationReport verify_lemma(const std::string& tag, const Distribution& d, const json& p) {
    if (tag == "support-size-identity") return support_size_identity(d, p);
    if (tag == "high-entropy-tail") return high_entropy_tail(d, p);
    if (tag == "smoothing") return smoothing(d, p);
    if (tag == "flattening") return flattening(d, p);
    if (lemma_wants_joint(tag)) throw ParamError("verify_lemma: tag '" + tag + "' needs a joint");
    throw ParamError("verify_lemma: unknown tag '" + tag + "'");
}

VerificationReport verify_lemma(const std::string& tag, const JointDistribution& j, const json& p) {
    if (tag == "conditioning-drop") return conditioning_drop(j, p);
    if (tag == "flattening-conditional") return flattening_conditional(j, p);
    if (tag == "block-sum-expectation") return block_sum_expectation(j, p);
    if (tag == "block-sum-tail") return block_sum_tail(j, p);
    if (tag == "block-sum-support-size") return block_sum_support_size(j, p);
    if (tag == "subadditivity") return subadditivity(j, p);
    if (!lemma_wants_joint(tag)) return verify_lemma(tag, j.dist(), p);
    throw ParamError("verify_lemma: unknown tag '" + tag + "'");
}

Distribution random_dyadic_distribution(SeedStream& rng, size_t support, int denom_log2) {
    if (support == 0) throw ParamError("random_dyadic_distribution: empty support");
    uint64_t total = uint64_t(1) << denom_log2;
    if (support > total) throw ParamError("random_dyadic_distribution: support exceeds denominator");

    // a uniform composition of 2^L into `support` positive parts
    std::vector<uint64_t> cuts;
    cuts.reserve(support + 1);
    std::map<uint64_t, bool> used;
    while (cuts.size() < support - 1) {
        uint64_t c = 1 + rng.below(total - 1);
        if (!used[c]) {
            used[c] = true;
            cuts.push_back(c);
        }
    }
    cuts.push_back(0);
    cuts.push_back(total);
    std::sort(cuts.begin(), cuts.end());

    std::vector<std::pair<std::string, uint64_t>> counts;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        uint32_t tag = (uint32_t)i;
        std::string outcome(4, '\0');
        for (int b = 0; b < 4; ++b) outcome[b] = char((tag >> (8 * b)) & 0xff);
        counts.emplace_back(outcome, cuts[i + 1] - cuts[i]);
    }
    return Distribution::from_counts(counts);
}

LemmaCorpus builtin_lemma_corpus(uint64_t seed, int random_count) {
    LemmaCorpus corpus;
    SeedStream rng = SeedStream(seed).child("lemma-corpus");

    auto byte_outcome = [](uint64_t v, int bytes) {
        std::string s(bytes, '\0');
        for (int b = 0; b < bytes; ++b) s[b] = char((v >> (8 * b)) & 0xff);
        return s;
    };

    {
        std::vector<std::pair<std::string, uint64_t>> u;
        for (uint64_t v = 0; v < 8; ++v) u.emplace_back(byte_outcome(v, 1), 1);
        corpus.dists.emplace_back("uniform-8", Distribution::from_counts(u));
    }
    {
        std::vector<std::pair<std::string, uint64_t>> g = {
            {byte_outcome(0, 1), 8}, {byte_outcome(1, 1), 4}, {byte_outcome(2, 1), 2},
            {byte_outcome(3, 1), 1}, {byte_outcome(4, 1), 1}};
        corpus.dists.emplace_back("dyadic-geometric", Distribution::from_counts(g));
    }
    corpus.dists.emplace_back("point-mass", Distribution::point(byte_outcome(7, 1)));
    for (int i = 0; i < random_count; ++i) {
        SeedStream r = rng.child(uint64_t(i));
        size_t support = 2 + r.below(62);
        corpus.dists.emplace_back("random-" + std::to_string(i),
                                  random_dyadic_distribution(r, support, 10));
    }

    // (X, Y) with X uniform on 8 bits and Y a 2-bit function of X.
    {
        std::vector<std::pair<std::string, uint64_t>> rows;
        for (uint64_t x = 0; x < 256; ++x) {
            uint64_t y = (x * 0x2d) >> 6 & 0x3;
            rows.emplace_back(byte_outcome(x, 1) + byte_outcome(y, 1), 1);
        }
        corpus.joints.emplace_back(
            "x-uniform8-y-2bit", JointDistribution(Distribution::from_counts(rows), {1, 1}));
    }
    // X = U_2, Y = first bit of X.
    {
        std::vector<std::pair<std::string, uint64_t>> rows;
        for (uint64_t x = 0; x < 4; ++x)
            rows.emplace_back(byte_outcome(x, 1) + byte_outcome(x >> 1, 1), 1);
        corpus.joints.emplace_back("x-u2-y-first-bit",
                                   JointDistribution(Distribution::from_counts(rows), {1, 1}));
    }
    // Three coordinates with X3 = X1 xor X2.
    {
        std::vector<std::pair<std::string, uint64_t>> rows;
        for (uint64_t a = 0; a < 2; ++a)
            for (uint64_t b = 0; b < 2; ++b)
                rows.emplace_back(
                    byte_outcome(a, 1) + byte_outcome(b, 1) + byte_outcome(a ^ b, 1), 1);
        corpus.joints.emplace_back("xor-triple",
                                   JointDistribution(Distribution::from_counts(rows), {1, 1, 1}));
    }
    // Correlated non-uniform pair.
    {
        std::vector<std::pair<std::string, uint64_t>> rows = {
            {byte_outcome(0, 1) + byte_outcome(0, 1), 5},
            {byte_outcome(0, 1) + byte_outcome(1, 1), 3},
            {byte_outcome(1, 1) + byte_outcome(0, 1), 2},
            {byte_outcome(1, 1) + byte_outcome(1, 1), 6}};
        corpus.joints.emplace_back("skewed-pair",
                                   JointDistribution(Distribution::from_counts(rows), {1, 1}));
    }
    return corpus;
}

std::vector<VerificationReport> verify_all_lemmas(const LemmaCorpus& corpus, int threads) {
    struct Task {
        std::string tag;
        bool joint;
        size_t index;
        std::string name;
    };
    std::vector<Task> tasks;
    for (const std::string& tag : lemma_tags()) {
        bool needs_pair = tag == "conditioning-drop" || tag == "flattening-conditional";
        if (!lemma_wants_joint(tag))
            for (size_t i = 0; i < corpus.dists.size(); ++i)
                tasks.push_back({tag, false, i, corpus.dists[i].first});
        for (size_t i = 0; i < corpus.joints.size(); ++i) {
            if (needs_pair && corpus.joints[i].second.arity() != 2) continue;
            tasks.push_back({tag, true, i, corpus.joints[i].first});
        }
    }

    std::vector<VerificationReport> out(tasks.size());
    auto run_task = [&](size_t t) {
        const Task& task = tasks[t];
        out[t] = task.joint ? verify_lemma(task.tag, corpus.joints[task.index].second)
                            : verify_lemma(task.tag, corpus.dists[task.index].second);
        out[t].params["instance"] = task.name;
    };
    threads = std::max(1, std::min<int>(threads, (int)tasks.size()));
    if (threads == 1) {
        for (size_t t = 0; t < tasks.size(); ++t) run_task(t);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1))
                    run_task(t);
            });
        for (auto& th : pool) th.join();
    }
    return out;
}

}  // namespace ef
