#include "entropy_forge/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace ef {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// -log2(num / 2^L) = L - log2(num), exact when num is a power of two.
double neglog2(uint64_t num, int denom_log2) { return double(denom_log2) - std::log2(double(num)); }
}  // namespace

double sample_entropy(const Distribution& d, const std::string& outcome) {
    uint64_t w = d.weight_of(outcome);
    if (w == 0) return kInf;
    return neglog2(w, d.denom_log2());
}

double shannon_entropy(const Distribution& d) {
    double h = 0.0;
    double denom = std::exp2(double(d.denom_log2()));
    for (uint64_t w : d.weight_num()) h += (double(w) / denom) * neglog2(w, d.denom_log2());
    return h;
}

double min_entropy(const Distribution& d) {
    uint64_t maxw = 0;
    for (uint64_t w : d.weight_num()) maxw = std::max(maxw, w);
    return neglog2(maxw, d.denom_log2());
}

double max_entropy(const Distribution& d) { return std::log2(double(d.support_size())); }

Frac collision_probability(const Distribution& d) {
    // sum w_i^2 / 2^{2L}; reduce through 128 bits.
    unsigned __int128 num = 0;
    for (uint64_t w : d.weight_num()) num += (unsigned __int128)w * w;
    unsigned __int128 den = (unsigned __int128)1 << d.denom_log2();
    den *= den;
    unsigned __int128 a = num, b = den;
    while (b) {
        auto t = a % b;
        a = b;
        b = t;
    }
    num /= a;
    den /= a;
    if (num > ~uint64_t(0) || den > ~uint64_t(0))
        throw ParamError("collision_probability: exceeds 64-bit exact range");
    return Frac((uint64_t)num, (uint64_t)den);
}

double renyi2_entropy(const Distribution& d) {
    Frac cp = collision_probability(d);
    return -std::log2(cp.to_double());
}

double cond_sample_entropy(const JointDistribution& xy, const std::string& x,
                           const std::string& y) {
    if (xy.arity() != 2) throw ParamError("cond_sample_entropy: want an (X,Y) pair");
    std::string joint = JointDistribution::pack({x, y}, xy.schema());
    uint64_t wj = xy.dist().weight_of(joint);
    if (wj == 0) return kInf;
    // Pr[X=x | Y=y] = w(x,y) / w(y)
    uint64_t wy = 0;
    const auto& outs = xy.dist().outcomes();
    const auto& ws = xy.dist().weight_num();
    for (size_t k = 0; k < outs.size(); ++k)
        if (xy.coord(outs[k], 1) == y) wy += ws[k];
    return std::log2(double(wy)) - std::log2(double(wj));
}

double cond_shannon_entropy(const JointDistribution& xy) {
    if (xy.arity() != 2) throw ParamError("cond_shannon_entropy: want an (X,Y) pair");
    return shannon_entropy(xy.dist()) - shannon_entropy(xy.marginal({1}).dist());
}

Frac statistical_distance(const Distribution& a, const Distribution& b) {
    // half L1 over the union support, exact.
    std::map<std::string, std::pair<uint64_t, uint64_t>> table;
    for (size_t i = 0; i < a.outcomes().size(); ++i) table[a.outcomes()[i]].first = a.weight_num()[i];
    for (size_t i = 0; i < b.outcomes().size(); ++i) table[b.outcomes()[i]].second = b.weight_num()[i];
    int La = a.denom_log2(), Lb = b.denom_log2();
    unsigned __int128 total = 0;
    for (auto& [o, w] : table) {
        unsigned __int128 pa = (unsigned __int128)w.first << Lb;
        unsigned __int128 pb = (unsigned __int128)w.second << La;
        total += pa >= pb ? pa - pb : pb - pa;
    }
    unsigned __int128 den = (unsigned __int128)1 << (La + Lb);
    den *= 2;
    unsigned __int128 x = total, y = den;
    while (y) {
        auto t = x % y;
        x = y;
        y = t;
    }
    if (x == 0) return Frac::zero();
    total /= x;
    den /= x;
    if (total > ~uint64_t(0) || den > ~uint64_t(0))
        throw ParamError("statistical_distance: exceeds 64-bit exact range");
    return Frac((uint64_t)total, (uint64_t)den);
}

double kl_divergence(const Distribution& p, const Distribution& q) {
    // 0 log 0/0 = 0; P(x) > 0 = Q(x) forces +inf.
    double kl = 0.0;
    double dp = std::exp2(double(p.denom_log2()));
    for (size_t i = 0; i < p.outcomes().size(); ++i) {
        uint64_t wq = q.weight_of(p.outcomes()[i]);
        if (wq == 0) return kInf;
        double px = double(p.weight_num()[i]) / dp;
        double qx = double(wq) / std::exp2(double(q.denom_log2()));
        kl += px * std::log2(px / qx);
    }
    return kl;
}

double block_entropy_sum(const JointDistribution& j, const std::vector<int>& J,
                         const std::string& outcome) {
    for (int i : J)
        if (i < 0 || i >= j.arity()) throw ParamError("block_entropy_sum: index out of range");
    if (!j.dist().contains(outcome)) return kInf;

    // weight of each prefix of the outcome, computed in one sweep.
    std::vector<uint64_t> prefix_w(j.arity() + 1, 0);
    const auto& outs = j.dist().outcomes();
    const auto& ws = j.dist().weight_num();
    for (int upto = 0; upto <= j.arity(); ++upto) {
        std::string want = j.prefix(outcome, upto);
        uint64_t acc = 0;
        for (size_t k = 0; k < outs.size(); ++k)
            if (j.prefix(outs[k], upto) == want) acc += ws[k];
        prefix_w[upto] = acc;
    }
    double sum = 0.0;
    for (int i : J) sum += std::log2(double(prefix_w[i])) - std::log2(double(prefix_w[i + 1]));
    return sum;
}

}  // namespace ef
