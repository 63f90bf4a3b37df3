#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "entropy_forge/entropy.hpp"
#include "entropy_forge/lemma_checks.hpp"
#include "entropy_forge/rng.hpp"

using namespace ef;

namespace {

std::string oc(uint64_t v) { return std::string(1, char(v)); }

Distribution uniform_n(int k) {
    std::vector<std::pair<std::string, uint64_t>> counts;
    for (int v = 0; v < (1 << k); ++v) counts.emplace_back(oc(uint64_t(v)), 1);
    return Distribution::from_counts(counts);
}

}  // namespace

TEST_CASE("sample entropy basics") {
    Distribution u8 = uniform_n(3);
    for (int v = 0; v < 8; ++v) CHECK(sample_entropy(u8, oc(v)) == doctest::Approx(3.0));
    Distribution skew = Distribution::from_counts({{oc(0), 2}, {oc(1), 1}, {oc(2), 1}});
    CHECK(sample_entropy(skew, oc(1)) == doctest::Approx(2.0));
    CHECK(std::isinf(sample_entropy(skew, oc(9))));  // outside the support
}

TEST_CASE("the four measures on pinned tables") {
    Distribution u = uniform_n(4);
    CHECK(shannon_entropy(u) == doctest::Approx(4.0));
    CHECK(min_entropy(u) == doctest::Approx(4.0));
    CHECK(max_entropy(u) == doctest::Approx(4.0));
    CHECK(renyi2_entropy(u) == doctest::Approx(4.0));

    Distribution d = Distribution::from_counts({{oc(0), 2}, {oc(1), 1}, {oc(2), 1}});
    CHECK(shannon_entropy(d) == doctest::Approx(1.5));
    CHECK(min_entropy(d) == doctest::Approx(1.0));
    CHECK(max_entropy(d) == doctest::Approx(std::log2(3.0)));
    CHECK(collision_probability(d) == Frac(3, 8));

    Distribution point = Distribution::point(oc(5));
    CHECK(shannon_entropy(point) == doctest::Approx(0.0));
    CHECK(min_entropy(point) == doctest::Approx(0.0));
    CHECK(max_entropy(point) == doctest::Approx(0.0));
    CHECK(renyi2_entropy(point) == doctest::Approx(0.0));
}

TEST_CASE("entropy chain with equality iff flat") {
    SeedStream rng(3);
    for (int t = 0; t < 40; ++t) {
        SeedStream r = rng.child(uint64_t(t));
        Distribution d = random_dyadic_distribution(r, 2 + r.below(40), 9);
        double hmin = min_entropy(d), h2 = renyi2_entropy(d), h = shannon_entropy(d),
               h0 = max_entropy(d);
        CHECK(hmin <= h2 + 1e-9);
        CHECK(h2 <= h + 1e-9);
        CHECK(h <= h0 + 1e-9);
        bool flat = true;
        for (uint64_t w : d.weight_num()) flat = flat && w == d.weight_num()[0];
        if (!flat) CHECK(h0 - hmin > 1e-9);
    }
    Distribution flat = uniform_n(3);
    CHECK(max_entropy(flat) - min_entropy(flat) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("conditional entropies") {
    // X independent of Y
    std::vector<std::pair<std::string, uint64_t>> rows;
    for (uint64_t x = 0; x < 4; ++x)
        for (uint64_t y = 0; y < 2; ++y) rows.emplace_back(oc(x) + oc(y), 1);
    JointDistribution indep(Distribution::from_counts(rows), {1, 1});
    CHECK(cond_shannon_entropy(indep) == doctest::Approx(2.0));

    // X = Y
    rows.clear();
    for (uint64_t x = 0; x < 4; ++x) rows.emplace_back(oc(x) + oc(x), 1);
    JointDistribution copies(Distribution::from_counts(rows), {1, 1});
    CHECK(cond_shannon_entropy(copies) == doctest::Approx(0.0));

    // X uniform on 2 bits, Y its first bit
    rows.clear();
    for (uint64_t x = 0; x < 4; ++x) rows.emplace_back(oc(x) + oc(x >> 1), 1);
    JointDistribution half(Distribution::from_counts(rows), {1, 1});
    CHECK(cond_shannon_entropy(half) == doctest::Approx(1.0));
    CHECK(cond_sample_entropy(half, oc(2), oc(1)) == doctest::Approx(1.0));
    CHECK(std::isinf(cond_sample_entropy(half, oc(2), oc(0))));

    // chain rule H(X,Y) = H(Y) + H(X|Y)
    SeedStream rng(8);
    for (int t = 0; t < 20; ++t) {
        SeedStream r = rng.child(uint64_t(t));
        Distribution d = random_dyadic_distribution(r, 2 + r.below(30), 8);
        // fold outcomes into a pair by splitting the 4-byte tag
        std::vector<std::pair<std::string, uint64_t>> prows;
        for (size_t i = 0; i < d.outcomes().size(); ++i)
            prows.emplace_back(d.outcomes()[i].substr(0, 1) + d.outcomes()[i].substr(1, 1),
                               d.weight_num()[i]);
        JointDistribution j(Distribution::from_counts(prows), {1, 1});
        double lhs = shannon_entropy(j.dist());
        double rhs = shannon_entropy(j.marginal({1}).dist()) + cond_shannon_entropy(j);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("statistical distance and KL") {
    Distribution a = uniform_n(2);
    CHECK(statistical_distance(a, a) == Frac::zero());
    CHECK(kl_divergence(a, a) == doctest::Approx(0.0));

    Distribution b = Distribution::from_counts({{oc(9), 1}, {oc(10), 1}});
    CHECK(statistical_distance(a, b) == Frac::one());
    CHECK(std::isinf(kl_divergence(a, b)));

    Distribution point = Distribution::point(oc(0));
    Distribution two = Distribution::from_counts({{oc(0), 1}, {oc(1), 1}});
    CHECK(statistical_distance(point, two) == Frac(1, 2));
}

TEST_CASE("KL data processing under deterministic coarsening") {
    SeedStream rng(21);
    for (int t = 0; t < 25; ++t) {
        SeedStream r = rng.child(uint64_t(t));
        Distribution p = random_dyadic_distribution(r, 12, 8);
        Distribution q = random_dyadic_distribution(r, 12, 8);
        // p and q share the same support tags by construction
        auto coarsen = [](const Distribution& d) {
            std::vector<std::pair<std::string, uint64_t>> rows;
            for (size_t i = 0; i < d.outcomes().size(); ++i)
                rows.emplace_back(std::string(1, char(uint8_t(d.outcomes()[i][0]) % 3)),
                                  d.weight_num()[i]);
            return Distribution::from_counts(rows);
        };
        double full = kl_divergence(p, q);
        double coarse = kl_divergence(coarsen(p), coarsen(q));
        CHECK(coarse <= full + 1e-9);
    }
}

TEST_CASE("block entropy sums") {
    // empty index set
    std::vector<std::pair<std::string, uint64_t>> rows;
    for (uint64_t a = 0; a < 2; ++a)
        for (uint64_t b = 0; b < 2; ++b) rows.emplace_back(oc(a) + oc(b) + oc(a ^ b), 1);
    JointDistribution xr(Distribution::from_counts(rows), {1, 1, 1});
    for (const std::string& o : xr.dist().outcomes()) {
        CHECK(block_entropy_sum(xr, {}, o) == doctest::Approx(0.0));
        CHECK(block_entropy_sum(xr, {2}, o) == doctest::Approx(0.0));  // determined coordinate
        CHECK(block_entropy_sum(xr, {0, 1, 2}, o) == doctest::Approx(2.0));
        // full-J sum telescopes to the tuple's sample entropy
        CHECK(block_entropy_sum(xr, {0, 1, 2}, o) ==
              doctest::Approx(sample_entropy(xr.dist(), o)));
    }
    // independent uniform bits: full sum = arity for every outcome
    rows.clear();
    for (uint64_t v = 0; v < 8; ++v)
        rows.emplace_back(oc(v & 1) + oc((v >> 1) & 1) + oc((v >> 2) & 1), 1);
    JointDistribution ind(Distribution::from_counts(rows), {1, 1, 1});
    for (const std::string& o : ind.dist().outcomes())
        CHECK(block_entropy_sum(ind, {0, 1, 2}, o) == doctest::Approx(3.0));
}

TEST_CASE("expected sample entropy equals the Shannon entropy") {
    SeedStream rng(31);
    for (int t = 0; t < 20; ++t) {
        SeedStream r = rng.child(uint64_t(t));
        Distribution d = random_dyadic_distribution(r, 2 + r.below(50), 10);
        double e = 0.0;
        for (size_t i = 0; i < d.outcomes().size(); ++i)
            e += (double(d.weight_num()[i]) / std::exp2(d.denom_log2())) *
                 sample_entropy(d, d.outcomes()[i]);
        CHECK(e == doctest::Approx(shannon_entropy(d)).epsilon(1e-12));
    }
}
