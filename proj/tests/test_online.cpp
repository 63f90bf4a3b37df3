#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "entropy_forge/online.hpp"
#include "entropy_forge/owf_attacks.hpp"
#include "entropy_forge/errors.hpp"

using namespace ef;

namespace {

SupportPtr identity4() { return shared_support(owf_generator(FunctionTable::identity(4), 4)); }

// exact output distribution of an online generator, by full path enumeration
std::map<std::vector<Bits>, Frac> output_distribution(const OnlineGenerator& a) {
    std::map<std::vector<Bits>, Frac> out;
    struct Walker {
        const OnlineGenerator& a;
        std::map<std::vector<Bits>, Frac>& out;
        void go(const OnlineState& s, int i, Frac p, std::vector<Bits>& blocks) {
            if (i > a.block_count()) {
                auto it = out.find(blocks);
                if (it == out.end())
                    out.emplace(blocks, p);
                else
                    it->second = it->second + p;
                return;
            }
            for (const auto& b : a.round(s, i)) {
                if (b.prob.is_zero()) continue;
                blocks.push_back(b.block);
                go(b.next, i + 1, p * b.prob, blocks);
                blocks.pop_back();
            }
        }
    } w{a, out};
    OnlineState s0 = a.start(Bits());
    std::vector<Bits> blocks;
    for (const auto& [p, s] : a.preprocessing(s0))
        if (!p.is_zero()) w.go(s, 1, p, blocks);
    return out;
}

}  // namespace

TEST_CASE("honest wrapper emits the generator's blocks and replays") {
    auto sup = identity4();
    OnlinePtr a = honest_upfront(sup);
    SeedStream rng(5);
    Transcript t = run_online(*a, rng);
    // round-1 branch index is the seed itself
    auto blocks = sup->generator()->eval_seed(t.rounds[0].branch);
    for (int i = 0; i < 3; ++i) CHECK(t.rounds[i].block == blocks[i]);

    SeedStream r1(77), r2(77);
    Transcript t1 = run_online(*a, r1), t2 = run_online(*a, r2);
    CHECK(t1.rounds.size() == t2.rounds.size());
    for (size_t i = 0; i < t1.rounds.size(); ++i) {
        CHECK(t1.rounds[i].branch == t2.rounds[i].branch);
        CHECK(t1.rounds[i].block == t2.rounds[i].block);
    }
}

TEST_CASE("resampler emits a uniform point of the support") {
    auto sup = identity4();
    OnlinePtr a = brute_force_resampler(sup);
    auto dist = output_distribution(*a);
    CHECK(dist.size() == 16);
    for (const auto& [tuple, p] : dist) {
        CHECK(sup->contains(tuple));
        CHECK(p == Frac(1, 16));
    }
}

TEST_CASE("accessible entropy accounting at the identity base") {
    auto sup = identity4();
    // the blockwise-honest strategy realizes the full real entropy
    CHECK(expected_accessible_entropy(*honest_blockwise(sup)) == doctest::Approx(4.0));
    // pointwise, every transcript of the resampler carries exactly 4 bits
    OnlinePtr r = brute_force_resampler(sup);
    SeedStream rng(3);
    for (int t = 0; t < 20; ++t) {
        Transcript tr = run_online(*r, rng);
        CHECK(accessible_sample_entropy(*r, tr) == doctest::Approx(4.0));
    }
    // the seed-up-front wrapper only gets the first block's marginal
    CHECK(expected_accessible_entropy(*honest_upfront(sup)) == doctest::Approx(2.0));
}

TEST_CASE("deterministic generators carry no accessible entropy") {
    GenPtr det = table_generator(2, 0, {1, 1}, {{Bits(0, 1), Bits(1, 1)}});
    auto sup = shared_support(det);
    OnlinePtr a = brute_force_resampler(sup);
    SeedStream rng(4);
    Transcript t = run_online(*a, rng);
    CHECK(accessible_sample_entropy(*a, t) == doctest::Approx(0.0));
    CHECK(expected_accessible_entropy(*a) == doctest::Approx(0.0));
}

TEST_CASE("expectation identity between DP, atoms and sampling") {
    auto sup = shared_support(owf_generator(FunctionTable::drop_last_bit(4), 4));
    for (OnlinePtr a : {honest_upfront(sup), brute_force_resampler(sup)}) {
        double dp = expected_accessible_entropy(*a);
        auto atoms = accessible_entropy_atoms(*a);
        double from_atoms = 0.0;
        Frac mass = Frac::zero();
        for (const auto& [p, h] : atoms) {
            from_atoms += p.to_double() * h;
            mass = mass + p;
        }
        CHECK(mass == Frac::one());
        CHECK(dp == doctest::Approx(from_atoms).epsilon(1e-9));

        SeedStream rng(9);
        double sum = 0.0;
        const int trials = 4000;
        for (int t = 0; t < trials; ++t)
            sum += accessible_sample_entropy(*a, run_online(*a, rng));
        CHECK(sum / trials == doctest::Approx(dp).epsilon(0.05));
    }
}

TEST_CASE("constructed adversaries stay inside the support") {
    auto sup = identity4();
    CHECK(consistent_with(*honest_upfront(sup), *sup));
    CHECK(consistent_with(*honest_blockwise(sup), *sup));

    GenPtr base = bit_blocks_generator(2);
    auto bsup = shared_support(base);
    GenPtr prod = direct_product(base, 2);
    auto psup = shared_support(prod);
    OnlinePtr cheat = honest_upfront(psup);
    OnlinePtr reduced = product_reduction(cheat, base, 2);
    CHECK(consistent_with(*reduced, *bsup));

    GenPtr eq = equalize(base, 4);
    auto esup = shared_support(eq);
    OnlinePtr echeat = brute_force_resampler(esup);
    OnlinePtr ereduced = equalization_reduction(echeat, base, 4);
    CHECK(consistent_with(*ereduced, *bsup));
}

TEST_CASE("causality: block i depends only on branches up to i") {
    auto sup = identity4();
    for (OnlinePtr a : {brute_force_resampler(sup), honest_upfront(sup)}) {
        SeedStream rng(11);
        for (int probe = 0; probe < 100; ++probe) {
            Transcript t1 = run_online(*a, rng);
            Transcript t2 = run_online(*a, rng);
            // splice: t2's tail after round i onto t1's head; blocks up to i
            // must be t1's regardless of the tail
            int i = 1 + int(rng.below(uint64_t(a->block_count())));
            OnlineState s = a->preprocessing(a->start(Bits()))[t1.r0_branch].second;
            for (int j = 1; j <= i; ++j) {
                auto branches = a->round(s, j);
                REQUIRE(t1.rounds[j - 1].branch < branches.size());
                CHECK(branches[t1.rounds[j - 1].branch].block == t1.rounds[j - 1].block);
                s = branches[t1.rounds[j - 1].branch].next;
            }
            (void)t2;
        }
    }
}

TEST_CASE("product reduction projects the cheater") {
    GenPtr base = bit_blocks_generator(2);
    auto bsup = shared_support(base);
    GenPtr prod = direct_product(base, 2);
    auto psup = shared_support(prod);

    // v = 1 is behaviorally the cheater itself
    OnlinePtr same = product_reduction(honest_upfront(bsup), base, 1);
    auto d_same = output_distribution(*same);
    auto d_orig = output_distribution(*honest_upfront(bsup));
    CHECK(d_same == d_orig);

    // the honest product cheater projects to the honest base distribution
    OnlinePtr reduced = product_reduction(honest_upfront(psup), base, 2);
    auto d_red = output_distribution(*reduced);
    auto d_base = output_distribution(*honest_upfront(bsup));
    for (const auto& [tuple, p] : d_base) CHECK(d_red.at(tuple) == p);
    // block widths match the base schema
    for (const auto& [tuple, p] : d_red)
        for (size_t i = 0; i < tuple.size(); ++i)
            CHECK(tuple[i].size() == base->block_bits()[i]);
}

TEST_CASE("product reduction accessible-entropy floor") {
    GenPtr base = bit_blocks_generator(2);
    auto bsup = shared_support(base);
    int v = 3;
    GenPtr prod = direct_product(base, v);
    auto psup = shared_support(prod);
    std::vector<OnlinePtr> cheaters = {honest_upfront(psup), brute_force_resampler(psup),
                                       mixed_product_cheater(bsup, v)};
    for (const auto& cheat : cheaters) {
        double k_cheat = expected_accessible_entropy(*cheat);
        double k_red = expected_accessible_entropy(*product_reduction(cheat, base, v));
        CHECK(k_red >= k_cheat / v - 1e-6);
    }
}

TEST_CASE("equalization reduction embeds one honest copy") {
    GenPtr base = bit_blocks_generator(2);
    auto bsup = shared_support(base);
    GenPtr eq = equalize(base, 4);
    auto esup = shared_support(eq);

    OnlinePtr reduced = equalization_reduction(honest_upfront(esup), base, 4);
    auto dist = output_distribution(*reduced);
    Frac total = Frac::zero();
    for (const auto& [tuple, p] : dist) {
        CHECK(bsup->contains(tuple));
        total = total + p;
    }
    CHECK(total == Frac::one());
    // one honest copy of the 2-bit base: uniform over the 4 outputs
    for (const auto& [tuple, p] : dist) CHECK(p == Frac(1, 4));
}

TEST_CASE("equalization reduction accessible-entropy accounting") {
    GenPtr base = bit_blocks_generator(2);
    auto bsup = shared_support(base);
    int w = 4;
    GenPtr eq = equalize(base, w);
    auto esup = shared_support(eq);
    double h0 = std::log2(double(bsup->support_size()));
    double logm = std::log2(double(base->block_count()));
    for (OnlinePtr cheat : {honest_upfront(esup), brute_force_resampler(esup)}) {
        double k_cheat = expected_accessible_entropy(*cheat);
        double k_red = expected_accessible_entropy(*equalization_reduction(cheat, base, w));
        CHECK(k_red >= (k_cheat - 2.0 * h0 - logm) / double(w - 2) - 1e-6);
    }
}

TEST_CASE("measurement records") {
    auto sup = identity4();
    SeedStream rng(2);
    EntropyMeasurement real = measure_real_shannon(sup->generator(), 0, rng);
    CHECK(real.method == "exact");
    CHECK(real.value == doctest::Approx(4.0));

    EntropyMeasurement mb = measure_real_min_per_block(sup->generator(), -1);
    CHECK(mb.value == doctest::Approx(0.0));  // the final block is determined
    CHECK(mb.extra.at("per_block")[0].get<double>() == doctest::Approx(2.0));

    OnlinePtr a = brute_force_resampler(sup);
    EntropyMeasurement acc = measure_accessible_expected(a, 0, rng);
    CHECK(acc.value == doctest::Approx(4.0));
    EntropyMeasurement sampled = measure_accessible_expected(a, 500, rng);
    CHECK(sampled.method == "sampled");
    CHECK(*sampled.ci_halfwidth > 0.0);
    CHECK(sampled.value == doctest::Approx(4.0).epsilon(0.02));

    EntropyMeasurement tail = measure_accessible_max_tail(a, 4.5, 0, rng);
    CHECK(*tail.tail_prob == doctest::Approx(0.0));
}

TEST_CASE("both preprocessing conventions are reported") {
    GenPtr base = bit_blocks_generator(2);
    auto bsup = shared_support(base);
    // no preprocessing: the conventions coincide
    OnlinePtr plain = brute_force_resampler(bsup);
    CHECK(expected_accessible_entropy_merged_r0(*plain) ==
          doctest::Approx(expected_accessible_entropy(*plain)));

    // the projection reduction keeps its coordinate choice in r0, so folding
    // r0 into round 1 can only add entropy to the first charge
    GenPtr prod = direct_product(base, 2);
    auto psup = shared_support(prod);
    OnlinePtr red = product_reduction(honest_upfront(psup), base, 2);
    double conditioned = expected_accessible_entropy(*red);
    double merged = expected_accessible_entropy_merged_r0(*red);
    CHECK(merged >= conditioned - 1e-12);

    SeedStream rng(1);
    EntropyMeasurement m = measure_accessible_expected(red, 0, rng);
    CHECK(m.extra.contains("merged_preprocessing_value"));
    CHECK(m.extra.at("merged_preprocessing_value").get<double>() == doctest::Approx(merged));
}

TEST_CASE("a tampered transcript refuses to replay") {
    auto sup = identity4();
    OnlinePtr a = brute_force_resampler(sup);
    SeedStream rng(15);
    Transcript t = run_online(*a, rng);
    Transcript bad = t;
    bad.rounds[1].block = bad.rounds[1].block ^ Bits(1, bad.rounds[1].block.size());
    CHECK_THROWS_AS(accessible_sample_entropy(*a, bad), ConsistencyError);
    Transcript bad2 = t;
    bad2.rounds[0].branch = 999;
    CHECK_THROWS_AS(accessible_sample_entropy(*a, bad2), ConsistencyError);
}

TEST_CASE("inverter-oracle record dispatches every strategy") {
    FunctionTable f = FunctionTable::identity(4);
    GenPtr g = owf_generator(f, 4);
    auto sup = shared_support(g);
    SeedStream rng(23);

    InverterOracle brute{f, InverterOracle::Strategy::BruteForceExact, 0, 1.0, Frac::zero(),
                         nullptr, nullptr};
    CHECK(*brute.invert(9, rng).preimage == 9);

    InverterOracle rewind{f, InverterOracle::Strategy::EntropyRewind, 64, 1.0, Frac::zero(),
                          brute_force_resampler(sup), g};
    CHECK(*rewind.invert(9, rng).preimage == 9);

    InverterOracle rewind_max{f, InverterOracle::Strategy::EntropyRewindMax, 0, 0.5,
                              Frac::zero(), brute_force_resampler(sup), g};
    CHECK(*rewind_max.invert(9, rng).preimage == 9);
}

TEST_CASE("transcript json carries branch indices and blocks") {
    auto sup = identity4();
    OnlinePtr a = honest_upfront(sup);
    SeedStream rng(6);
    Transcript t = run_online(*a, rng);
    auto j = t.to_json(*a);
    CHECK(j.contains("z_hex"));
    CHECK(j.contains("r0_hex"));
    CHECK(j.at("rounds").size() == 3);
    CHECK(j.at("rounds")[0].contains("r_hex"));
    CHECK(j.at("rounds")[0].contains("y_hex"));
}
