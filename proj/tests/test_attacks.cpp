#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "entropy_forge/owf_attacks.hpp"
#include "entropy_forge/errors.hpp"

using namespace ef;

namespace {
GenPtr identity4() { return owf_generator(FunctionTable::identity(4), 4); }
}

TEST_CASE("brute-force preimage oracle") {
    SeedStream rng(1);
    FunctionInverter idinv(FunctionTable::identity(4));
    for (uint64_t y = 0; y < 16; ++y) CHECK(*idinv.invert(y, rng) == y);

    FunctionInverter two(FunctionTable::drop_last_bit(4));
    auto br = two.branches(6);
    REQUIRE(br.size() == 2);
    CHECK(br[0].first == Frac(1, 2));
    CHECK(br[1].first == Frac(1, 2));
    CHECK(br[0].second == 6);
    CHECK(br[1].second == 7);
    CHECK(!two.invert(7, rng));  // odd values are outside the image
}

TEST_CASE("rewinding attack with the resampler inverts a permutation") {
    GenPtr g = identity4();
    auto sup = shared_support(g);
    OnlinePtr a = brute_force_resampler(sup);
    SeedStream rng(3);
    for (uint64_t y = 0; y < 16; ++y) {
        auto res = invert_via_entropy(*a, g, y, 64, rng);
        REQUIRE(res.preimage);
        CHECK(*res.preimage == y);
    }
    // retry limit counts draws: zero draws means immediate failure
    auto res0 = invert_via_entropy(*a, g, 5, 0, rng);
    CHECK(res0.aborted);
    CHECK(!res0.preimage);
}

TEST_CASE("exhaustive attack reports") {
    GenPtr g = identity4();
    auto sup = shared_support(g);
    FunctionTable f = FunctionTable::identity(4);
    SeedStream rng(5);

    OnlinePtr resampler = brute_force_resampler(sup);
    AttackReport rep = owf_success_exhaustive(
        f, [&](uint64_t y, SeedStream& r) { return invert_via_entropy(*resampler, g, y, 64, r); },
        rng);
    CHECK(rep.trials == 16);
    CHECK(rep.success_rate == doctest::Approx(1.0));
    // geometric draws at match probability 1/4 for the two chunk blocks
    CHECK(rep.mean_rewinds_per_block > 2.0);
    CHECK(rep.mean_rewinds_per_block < 6.0);

    // the up-front wrapper succeeds only when its single draw already matches
    OnlinePtr honest = honest_upfront(sup);
    AttackReport hrep = owf_success_probability(
        f, [&](uint64_t y, SeedStream& r) { return invert_via_entropy(*honest, g, y, 1, r); },
        8192, rng);
    CHECK(hrep.success_rate == doctest::Approx(1.0 / 16).epsilon(0.35));
}

TEST_CASE("retry limit presets") {
    GenPtr g = identity4();
    auto sup = shared_support(g);
    OnlinePtr a = brute_force_resampler(sup);
    SeedStream rng(7);
    // epsilon = 1/2 doubles the n^3 budget; success is certain at this scale
    for (uint64_t y = 0; y < 16; ++y) {
        auto res = invert_via_entropy_max(*a, g, y, 0.5, rng);
        REQUIRE(res.preimage);
        CHECK(*res.preimage == y);
    }
    CHECK_THROWS_AS(invert_via_entropy_max(*a, g, 3, 1000.0, rng), ParamError);
}

TEST_CASE("generator from the exact prefix inverter matches the resampler") {
    auto sup = shared_support(identity4());
    OnlinePtr gen = consistent_generator_from_inverter(sup, PrefixInverterMode::Exact);
    CHECK(expected_accessible_entropy(*gen) == doctest::Approx(4.0));
    CHECK(consistent_with(*gen, *sup));

    OnlinePtr fail = consistent_generator_from_inverter(sup, PrefixInverterMode::AlwaysFail);
    CHECK(expected_accessible_entropy(*fail) == doctest::Approx(0.0));
    CHECK(consistent_with(*fail, *sup));
}

TEST_CASE("noise strictly degrades the reduction's accessible entropy") {
    auto sup = shared_support(identity4());
    double prev = expected_accessible_entropy(
        *consistent_generator_from_inverter(sup, PrefixInverterMode::Exact));
    CHECK(prev == doctest::Approx(4.0));
    for (Frac xi : {Frac(1, 8), Frac(1, 4)}) {
        double cur = expected_accessible_entropy(
            *consistent_generator_from_inverter(sup, PrefixInverterMode::Noisy, xi));
        CHECK(cur < prev - 1e-6);
        prev = cur;
    }
}

TEST_CASE("transcript KL bound against the embedded execution") {
    GenPtr g = identity4();
    auto sup = shared_support(g);
    double real = OutputSupport(g).real_shannon_entropy();
    for (OnlinePtr a : {brute_force_resampler(sup), honest_upfront(sup)}) {
        double kl = standalone_embedded_kl(*a, g);
        double acc = expected_accessible_entropy(*a);
        CHECK(kl >= -1e-9);
        CHECK(kl <= real - acc + 1e-6);
    }
    // the resampler's transcript distribution is exactly the embedded one
    CHECK(standalone_embedded_kl(*brute_force_resampler(sup), g) == doctest::Approx(0.0));
}

TEST_CASE("reported successes are verified preimages") {
    FunctionTable f = FunctionTable::random_function(4, 99);
    GenPtr g = owf_generator(f, 4);
    auto sup = shared_support(g);
    OnlinePtr a = brute_force_resampler(sup);
    SeedStream rng(13);
    AttackReport rep = owf_success_exhaustive(
        f, [&](uint64_t y, SeedStream& r) { return invert_via_entropy(*a, g, y, 64, r); }, rng);
    CHECK(rep.successes == rep.trials);  // consistency makes every match a preimage
}
