#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <thread>

#include "entropy_forge/protocol.hpp"
#include "entropy_forge/errors.hpp"

using namespace ef;

namespace {

// 2-element support, blocks ("0","0") and ("0","1"): all binding action is in
// the final block.
ProtocolParams support2_params(int h1_range = 1, int h2_range = 1) {
    ProtocolParams p;
    p.n = 4;
    p.generator = table_generator(4, 1, {1, 1},
                                  {{Bits(0, 1), Bits(0, 1)}, {Bits(0, 1), Bits(1, 1)}});
    p.h1_range_bits = h1_range;
    p.h1_order = 2;
    p.h2_range_bits = h2_range;
    p.tcr_range_bits = 0;
    return p;
}

ProtocolParams bitblocks_params(int n, int v, int delta) {
    ProtocolParams p;
    p.n = n;
    p.generator = v > 1 ? direct_product(bit_blocks_generator(n), v) : bit_blocks_generator(n);
    p.h1_range_bits = delta;
    p.h1_order = 2;
    p.h2_range_bits = 0;
    p.tcr_range_bits = 0;
    return p;
}

class ScriptedCoins final : public ReceiverCoins {
public:
    ScriptedCoins(std::vector<uint64_t> draws, SeedStream rng) : draws_(std::move(draws)), rng_(rng) {}
    Bits key_bits(int width) override { return rng_.bits(width); }
    uint64_t coin_draw(uint64_t bound) override {
        if (next_ < draws_.size()) return draws_[next_++] % bound;
        return rng_.below(bound);
    }

private:
    std::vector<uint64_t> draws_;
    size_t next_ = 0;
    SeedStream rng_;
};

}  // namespace

TEST_CASE("completeness: commit then reveal echoes the bit") {
    for (const ProtocolParams& params :
         {support2_params(), bitblocks_params(4, 2, 0), bitblocks_params(2, 1, 1)}) {
        for (int b : {0, 1}) {
            for (uint64_t seed = 1; seed <= 25; ++seed) {
                CommitResult res = run_commit(params, b, seed, seed + 1000);
                auto echoed = reveal_verify(res.commitment, res.opening, params);
                REQUIRE(echoed);
                CHECK(*echoed == b);
                // flipped bit is rejected
                Opening flipped{1 - b, res.opening.sigma};
                CHECK(!reveal_verify(res.commitment, flipped, params));
            }
        }
    }
}

TEST_CASE("honest first-round reply is the hash of the first block") {
    ProtocolParams params = bitblocks_params(2, 2, 2);
    CommitResult res = run_commit(params, 0, 7, 8);
    auto frames = decode_frames(res.commitment);
    REQUIRE(frames.size() >= 2);
    CHECK(frames[0].type == MsgType::H1Key);
    CHECK(frames[1].type == MsgType::Y1);
    Bits x = res.opening.sigma.slice(0, params.seed_bits());
    Bits y1 = params.generator->eval(Bits(), x)[0];
    HashFunction h1{params.h1_family(), frame_bits(frames[0])};
    CHECK(frame_bits(frames[1]) == eval_hash(h1, y1));
    // three sender hash answers per full round before the coin
    CHECK(frames[2].type == MsgType::H2Key);
    CHECK(frames[4].type == MsgType::TcrKey);
    CHECK(frames[6].type == MsgType::Coin);
}

TEST_CASE("out-of-order messages kill the session") {
    ProtocolParams params = support2_params();
    SeedStream rng(3);
    SenderSession sender(params, 0, SenderSession::draw_sigma(params, rng));
    Frame h1 = bits_frame(MsgType::H1Key, rng.bits(params.h1_family().key_bits()));
    (void)sender.respond(h1);
    // replaying the first key into a sender awaiting the second is an error
    CHECK_THROWS_AS(sender.respond(h1), ProtocolError);

    ReceiverSession receiver(params, rng_coins(SeedStream(5)));
    (void)receiver.emit();
    CHECK_THROWS_AS(receiver.absorb(Frame{MsgType::Block, {0, 0, 0}}), ProtocolError);
}

TEST_CASE("masked round is uniform by the telescoping coin rule") {
    ProtocolParams params = bitblocks_params(4, 1, 0);
    const int sessions = 100000;
    std::vector<int> counts(params.m() + 1, 0);
    for (int s = 0; s < sessions; ++s) {
        CommitResult res = run_commit(params, 0, uint64_t(s), uint64_t(s) + 7777777);
        ++counts[res.masked_round];
    }
    for (int i = 1; i <= params.m(); ++i) {
        double freq = double(counts[i]) / sessions;
        CHECK(freq == doctest::Approx(0.25).epsilon(0.04));  // 1/4 +- 0.01 absolute
        CHECK(std::abs(freq - 0.25) < 0.01);
    }
}

TEST_CASE("receiver is public-coin and runs are deterministic") {
    ProtocolParams params = support2_params();
    ReceiverSession receiver(params, rng_coins(SeedStream(17).child("receiver")));
    SeedStream srng(18);
    SenderSession sender(params, 1, SenderSession::draw_sigma(params, srng));
    while (!receiver.commit_done()) {
        Frame q = receiver.emit();
        receiver.absorb(sender.respond(q));
    }
    // every receiver message equals its drawn coins, in order
    const auto& frames = receiver.transcript();
    size_t k = 0;
    for (size_t i = 0; i < frames.size(); i += 2) CHECK(frames[i].payload == receiver.coin_log()[k++]);

    CommitResult a = run_commit(params, 1, 42, 43);
    CommitResult b = run_commit(params, 1, 42, 43);
    CHECK(a.commitment == b.commitment);
    CommitResult c = run_commit(params, 1, 42, 44);
    CHECK(a.commitment != c.commitment);
}

TEST_CASE("acceptance is message consistency, not coin equality") {
    ProtocolParams params = bitblocks_params(2, 1, 0);
    // force the mask onto round 1 so the second seed bit is never used
    ReceiverSession receiver(params,
                             std::make_unique<ScriptedCoins>(std::vector<uint64_t>{0}, SeedStream(9)));
    SenderSession sender(params, 0, Bits(0b101, params.sigma_bits()));
    while (!receiver.commit_done()) {
        Frame q = receiver.emit();
        receiver.absorb(sender.respond(q));
    }
    REQUIRE(receiver.masked_round() == 1);
    Opening real = sender.opening();
    Bits flipped = real.sigma;
    flipped.set_bit(1, real.sigma.bit(1) ^ 1);  // the unused second seed bit
    CHECK(!(flipped == real.sigma));
    auto echoed = reveal_verify_frames(receiver.transcript(), Opening{0, flipped}, params);
    REQUIRE(echoed);
    CHECK(*echoed == 0);
}

TEST_CASE("standalone hashing subprotocol runs") {
    ProtocolParams params = bitblocks_params(2, 2, 2);
    params.h2_range_bits = 1;
    SeedStream rng(19);
    Bits x(0b10, 2);
    HashingTranscript weak = run_weak_hashing(params, x, rng);
    CHECK(weak.frames.size() == 4);  // two keys, two answers
    CHECK(weak.y1 == eval_hash(weak.h1, x));
    CHECK(weak.y2 == eval_hash(weak.h2, x));
    CHECK(hashing_consistent(weak, x));

    ProtocolParams sp = params;
    sp.tcr_range_bits = 1;
    sp.tcr_mode = TcrMode::OracleBacked;
    HashingTranscript strong = run_strong_hashing(sp, x, rng);
    CHECK(strong.frames.size() == 6);  // three sender answers in total
    CHECK(strong.w == eval_hash(strong.tcr, x));
    CHECK(hashing_consistent(strong, x));
    // some other input collides with all three only rarely; never with itself
    int collide = 0;
    for (uint64_t v = 0; v < 4; ++v) {
        Bits cand(v, 2);
        if (!(cand == x) && hashing_consistent(strong, cand)) ++collide;
    }
    CHECK(collide <= 3);

    CHECK(asymptotic_repetition_count(4, 1.0, 2) == 8);  // lg(4)^2 * 1 * 2
}

TEST_CASE("weak binding tail at the acceptance parameters, scaled down") {
    // |L| = 2^4, first family 12-wise to 4 bits, second family pairwise to 16
    HashFamilySpec h1{HashKind::PolyEllWise, 16, 4, 12, TcrMode::OracleBacked, 0};
    HashFamilySpec h2{HashKind::PolyEllWise, 16, 16, 2, TcrMode::OracleBacked, 0};
    std::vector<Bits> L;
    for (uint64_t v = 0; v < 16; ++v) L.push_back(Bits(v * 2654435761u & 0xffff, 16));
    SeedStream rng(12);
    const int samples = 4000;
    int double_survivals = 0;
    for (int s = 0; s < samples; ++s) {
        HashFunction f1 = sample_hash(h1, rng);
        HashFunction f2 = sample_hash(h2, rng);
        bool found = false;
        for (size_t i = 0; i < L.size() && !found; ++i)
            for (size_t j = i + 1; j < L.size() && !found; ++j)
                found = eval_hash(f1, L[i]) == eval_hash(f1, L[j]) &&
                        eval_hash(f2, L[i]) == eval_hash(f2, L[j]);
        if (found) ++double_survivals;
    }
    double bound = std::exp2(4 - 6) + std::exp2(-8);
    CHECK(double(double_survivals) / samples <= bound);
}

TEST_CASE("strong hashing with the oracle tcr stays below the stacked bound") {
    HashFamilySpec h1{HashKind::PolyEllWise, 8, 2, 8, TcrMode::OracleBacked, 0};
    HashFamilySpec h2{HashKind::PolyEllWise, 8, 8, 2, TcrMode::OracleBacked, 0};
    HashFamilySpec f{HashKind::TcrStandin, 8, 4, 1, TcrMode::OracleBacked, 3};
    std::vector<Bits> L = {Bits(3, 8), Bits(77, 8), Bits(128, 8), Bits(250, 8)};
    SeedStream rng(14);
    const int sessions = 10000;
    int breaks = 0;
    for (int s = 0; s < sessions; ++s) {
        HashFunction k1 = sample_hash(h1, rng);
        HashFunction k2 = sample_hash(h2, rng);
        HashFunction kf = sample_hash(f, rng);
        bool found = false;
        for (size_t i = 0; i < L.size() && !found; ++i)
            for (size_t j = i + 1; j < L.size() && !found; ++j)
                found = eval_hash(k1, L[i]) == eval_hash(k1, L[j]) &&
                        eval_hash(k2, L[i]) == eval_hash(k2, L[j]) &&
                        eval_hash(kf, L[i]) == eval_hash(kf, L[j]);
        if (found) ++breaks;
    }
    double weak_bound = std::exp2(2 - 4) + std::exp2(-4);
    double tcr_per_query = std::exp2(-4);
    CHECK(double(breaks) / sessions <= weak_bound + tcr_per_query);
}

TEST_CASE("binding harness: honest never double-opens, the scripted cheater tracks survival") {
    ProtocolParams params = support2_params();
    SeedStream rng(21);
    AttackReport honest = binding_attack_harness(params, honest_cheater(params), 500, rng);
    CHECK(honest.successes == 0);

    double survival = survival_probability(params, Bits(0, 1), Bits(1, 1));
    CHECK(survival == doctest::Approx(0.25));  // 1/2 for each 1-bit family
    double q = survival / params.m();          // the mask lands on the final round 1/m of the time
    AttackReport cheat = binding_attack_harness(params, support2_cheater(params), 8000, rng);
    CHECK(cheat.success_rate == doctest::Approx(q).epsilon(0.25));
}

TEST_CASE("parallel repetition squashes the scripted cheater") {
    ProtocolParams params = support2_params();
    params.repetitions = 8;
    // honest parallel round trip
    ParallelCommitResult res = run_commit_parallel(params, 1, 5, 6);
    auto echoed = reveal_verify_parallel(res.commitments, res.openings, params);
    REQUIRE(echoed);
    CHECK(*echoed == 1);

    SeedStream rng(31);
    double q = survival_probability(params, Bits(0, 1), Bits(1, 1)) / params.m();
    AttackReport rep = parallel_binding_attack_harness(params, support2_cheater(params), 4000, rng);
    CHECK(rep.success_rate <= std::pow(q, 8) + 3.0 * rep.ci_halfwidth);
}

TEST_CASE("exact hiding distance") {
    // the no-leakage preset: SD comes entirely from the u = 0 mask vector
    ProtocolParams p = bitblocks_params(4, 2, 0);
    CHECK(hiding_distance_exact(p) == doctest::Approx(0.25).epsilon(1e-9));

    // a generator with all blocks determined leaks the bit outright
    ProtocolParams det;
    det.n = 2;
    det.generator = table_generator(2, 1, {1, 1},
                                    {{Bits(1, 1), Bits(0, 1)}, {Bits(1, 1), Bits(0, 1)}});
    det.h1_range_bits = 0;
    CHECK(hiding_distance_exact(det) == doctest::Approx(1.0));

    // nothing before the mask depends on b
    ProtocolParams params = support2_params();
    CommitResult c0 = run_commit(params, 0, 11, 12);
    CommitResult c1 = run_commit(params, 1, 11, 12);
    auto f0 = decode_frames(c0.commitment), f1 = decode_frames(c1.commitment);
    REQUIRE(f0.size() == f1.size());
    for (size_t i = 0; i + 1 < f0.size(); ++i) CHECK(f0[i] == f1[i]);
    CHECK(f0.back().type == MsgType::Mask);
    CHECK(!(f0.back() == f1.back()));  // only the mask differs

    // sampled estimator agrees at tiny parameters
    SeedStream rng(77);
    HidingEstimate est = hiding_distance_sampled(p, 4000, rng);
    CHECK(est.sd == doctest::Approx(0.25).epsilon(0.2));
}

TEST_CASE("hiding enumeration agrees with sampling when keys leak") {
    // two independent uniform bits, a 1-bit first-family output per round:
    // half the keys collapse the block's two values into one hash cell
    ProtocolParams p = bitblocks_params(2, 1, 1);
    double exact = hiding_distance_exact(p);
    CHECK(exact == doctest::Approx(0.75));
    SeedStream rng(13);
    HidingEstimate est = hiding_distance_sampled(p, 20000, rng);
    CHECK(est.sd == doctest::Approx(exact).epsilon(0.08));
    // a key-biasing receiver can always pick the separating key
    CHECK(hiding_distance_exact(p, ReceiverStrategy::WorstCaseCoins) == doctest::Approx(1.0));
}

TEST_CASE("more hash output never helps hiding or the cheater") {
    // sweep the first family's range at n = 4, everything else fixed
    std::vector<double> sd, sd_worst, survive;
    for (int delta = 0; delta <= 2; ++delta) {
        ProtocolParams p = bitblocks_params(4, 2, delta);
        sd.push_back(hiding_distance_exact(p));
        sd_worst.push_back(hiding_distance_exact(p, ReceiverStrategy::WorstCaseCoins));
        survive.push_back(survival_probability(p, Bits(0b00, 2), Bits(0b11, 2)));
    }
    for (int delta = 0; delta < 2; ++delta) {
        CHECK(sd[delta] <= sd[delta + 1] + 1e-12);
        CHECK(sd_worst[delta] <= sd_worst[delta + 1] + 1e-12);
        CHECK(survive[delta + 1] <= survive[delta] + 1e-12);
        // a coin-biasing receiver can only see more
        CHECK(sd[delta] <= sd_worst[delta] + 1e-12);
    }
    // with no leakage every receiver strategy sees the same masked bit
    CHECK(sd_worst[0] == doctest::Approx(sd[0]));
}

TEST_CASE("high-entropy generator from cheating senders") {
    // honest sender: the generator's expected accessible entropy equals the
    // up-front wrapper's
    ProtocolParams bits2 = bitblocks_params(2, 1, 1);
    auto sup2 = shared_support(bits2.generator);
    OnlinePtr hegen = high_entropy_generator_from_sender(honest_enumerable_cheater(bits2), bits2);
    CHECK(expected_accessible_entropy(*hegen) ==
          doctest::Approx(expected_accessible_entropy(*honest_upfront(sup2))).epsilon(1e-9));
    CHECK(consistent_with(*hegen, *sup2));

    // support-2: honest accessible entropy is zero, the coin-flipping
    // double-opener shows a full extra bit on the final block
    ProtocolParams s2 = support2_params(1, 0);
    auto sup = shared_support(s2.generator);
    OnlinePtr honest_gen = high_entropy_generator_from_sender(honest_enumerable_cheater(s2), s2);
    CHECK(expected_accessible_entropy(*honest_gen) == doctest::Approx(0.0));
    OnlinePtr flip_gen = high_entropy_generator_from_sender(coinflip_final_block_cheater(s2), s2);
    CHECK(expected_accessible_entropy(*flip_gen) == doctest::Approx(1.0));
    CHECK(consistent_with(*flip_gen, *sup));
}

namespace {

// protocol-shaped junk: correct widths, nonsense content
class GarbageCheater final : public CheatingSender {
public:
    explicit GarbageCheater(const ProtocolParams& params) : params_(params) {}
    std::unique_ptr<CheatingSender> clone() const override {
        return std::make_unique<GarbageCheater>(*this);
    }
    Frame respond(const Frame& f) override {
        switch (f.type) {
            case MsgType::H1Key:
                return bits_frame(MsgType::Y1, ones(params_.h1_range_bits));
            case MsgType::H2Key:
                return bits_frame(MsgType::Y2, ones(params_.h2_range_bits));
            case MsgType::TcrKey:
                return bits_frame(MsgType::TcrOut, ones(params_.tcr_range_bits));
            case MsgType::Coin:
                if (!f.payload.empty() && f.payload[0] == 0)
                    return bits_frame(MsgType::Mask, ones(1 + params_.ell()));
                return bits_frame(MsgType::Block, ones(params_.ell()));
            default:
                throw ProtocolError("garbage cheater: unexpected frame");
        }
    }
    std::pair<Opening, Opening> openings() const override {
        return {Opening{0, Bits::zeros(params_.sigma_bits())},
                Opening{1, Bits::zeros(params_.sigma_bits())}};
    }

private:
    static Bits ones(int w) {
        Bits b = Bits::zeros(w);
        for (int i = 0; i < w; ++i) b.set_bit(i, 1);
        return b;
    }
    ProtocolParams params_;
};

}  // namespace

TEST_CASE("non-failing wrapper") {
    ProtocolParams params = support2_params();
    // wrapping the honest sender changes nothing
    SeedStream rng(41);
    auto wrapped = nonfailing_wrapper(params, honest_cheater(params), 16);
    for (int t = 0; t < 50; ++t) {
        auto inner = honest_cheater(params)(rng.child(2 * t));
        auto outer = wrapped(rng.child(2 * t));
        ReceiverSession r1(params, rng_coins(SeedStream(1000 + t)));
        ReceiverSession r2(params, rng_coins(SeedStream(1000 + t)));
        while (!r1.commit_done()) r1.absorb(inner->respond(r1.emit()));
        while (!r2.commit_done()) r2.absorb(outer->respond(r2.emit()));
        CHECK(r1.commitment() == r2.commitment());
    }

    // wrapping garbage degenerates to honest play from the all-zero
    // justification, and the first opening always verifies
    CheaterFactory garbage = [params](SeedStream) -> std::unique_ptr<CheatingSender> {
        return std::make_unique<GarbageCheater>(params);
    };
    auto safe = nonfailing_wrapper(params, garbage, 8);
    int failures = 0;
    const int sessions = 1000;
    for (int t = 0; t < sessions; ++t) {
        auto c = safe(rng.child(10000 + t));
        ReceiverSession receiver(params, rng_coins(SeedStream(20000 + t)));
        while (!receiver.commit_done()) receiver.absorb(c->respond(receiver.emit()));
        Opening first = c->openings().first;
        auto echoed = reveal_verify_frames(receiver.transcript(), first, params);
        if (!echoed || *echoed != first.b) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("hashing-subprotocol adversary from the scripted cheater") {
    ProtocolParams params = support2_params();
    SeedStream rng(51);
    HashBreakReport honest = binding_to_hash_break(params, honest_cheater(params), 2000, rng);
    CHECK(honest.successes == 0);

    double q = survival_probability(params, Bits(0, 1), Bits(1, 1)) / params.m();
    HashBreakReport rep = binding_to_hash_break(params, support2_cheater(params), 8000, rng);
    CHECK(rep.success_rate == doctest::Approx(q / params.m()).epsilon(0.3));
}

TEST_CASE("frames over tcp match the in-process run") {
    ProtocolParams params = support2_params();
    const int port = 39471;
    ReceiverCommitResult rres;
    std::thread receiver([&] { rres = run_commit_receiver_tcp(params, 99, port); });
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    CommitResult sres = run_commit_sender_tcp(params, 1, 98, "127.0.0.1", port);
    receiver.join();
    CHECK(rres.commitment == sres.commitment);
    auto echoed = reveal_verify(rres.commitment, sres.opening, params);
    REQUIRE(echoed);
    CHECK(*echoed == 1);
}
