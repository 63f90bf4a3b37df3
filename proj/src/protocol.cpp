#include "entropy_forge/protocol.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

#include "entropy_forge/errors.hpp"

namespace ef {

using nlohmann::json;

// --- parameters -----------------------------------------------------------------

namespace {

HashFamilySpec empty_family(int domain_bits) {
    // range 0: no key, no output; the no-leakage degenerate family
    return HashFamilySpec{HashKind::BooleanMatrix, domain_bits, 0, 1, TcrMode::OracleBacked, 0};
}

GenPtr ensure_uniform_blocks(GenPtr g) {
    for (int b : g->block_bits())
        if (b != g->block_bits()[0]) return pad_block_lengths(std::move(g));
    return g;
}

}  // namespace

HashFamilySpec ProtocolParams::h1_family() const {
    if (h1_range_bits == 0) return empty_family(ell());
    return HashFamilySpec{HashKind::PolyEllWise, ell(), h1_range_bits, h1_order,
                          TcrMode::OracleBacked, 0};
}

HashFamilySpec ProtocolParams::h2_family() const {
    if (h2_range_bits == 0) return empty_family(ell());
    return HashFamilySpec{HashKind::PolyEllWise, ell(), h2_range_bits, 2, TcrMode::OracleBacked, 0};
}

HashFamilySpec ProtocolParams::tcr_family() const {
    if (tcr_range_bits == 0) return empty_family(ell());
    return HashFamilySpec{HashKind::TcrStandin, ell(), tcr_range_bits, 1, tcr_mode, tcr_instance};
}

void ProtocolParams::validate() const {
    if (!generator) throw ParamError("ProtocolParams: generator required");
    if (generator->pp_bits() != 0)
        throw ParamError("ProtocolParams: only parameterless generators are supported");
    for (int b : generator->block_bits())
        if (b != generator->block_bits()[0])
            throw ParamError("ProtocolParams: generator blocks must share one width (pad first)");
    if (h1_range_bits < 0 || h1_range_bits > ell())
        throw ParamError("ProtocolParams: h1 range must be in [0, ell]");
    if (h2_range_bits < 0 || h2_range_bits > ell())
        throw ParamError("ProtocolParams: h2 range must be in [0, ell]");
    if (tcr_range_bits < 0 || (tcr_range_bits > 0 && tcr_range_bits >= ell()))
        throw ParamError("ProtocolParams: tcr range must compress");
    if (h1_order < 1) throw ParamError("ProtocolParams: h1 order must be >= 1");
    if (repetitions < 1) throw ParamError("ProtocolParams: repetitions must be >= 1");
    h1_family().validate();
    h2_family().validate();
    if (tcr_range_bits > 0) tcr_family().validate();
}

json ProtocolParams::to_json() const {
    return json{{"n", n},
                {"generator", generator->to_json()},
                {"h1_range_bits", h1_range_bits},
                {"h1_order", h1_order},
                {"h2_range_bits", h2_range_bits},
                {"tcr_range_bits", tcr_range_bits},
                {"tcr_mode", tcr_mode == TcrMode::OracleBacked ? "oracle" : "mix"},
                {"tcr_instance", tcr_instance},
                {"repetitions", repetitions}};
}

ProtocolParams ProtocolParams::from_json(const json& j) {
    ProtocolParams p;
    p.n = j.at("n").get<int>();
    p.generator = ensure_uniform_blocks(generator_from_json(j.at("generator")));
    p.h1_range_bits = j.value("h1_range_bits", 1);
    p.h1_order = j.value("h1_order", 2);
    p.h2_range_bits = j.value("h2_range_bits", 0);
    p.tcr_range_bits = j.value("tcr_range_bits", 0);
    p.tcr_mode = j.value("tcr_mode", std::string("mix")) == "oracle" ? TcrMode::OracleBacked
                                                                     : TcrMode::KeyedMix;
    p.tcr_instance = j.value("tcr_instance", 0);
    p.repetitions = j.value("repetitions", 1);
    p.validate();
    return p;
}

// --- wire ------------------------------------------------------------------------

std::vector<uint8_t> encode_frames(const std::vector<Frame>& frames) {
    std::vector<uint8_t> out;
    for (const Frame& f : frames) {
        uint32_t len = uint32_t(f.payload.size()) + 1;
        out.push_back(uint8_t(len >> 24));
        out.push_back(uint8_t(len >> 16));
        out.push_back(uint8_t(len >> 8));
        out.push_back(uint8_t(len));
        out.push_back(uint8_t(f.type));
        out.insert(out.end(), f.payload.begin(), f.payload.end());
    }
    return out;
}

std::vector<Frame> decode_frames(const std::vector<uint8_t>& bytes) {
    std::vector<Frame> out;
    size_t pos = 0;
    while (pos < bytes.size()) {
        if (pos + 4 > bytes.size()) throw ProtocolError("decode_frames: truncated length");
        uint32_t len = (uint32_t(bytes[pos]) << 24) | (uint32_t(bytes[pos + 1]) << 16) |
                       (uint32_t(bytes[pos + 2]) << 8) | uint32_t(bytes[pos + 3]);
        pos += 4;
        if (len < 1 || pos + len > bytes.size()) throw ProtocolError("decode_frames: bad length");
        Frame f;
        f.type = MsgType(bytes[pos]);
        f.payload.assign(bytes.begin() + pos + 1, bytes.begin() + pos + len);
        out.push_back(std::move(f));
        pos += len;
    }
    return out;
}

Frame bits_frame(MsgType type, const Bits& b) {
    std::string key = b.key();
    return Frame{type, std::vector<uint8_t>(key.begin(), key.end())};
}

Bits frame_bits(const Frame& f) {
    return Bits::from_key(std::string(f.payload.begin(), f.payload.end()));
}

json Opening::to_json() const { return json{{"b", b}, {"sigma_hex", sigma.to_hex()}}; }

Opening Opening::from_json(const json& j, const ProtocolParams& params) {
    Opening o;
    o.b = j.at("b").get<int>();
    o.sigma = Bits::from_hex(j.at("sigma_hex").get<std::string>(), params.sigma_bits());
    return o;
}

// --- receiver -----------------------------------------------------------------------

namespace {

class RngCoins final : public ReceiverCoins {
public:
    explicit RngCoins(SeedStream rng) : rng_(rng) {}
    Bits key_bits(int width) override { return rng_.bits(width); }
    uint64_t coin_draw(uint64_t bound) override { return rng_.below(bound); }

private:
    SeedStream rng_;
};

}  // namespace

std::unique_ptr<ReceiverCoins> rng_coins(SeedStream rng) {
    return std::make_unique<RngCoins>(rng);
}

ReceiverSession::ReceiverSession(ProtocolParams params, std::unique_ptr<ReceiverCoins> coins)
    : params_(std::move(params)), coins_(std::move(coins)) {
    params_.validate();
}

Frame ReceiverSession::emit() {
    if (done_ || !sending_) throw ProtocolError("receiver: nothing to send");
    Frame f;
    switch (step_) {
        case Step::H1:
            f = bits_frame(MsgType::H1Key, coins_->key_bits(params_.h1_family().key_bits()));
            break;
        case Step::H2:
            f = bits_frame(MsgType::H2Key, coins_->key_bits(params_.h2_family().key_bits()));
            break;
        case Step::TcrK:
            f = bits_frame(MsgType::TcrKey,
                           coins_->key_bits(params_.tcr_range_bits ? params_.tcr_family().key_bits() : 0));
            break;
        case Step::Coin: {
            uint64_t bound = uint64_t(params_.m() + 1 - round_);
            uint64_t draw = coins_->coin_draw(bound);
            f = Frame{MsgType::Coin, {uint8_t(draw)}};
            break;
        }
        default:
            throw ProtocolError("receiver: not in a sending step");
    }
    transcript_.push_back(f);
    coin_log_.push_back(f.payload);
    sending_ = false;
    return f;
}

void ReceiverSession::absorb(const Frame& f) {
    if (done_ || sending_) throw ProtocolError("receiver: unexpected sender message");
    auto expect_bits = [&](MsgType t, int width) {
        if (f.type != t) throw ProtocolError("receiver: out-of-order message");
        Bits b = frame_bits(f);
        if (b.size() != width) throw ProtocolError("receiver: bad payload width");
        return b;
    };
    switch (step_) {
        case Step::H1:
            expect_bits(MsgType::Y1, params_.h1_range_bits);
            step_ = Step::H2;
            break;
        case Step::H2:
            expect_bits(MsgType::Y2, params_.h2_range_bits);
            step_ = Step::TcrK;
            break;
        case Step::TcrK:
            expect_bits(MsgType::TcrOut, params_.tcr_range_bits);
            step_ = Step::Coin;
            break;
        case Step::Coin: {
            // our last emitted frame is the coin; it decides what we expect
            const Frame& coin = transcript_.back();
            if (coin.type != MsgType::Coin || coin.payload.empty())
                throw ProtocolError("receiver: lost track of the coin");
            bool masked = coin.payload[0] == 0;
            if (masked) {
                expect_bits(MsgType::Mask, 1 + params_.ell());
                masked_round_ = round_;
                done_ = true;
            } else {
                expect_bits(MsgType::Block, params_.ell());
                ++round_;
                step_ = Step::H1;
            }
            break;
        }
        default:
            throw ProtocolError("receiver: bad state");
    }
    transcript_.push_back(f);
    sending_ = !done_;
}

// --- sender --------------------------------------------------------------------------

SenderSession::SenderSession(ProtocolParams params, int b, Bits sigma)
    : params_(std::move(params)), b_(b), sigma_(std::move(sigma)) {
    params_.validate();
    if (b_ != 0 && b_ != 1) throw ParamError("SenderSession: bit must be 0 or 1");
    if (sigma_.size() != params_.sigma_bits()) throw ParamError("SenderSession: sigma width");
    Bits x = sigma_.slice(0, params_.seed_bits());
    u_ = sigma_.slice(params_.seed_bits(), params_.ell());
    blocks_ = params_.generator->eval(Bits(), x);
}

Bits SenderSession::draw_sigma(const ProtocolParams& params, SeedStream& rng) {
    return rng.bits(params.sigma_bits());
}

Frame SenderSession::respond(const Frame& f) {
    if (done_) throw ProtocolError("sender: commit stage is over");
    const Bits& y = blocks_[round_ - 1];
    switch (expect_) {
        case Step::H1: {
            if (f.type != MsgType::H1Key) throw ProtocolError("sender: expected first hash key");
            HashFunction h{params_.h1_family(), frame_bits(f)};
            expect_ = Step::H2;
            return bits_frame(MsgType::Y1, params_.h1_range_bits ? eval_hash(h, y) : Bits());
        }
        case Step::H2: {
            if (f.type != MsgType::H2Key) throw ProtocolError("sender: expected second hash key");
            HashFunction h{params_.h2_family(), frame_bits(f)};
            expect_ = Step::TcrK;
            return bits_frame(MsgType::Y2, params_.h2_range_bits ? eval_hash(h, y) : Bits());
        }
        case Step::TcrK: {
            if (f.type != MsgType::TcrKey) throw ProtocolError("sender: expected tcr key");
            expect_ = Step::Coin;
            if (!params_.tcr_range_bits) return bits_frame(MsgType::TcrOut, Bits());
            HashFunction h{params_.tcr_family(), frame_bits(f)};
            return bits_frame(MsgType::TcrOut, tcr_eval(h, y));
        }
        case Step::Coin: {
            if (f.type != MsgType::Coin || f.payload.size() != 1)
                throw ProtocolError("sender: expected coin");
            bool masked = f.payload[0] == 0;
            if (masked) {
                done_ = true;
                int beta = (y.parity_and(u_) ^ b_) & 1;
                return bits_frame(MsgType::Mask, Bits(uint64_t(beta), 1).concat(u_));
            }
            if (round_ >= params_.m()) throw ProtocolError("sender: continue past final round");
            ++round_;
            expect_ = Step::H1;
            return bits_frame(MsgType::Block, y);
        }
    }
    throw ProtocolError("sender: bad state");
}

// --- drivers ---------------------------------------------------------------------------

CommitResult run_commit(const ProtocolParams& params, int b, uint64_t sender_seed,
                        uint64_t receiver_seed) {
    SeedStream srng = SeedStream(sender_seed).child("sender");
    SenderSession sender(params, b, SenderSession::draw_sigma(params, srng));
    ReceiverSession receiver(params, rng_coins(SeedStream(receiver_seed).child("receiver")));
    while (!receiver.commit_done()) {
        Frame q = receiver.emit();
        Frame a = sender.respond(q);
        receiver.absorb(a);
    }
    return CommitResult{receiver.commitment(), sender.opening(), receiver.masked_round(),
                        receiver.transcript()};
}

std::optional<int> reveal_verify_frames(const std::vector<Frame>& transcript,
                                        const Opening& opening, const ProtocolParams& params) {
    if (opening.sigma.size() != params.sigma_bits()) return std::nullopt;
    if (opening.b != 0 && opening.b != 1) return std::nullopt;
    try {
        SenderSession sim(params, opening.b, opening.sigma);
        if (transcript.size() % 2 != 0) return std::nullopt;
        for (size_t i = 0; i + 1 < transcript.size(); i += 2) {
            Frame expected = sim.respond(transcript[i]);
            if (!(expected == transcript[i + 1])) return std::nullopt;
        }
        if (!sim.commit_done()) return std::nullopt;
        return opening.b;
    } catch (const ProtocolError&) {
        return std::nullopt;
    } catch (const ParamError&) {
        return std::nullopt;
    }
}

std::optional<int> reveal_verify(const std::vector<uint8_t>& commitment, const Opening& opening,
                                 const ProtocolParams& params) {
    try {
        return reveal_verify_frames(decode_frames(commitment), opening, params);
    } catch (const ProtocolError&) {
        return std::nullopt;
    }
}

// --- cheating senders ----------------------------------------------------------------------

namespace {

// honest sender, exposed through the cheating interface
class HonestCheater final : public CheatingSender {
public:
    HonestCheater(const ProtocolParams& params, int b, Bits sigma)
        : params_(params), session_(params, b, sigma), opening_{b, sigma} {}

    std::unique_ptr<CheatingSender> clone() const override {
        return std::make_unique<HonestCheater>(*this);
    }
    Frame respond(const Frame& f) override { return session_.respond(f); }
    std::pair<Opening, Opening> openings() const override { return {opening_, opening_}; }

private:
    ProtocolParams params_;
    SenderSession session_;
    Opening opening_;
};

struct Support2Shape {
    Bits seed0, seed1;
    int differing_round = 0;  // 1-based
    Bits delta;               // block difference at that round
    Bits u_star;              // <u*, delta> = 1
};

Support2Shape support2_shape(const ProtocolParams& params) {
    const GenPtr& g = params.generator;
    if (g->seed_bits() != 1) throw ParamError("support2_cheater: generator must have 1 seed bit");
    Support2Shape s;
    s.seed0 = Bits(0, 1);
    s.seed1 = Bits(1, 1);
    auto b0 = g->eval(Bits(), s.seed0);
    auto b1 = g->eval(Bits(), s.seed1);
    for (int i = 0; i < g->block_count(); ++i) {
        if (!(b0[i] == b1[i])) {
            if (s.differing_round) throw ParamError("support2_cheater: blocks differ in two rounds");
            s.differing_round = i + 1;
            s.delta = b0[i] ^ b1[i];
        }
    }
    if (!s.differing_round) throw ParamError("support2_cheater: support points are identical");
    s.u_star = Bits::zeros(params.ell());
    for (int i = 0; i < s.delta.size(); ++i)
        if (s.delta.bit(i)) {
            s.u_star.set_bit(i, 1);
            break;
        }
    return s;
}

// Plays seed 0 honestly but picks the mask vector u* adversarially so the two
// seeds decode to different bits, then claims both seeds.
class Support2Cheater final : public CheatingSender {
public:
    explicit Support2Cheater(const ProtocolParams& params)
        : params_(params), shape_(support2_shape(params)),
          session_(params, 0, Bits(0, 1).concat(shape_.u_star)) {}

    std::unique_ptr<CheatingSender> clone() const override {
        return std::make_unique<Support2Cheater>(*this);
    }
    Frame respond(const Frame& f) override { return session_.respond(f); }
    std::pair<Opening, Opening> openings() const override {
        return {Opening{0, Bits(0, 1).concat(shape_.u_star)},
                Opening{1, Bits(1, 1).concat(shape_.u_star)}};
    }

private:
    ProtocolParams params_;
    Support2Shape shape_;
    SenderSession session_;
};

}  // namespace

CheaterFactory honest_cheater(const ProtocolParams& params) {
    return [params](SeedStream rng) -> std::unique_ptr<CheatingSender> {
        Bits sigma = SenderSession::draw_sigma(params, rng);
        return std::make_unique<HonestCheater>(params, 0, sigma);
    };
}

CheaterFactory support2_cheater(const ProtocolParams& params) {
    return [params](SeedStream) -> std::unique_ptr<CheatingSender> {
        return std::make_unique<Support2Cheater>(params);
    };
}

BindingOutcome run_binding_game(const ProtocolParams& params, CheatingSender& cheater,
                                SeedStream receiver_rng) {
    ReceiverSession receiver(params, rng_coins(receiver_rng));
    while (!receiver.commit_done()) {
        Frame q = receiver.emit();
        Frame a = cheater.respond(q);
        receiver.absorb(a);
    }
    auto [t0, t1] = cheater.openings();
    auto b0 = reveal_verify_frames(receiver.transcript(), t0, params);
    auto b1 = reveal_verify_frames(receiver.transcript(), t1, params);
    BindingOutcome out;
    out.masked_round = receiver.masked_round();
    out.transcript = receiver.transcript();
    out.success = b0 && b1 && *b0 == t0.b && *b1 == t1.b && t0.b != t1.b;
    return out;
}

AttackReport binding_attack_harness(const ProtocolParams& params, const CheaterFactory& cheater,
                                    uint64_t trials, SeedStream& rng) {
    AttackReport rep;
    rep.trials = trials;
    for (uint64_t t = 0; t < trials; ++t) {
        auto c = cheater(rng.child(2 * t));
        BindingOutcome out = run_binding_game(params, *c, rng.child(2 * t + 1));
        if (out.success) ++rep.successes;
    }
    rep.success_rate = trials ? double(rep.successes) / double(trials) : 0.0;
    rep.ci_halfwidth = hoeffding_halfwidth(1.0, trials);
    return rep;
}

namespace {

HashingTranscript run_hashing(const ProtocolParams& params, const Bits& x, SeedStream& rng,
                              bool strong) {
    params.validate();
    if (x.size() != params.ell()) throw ParamError("run_hashing: input width mismatch");
    HashingTranscript t;
    t.strong = strong;
    t.h1 = sample_hash(params.h1_family(), rng);
    t.y1 = params.h1_range_bits ? eval_hash(t.h1, x) : Bits();
    t.h2 = sample_hash(params.h2_family(), rng);
    t.y2 = params.h2_range_bits ? eval_hash(t.h2, x) : Bits();
    t.frames = {bits_frame(MsgType::H1Key, t.h1.key), bits_frame(MsgType::Y1, t.y1),
                bits_frame(MsgType::H2Key, t.h2.key), bits_frame(MsgType::Y2, t.y2)};
    if (strong) {
        t.tcr = sample_hash(params.tcr_range_bits ? params.tcr_family()
                                                  : HashFamilySpec{HashKind::BooleanMatrix,
                                                                   params.ell(), 0, 1,
                                                                   TcrMode::OracleBacked, 0},
                            rng);
        t.w = params.tcr_range_bits ? eval_hash(t.tcr, x) : Bits();
        t.frames.push_back(bits_frame(MsgType::TcrKey, t.tcr.key));
        t.frames.push_back(bits_frame(MsgType::TcrOut, t.w));
    }
    return t;
}

}  // namespace

HashingTranscript run_weak_hashing(const ProtocolParams& params, const Bits& x, SeedStream& rng) {
    return run_hashing(params, x, rng, false);
}

HashingTranscript run_strong_hashing(const ProtocolParams& params, const Bits& x, SeedStream& rng) {
    return run_hashing(params, x, rng, true);
}

bool hashing_consistent(const HashingTranscript& t, const Bits& x) {
    if (t.h1.family.range_bits && !(eval_hash(t.h1, x) == t.y1)) return false;
    if (t.h2.family.range_bits && !(eval_hash(t.h2, x) == t.y2)) return false;
    if (t.strong && t.tcr.family.range_bits && !(eval_hash(t.tcr, x) == t.w)) return false;
    return true;
}

int asymptotic_repetition_count(int n, double p, int m) {
    double lg = std::log2(double(std::max(2, n)));
    return std::max(1, (int)std::ceil(lg * lg * p * double(m)));
}

double survival_probability(const ProtocolParams& params, const Bits& y0, const Bits& y1) {
    if (params.tcr_range_bits > 0)
        throw RegimeError("survival_probability: tcr key space is not enumerable");
    double p = 1.0;
    if (params.h1_range_bits > 0)
        p *= exact_collision_probability(params.h1_family(), y0, y1).to_double();
    if (params.h2_range_bits > 0)
        p *= exact_collision_probability(params.h2_family(), y0, y1).to_double();
    return p;
}

// --- parallel repetition ----------------------------------------------------------------------

ParallelCommitResult run_commit_parallel(const ProtocolParams& params, int b, uint64_t sender_seed,
                                         uint64_t receiver_seed) {
    ParallelCommitResult out;
    int t = params.repetitions;
    std::vector<SenderSession> senders;
    std::vector<ReceiverSession> receivers;
    SeedStream sroot = SeedStream(sender_seed).child("parallel-sender");
    SeedStream rroot = SeedStream(receiver_seed).child("parallel-receiver");
    for (int c = 0; c < t; ++c) {
        SeedStream s = sroot.child(uint64_t(c));
        senders.emplace_back(params, b, SenderSession::draw_sigma(params, s));
        receivers.emplace_back(params, rng_coins(rroot.child(uint64_t(c))));
    }
    // lockstep: one round-trip per copy per step until all are done
    bool progress = true;
    while (progress) {
        progress = false;
        for (int c = 0; c < t; ++c) {
            if (receivers[c].commit_done()) continue;
            Frame q = receivers[c].emit();
            Frame a = senders[c].respond(q);
            receivers[c].absorb(a);
            progress = true;
        }
    }
    for (int c = 0; c < t; ++c) {
        out.commitments.push_back(receivers[c].commitment());
        out.openings.push_back(senders[c].opening());
    }
    return out;
}

std::optional<int> reveal_verify_parallel(const std::vector<std::vector<uint8_t>>& commitments,
                                          const std::vector<Opening>& openings,
                                          const ProtocolParams& params) {
    if (commitments.size() != openings.size() || commitments.empty()) return std::nullopt;
    std::optional<int> bit;
    for (size_t c = 0; c < commitments.size(); ++c) {
        auto b = reveal_verify(commitments[c], openings[c], params);
        if (!b) return std::nullopt;
        if (bit && *bit != *b) return std::nullopt;
        bit = b;
    }
    return bit;
}

AttackReport parallel_binding_attack_harness(const ProtocolParams& params,
                                             const CheaterFactory& cheater, uint64_t trials,
                                             SeedStream& rng) {
    AttackReport rep;
    rep.trials = trials;
    int t = params.repetitions;
    for (uint64_t trial = 0; trial < trials; ++trial) {
        SeedStream troot = rng.child(trial);
        std::vector<std::vector<Frame>> transcripts(t);
        std::vector<std::pair<Opening, Opening>> opens(t);
        for (int c = 0; c < t; ++c) {
            auto ch = cheater(troot.child(2 * c));
            ReceiverSession receiver(params, rng_coins(troot.child(2 * c + 1)));
            while (!receiver.commit_done()) {
                Frame q = receiver.emit();
                Frame a = ch->respond(q);
                receiver.absorb(a);
            }
            transcripts[c] = receiver.transcript();
            opens[c] = ch->openings();
        }
        bool ok = true;
        for (int c = 0; c < t && ok; ++c) {
            auto b0 = reveal_verify_frames(transcripts[c], opens[c].first, params);
            auto b1 = reveal_verify_frames(transcripts[c], opens[c].second, params);
            ok = b0 && b1 && *b0 == opens[c].first.b && *b1 == opens[c].second.b &&
                 opens[c].first.b != opens[c].second.b;
        }
        if (ok) ++rep.successes;
    }
    rep.success_rate = trials ? double(rep.successes) / double(trials) : 0.0;
    rep.ci_halfwidth = hoeffding_halfwidth(1.0, trials);
    return rep;
}

// --- hiding -------------------------------------------------------------------------------------

double hiding_distance_exact(const ProtocolParams& params, ReceiverStrategy strategy) {
    params.validate();
    if (params.tcr_range_bits > 0)
        throw RegimeError("hiding_distance_exact: tcr key space is not enumerable");
    int kb1 = params.h1_family().key_bits();
    int kb2 = params.h2_family().key_bits();
    if (kb1 + kb2 > 20) throw RegimeError("hiding_distance_exact: key space too large");
    if (params.generator->seed_bits() > 16)
        throw RegimeError("hiding_distance_exact: seed space too large");
    bool worst = strategy == ReceiverStrategy::WorstCaseCoins;

    OutputSupport support(params.generator);
    int m = params.m();
    int ell = params.ell();
    uint64_t keys1 = uint64_t(1) << kb1;
    uint64_t keys2 = uint64_t(1) << kb2;

    // SD = E_{i*, prefix, keys, hash cell, u} | Pr[mask bit = 0 | b=0] - Pr[.. | b=1] |
    //    = E[ |2 q - 1| ] with q = Pr[<u, Y_i> = 0 | revealed prefix, hash outputs].
    // A worst-case receiver picks the masked round and the mask-round keys,
    // so those expectations become maxima.
    double sd = 0.0;
    std::vector<std::vector<Bits>> frontier{{}};  // prefixes of length i-1
    for (int i = 1; i <= m; ++i) {
        double level = 0.0;
        for (const auto& prefix : frontier) {
            uint64_t prefix_count = support.prefix_count(prefix);
            if (prefix_count == 0) continue;
            double p_prefix = double(prefix_count) / double(support.seed_count());
            auto cond = support.next_block_counts(prefix);
            uint64_t total = 0;
            for (const auto& [y, c] : cond) total += c;

            double key_acc = 0.0;
            for (uint64_t k1 = 0; k1 < keys1; ++k1) {
                for (uint64_t k2 = 0; k2 < keys2; ++k2) {
                    // partition the conditional support by hash outputs
                    std::map<std::pair<uint64_t, uint64_t>, std::vector<size_t>> cells;
                    for (size_t idx = 0; idx < cond.size(); ++idx) {
                        uint64_t o1 = params.h1_range_bits
                                          ? eval_hash_raw(params.h1_family(), k1, cond[idx].first.to_u64())
                                          : 0;
                        uint64_t o2 = params.h2_range_bits
                                          ? eval_hash_raw(params.h2_family(), k2, cond[idx].first.to_u64())
                                          : 0;
                        cells[{o1, o2}].push_back(idx);
                    }
                    double cell_acc = 0.0;
                    for (const auto& [o, members] : cells) {
                        uint64_t cell_total = 0;
                        for (size_t idx : members) cell_total += cond[idx].second;
                        double p_cell = double(cell_total) / double(total);
                        double u_acc = 0.0;
                        for (uint64_t u = 0; u < (uint64_t(1) << ell); ++u) {
                            Bits ub(u, ell);
                            uint64_t zero_mass = 0;
                            for (size_t idx : members)
                                if (cond[idx].first.parity_and(ub) == 0)
                                    zero_mass += cond[idx].second;
                            double q = double(zero_mass) / double(cell_total);
                            u_acc += std::abs(2.0 * q - 1.0);
                        }
                        cell_acc += p_cell * u_acc / double(uint64_t(1) << ell);
                    }
                    key_acc = worst ? std::max(key_acc, cell_acc) : key_acc + cell_acc;
                }
            }
            if (!worst) key_acc = key_acc / double(keys1) / double(keys2);
            level += p_prefix * key_acc;
        }
        sd = worst ? std::max(sd, level) : sd + level / double(m);

        // extend prefixes one block
        std::vector<std::vector<Bits>> next;
        for (const auto& prefix : frontier)
            for (const auto& [y, c] : support.next_block_counts(prefix)) {
                auto ext = prefix;
                ext.push_back(y);
                next.push_back(std::move(ext));
            }
        frontier = std::move(next);
    }
    return sd;
}

HidingEstimate hiding_distance_sampled(const ProtocolParams& params, uint64_t budget,
                                       SeedStream& rng) {
    // plug-in estimate over sampled full views
    std::map<std::vector<uint8_t>, std::pair<uint64_t, uint64_t>> views;
    for (uint64_t t = 0; t < budget; ++t) {
        auto c0 = run_commit(params, 0, rng.next_u64(), rng.next_u64());
        auto c1 = run_commit(params, 1, rng.next_u64(), rng.next_u64());
        ++views[c0.commitment].first;
        ++views[c1.commitment].second;
    }
    double l1 = 0.0;
    for (const auto& [v, pq] : views)
        l1 += std::abs(double(pq.first) / double(budget) - double(pq.second) / double(budget));
    HidingEstimate est;
    est.sd = l1 / 2.0;
    est.budget = budget;
    est.ci_halfwidth = hoeffding_halfwidth(1.0, budget);
    return est;
}

// --- high-entropy generator from a cheating sender ------------------------------------------------

namespace {

struct HEGenPayload {
    std::vector<uint64_t> coins;          // cheater round coins chosen so far
    std::vector<Bits> keys1, keys2;       // receiver keys per round so far
};

// Replays the cheater against the scripted receiver (c_j = 0 before the final
// round) through `upto` rounds and returns its block (or final-opening block).
class HEGenOnline final : public OnlineGenerator {
public:
    HEGenOnline(EnumerableCheater cheater, ProtocolParams params)
        : OnlineGenerator(0, params.generator->block_bits()),
          cheater_(std::move(cheater)),
          params_(std::move(params)),
          kb1_(params_.h1_family().key_bits()),
          kb2_(params_.h2_family().key_bits()) {
        if (params_.tcr_range_bits > 0)
            throw RegimeError("high_entropy_generator_from_sender: tcr keys not enumerable");
        if ((int)cheater_.round_coin_space.size() != params_.m())
            throw ParamError("high_entropy_generator_from_sender: coin space arity");
        if (kb1_ + kb2_ > 16) throw RegimeError("high_entropy_generator_from_sender: key space");
    }

    OnlineState start(const Bits&) const override {
        return OnlineState{std::make_shared<HEGenPayload>(), ""};
    }

    std::vector<OnlineBranch> round(const OnlineState& s, int i) const override {
        const auto* p = static_cast<const HEGenPayload*>(s.payload.get());
        uint64_t coin_space = cheater_.round_coin_space[i - 1];
        uint64_t keys1 = uint64_t(1) << kb1_, keys2 = uint64_t(1) << kb2_;
        std::vector<OnlineBranch> out;
        out.reserve(coin_space * keys1 * keys2);
        Frac prob(1, coin_space * keys1 * keys2);
        for (uint64_t coin = 0; coin < coin_space; ++coin) {
            for (uint64_t k1 = 0; k1 < keys1; ++k1) {
                for (uint64_t k2 = 0; k2 < keys2; ++k2) {
                    auto payload = std::make_shared<HEGenPayload>(*p);
                    payload->coins.push_back(coin);
                    payload->keys1.push_back(Bits(k1, kb1_));
                    payload->keys2.push_back(Bits(k2, kb2_));
                    Bits y = replay_block(*payload, i);
                    std::string key = s.key + "|" + std::to_string(coin) + "," +
                                      std::to_string(k1) + "," + std::to_string(k2);
                    out.push_back({prob, y, OnlineState{payload, key}});
                }
            }
        }
        return out;
    }

private:
    Bits replay_block(const HEGenPayload& p, int upto) const {
        std::vector<uint64_t> coins = p.coins;
        coins.resize(params_.m(), 0);
        auto cheater = cheater_.make(coins);
        Bits result;
        for (int j = 1; j <= upto; ++j) {
            cheater->respond(bits_frame(MsgType::H1Key, p.keys1[j - 1]));
            cheater->respond(bits_frame(MsgType::H2Key, p.keys2[j - 1]));
            cheater->respond(bits_frame(MsgType::TcrKey, Bits()));
            bool final_round = j == params_.m();
            if (!final_round) {
                Frame blk = cheater->respond(Frame{MsgType::Coin, {1}});
                if (blk.type != MsgType::Block)
                    throw ConsistencyError("high_entropy_generator: cheater refused to reveal");
                if (j == upto) result = frame_bits(blk);
            } else {
                Frame mask = cheater->respond(Frame{MsgType::Coin, {0}});
                if (mask.type != MsgType::Mask)
                    throw ConsistencyError("high_entropy_generator: cheater refused the mask");
                Opening first = cheater->openings().first;
                Bits x = first.sigma.slice(0, params_.seed_bits());
                result = params_.generator->eval(Bits(), x)[params_.m() - 1];
            }
        }
        return result;
    }

    EnumerableCheater cheater_;
    ProtocolParams params_;
    int kb1_, kb2_;
};

}  // namespace

EnumerableCheater honest_enumerable_cheater(const ProtocolParams& params) {
    EnumerableCheater c;
    c.round_coin_space.assign(params.m(), 1);
    c.round_coin_space[0] = uint64_t(1) << params.sigma_bits();
    ProtocolParams p = params;
    c.make = [p](const std::vector<uint64_t>& coins) -> std::unique_ptr<CheatingSender> {
        return std::make_unique<HonestCheater>(p, 0, Bits(coins[0], p.sigma_bits()));
    };
    return c;
}

EnumerableCheater support2_enumerable_cheater(const ProtocolParams& params) {
    EnumerableCheater c;
    c.round_coin_space.assign(params.m(), 1);
    ProtocolParams p = params;
    c.make = [p](const std::vector<uint64_t>&) -> std::unique_ptr<CheatingSender> {
        return std::make_unique<Support2Cheater>(p);
    };
    return c;
}

EnumerableCheater coinflip_final_block_cheater(const ProtocolParams& params) {
    Support2Shape shape = support2_shape(params);
    if (shape.differing_round != params.m())
        throw ParamError("coinflip_final_block_cheater: generator must differ in its final block");
    EnumerableCheater c;
    c.round_coin_space.assign(params.m(), 1);
    c.round_coin_space[params.m() - 1] = 2;
    ProtocolParams p = params;
    Bits u_star = shape.u_star;
    c.make = [p, u_star](const std::vector<uint64_t>& coins) -> std::unique_ptr<CheatingSender> {
        uint64_t pick = coins[p.m() - 1] & 1;
        // opens both ways; the first opening's seed is the fresh coin
        class Flip final : public CheatingSender {
        public:
            Flip(const ProtocolParams& params, uint64_t pick, Bits u_star)
                : params_(params),
                  pick_(pick),
                  u_star_(std::move(u_star)),
                  session_(params, 0, Bits(pick, 1).concat(u_star_)) {}
            std::unique_ptr<CheatingSender> clone() const override {
                return std::make_unique<Flip>(*this);
            }
            Frame respond(const Frame& f) override { return session_.respond(f); }
            std::pair<Opening, Opening> openings() const override {
                return {Opening{0, Bits(pick_, 1).concat(u_star_)},
                        Opening{1, Bits(pick_ ^ 1, 1).concat(u_star_)}};
            }

        private:
            ProtocolParams params_;
            uint64_t pick_;
            Bits u_star_;
            SenderSession session_;
        };
        return std::make_unique<Flip>(p, pick, u_star);
    };
    return c;
}

OnlinePtr high_entropy_generator_from_sender(const EnumerableCheater& cheater,
                                             const ProtocolParams& params) {
    return std::make_shared<HEGenOnline>(cheater, params);
}

// --- non-failing wrapper -----------------------------------------------------------------------

namespace {

// Replays recorded receiver messages, then continues with fresh randomness.
class SpliceCoins final : public ReceiverCoins {
public:
    SpliceCoins(std::vector<std::vector<uint8_t>> recorded, SeedStream rng)
        : recorded_(std::move(recorded)), rng_(rng) {}
    Bits key_bits(int width) override {
        if (pos_ < recorded_.size()) {
            const auto& rec = recorded_[pos_++];
            return Bits::from_key(std::string(rec.begin(), rec.end()));
        }
        return rng_.bits(width);
    }
    uint64_t coin_draw(uint64_t bound) override {
        if (pos_ < recorded_.size()) return recorded_[pos_++].at(0);
        return rng_.below(bound);
    }

private:
    std::vector<std::vector<uint8_t>> recorded_;
    size_t pos_ = 0;
    SeedStream rng_;
};

// Drives a continuation of a half-played session: replays the recorded
// transcript against a fresh receiver, then lets the cloned cheater finish
// with fresh receiver coins. Returns the full transcript plus the cheater's
// first opening.
struct Continuation {
    std::vector<Frame> transcript;
    Opening first_opening;
};

Continuation run_continuation(const ProtocolParams& params, const std::vector<Frame>& recorded,
                              CheatingSender& cheater_clone, SeedStream rng) {
    std::vector<std::vector<uint8_t>> receiver_payloads;
    for (size_t i = 0; i < recorded.size(); i += 2) receiver_payloads.push_back(recorded[i].payload);
    ReceiverSession receiver(params,
                             std::make_unique<SpliceCoins>(std::move(receiver_payloads), rng));
    size_t pos = 0;
    while (!receiver.commit_done()) {
        Frame q = receiver.emit();
        Frame a;
        if (pos + 1 < recorded.size()) {
            a = recorded[pos + 1];  // replayed sender message
        } else {
            a = cheater_clone.respond(q);
        }
        receiver.absorb(a);
        pos += 2;
    }
    return Continuation{receiver.transcript(), cheater_clone.openings().first};
}

class NonFailingSender final : public CheatingSender {
public:
    NonFailingSender(ProtocolParams params, std::unique_ptr<CheatingSender> inner,
                     uint64_t retry_budget, SeedStream rng)
        : params_(std::move(params)),
          inner_(std::move(inner)),
          retry_budget_(retry_budget),
          rng_(rng),
          justification_{0, Bits::zeros(params_.sigma_bits())} {}

    NonFailingSender(const NonFailingSender& o)
        : params_(o.params_),
          inner_(o.inner_ ? o.inner_->clone() : nullptr),
          retry_budget_(o.retry_budget_),
          rng_(o.rng_),
          justification_(o.justification_),
          failed_(o.failed_),
          recorded_(o.recorded_),
          honest_(o.honest_ ? std::make_unique<SenderSession>(*o.honest_) : nullptr) {}

    std::unique_ptr<CheatingSender> clone() const override {
        return std::make_unique<NonFailingSender>(*this);
    }

    Frame respond(const Frame& q) override {
        recorded_.push_back(q);
        if (!failed_) {
            Frame reply = inner_->respond(q);
            recorded_.push_back(reply);
            if (!try_justify()) {
                failed_ = true;
                recorded_.pop_back();  // the unjustifiable inner reply is not sent
            } else {
                return reply;
            }
        }
        // honest continuation from the stored justification
        if (!honest_) {
            honest_ = std::make_unique<SenderSession>(params_, justification_.b,
                                                      justification_.sigma);
            // replay the receiver messages seen so far (drop the replies)
            for (size_t i = 0; i + 2 < recorded_.size(); i += 2) (void)honest_->respond(recorded_[i]);
        }
        Frame reply = honest_->respond(recorded_.back());
        recorded_.push_back(reply);
        return reply;
    }

    std::pair<Opening, Opening> openings() const override {
        if (!failed_) return {justification_, inner_->openings().second};
        return {justification_, justification_};
    }

private:
    bool try_justify() {
        for (uint64_t attempt = 0; attempt < retry_budget_; ++attempt) {
            auto clone = inner_->clone();
            Continuation cont =
                run_continuation(params_, recorded_, *clone, rng_.child(attempt ^ salt_++));
            if (auto b = reveal_verify_frames(cont.transcript, cont.first_opening, params_);
                b && *b == cont.first_opening.b) {
                justification_ = cont.first_opening;
                return true;
            }
        }
        return false;
    }

    ProtocolParams params_;
    std::unique_ptr<CheatingSender> inner_;
    uint64_t retry_budget_;
    SeedStream rng_;
    Opening justification_;
    bool failed_ = false;
    std::vector<Frame> recorded_;
    std::unique_ptr<SenderSession> honest_;
    uint64_t salt_ = 0;
};

}  // namespace

CheaterFactory nonfailing_wrapper(const ProtocolParams& params, const CheaterFactory& inner,
                                  uint64_t retry_budget) {
    ProtocolParams p = params;
    return [p, inner, retry_budget](SeedStream rng) -> std::unique_ptr<CheatingSender> {
        // the inner cheater sees the caller's stream unchanged, so wrapping a
        // sender does not perturb its randomness
        return std::make_unique<NonFailingSender>(p, inner(rng), retry_budget,
                                                  rng.child("continuations"));
    };
}

// --- hashing-subprotocol adversary from a cheating sender -----------------------------------------

HashBreakReport binding_to_hash_break(const ProtocolParams& params, const CheaterFactory& cheater,
                                      uint64_t trials, SeedStream& rng) {
    params.validate();
    if (params.tcr_range_bits > 0)
        throw RegimeError("binding_to_hash_break: tcr outputs not checkable exactly");
    OutputSupport support(params.generator);
    int m = params.m();

    HashBreakReport rep;
    rep.trials = trials;
    for (uint64_t trial = 0; trial < trials; ++trial) {
        SeedStream troot = rng.child(trial);
        int i = 1 + (int)troot.below(uint64_t(m));
        auto ch = cheater(troot.child("cheater"));
        SeedStream keys = troot.child("keys");

        std::vector<Bits> revealed;
        std::vector<Frame> frames;
        HashFunction h1{params.h1_family(), Bits()}, h2{params.h2_family(), Bits()};
        Bits y1, y2;
        std::unique_ptr<CheatingSender> pre_coin_clone;

        auto exchange = [&](MsgType type, const Bits& payload) {
            Frame q = bits_frame(type, payload);
            frames.push_back(q);
            Frame a = ch->respond(q);
            frames.push_back(a);
            return a;
        };
        for (int j = 1; j <= i; ++j) {
            Bits k1 = keys.bits(params.h1_family().key_bits());
            Bits k2 = keys.bits(params.h2_family().key_bits());
            Frame r1 = exchange(MsgType::H1Key, k1);
            Frame r2 = exchange(MsgType::H2Key, k2);
            exchange(MsgType::TcrKey, Bits());
            if (j < i) {
                frames.push_back(Frame{MsgType::Coin, {1}});  // c_j = 0
                Frame blk = ch->respond(frames.back());
                frames.push_back(blk);
                if (blk.type != MsgType::Block) break;
                revealed.push_back(frame_bits(blk));
            } else {
                h1 = HashFunction{params.h1_family(), k1};
                h2 = HashFunction{params.h2_family(), k2};
                y1 = frame_bits(r1);
                y2 = frame_bits(r2);
                pre_coin_clone = ch->clone();
            }
        }
        if ((int)revealed.size() != i - 1 || !pre_coin_clone) continue;

        frames.push_back(Frame{MsgType::Coin, {0}});  // c_i = 1
        Frame mask = ch->respond(frames.back());
        frames.push_back(mask);
        if (mask.type != MsgType::Mask) continue;
        auto [t0, t1] = ch->openings();
        auto block_of = [&](const Opening& o) {
            Bits x = o.sigma.slice(0, params.seed_bits());
            return params.generator->eval(Bits(), x)[i - 1];
        };
        Bits y_i0 = block_of(t0);
        // the second candidate counts only when it is itself a valid
        // decommitment of this transcript
        auto b1 = reveal_verify_frames(frames, t1, params);
        Bits y_i1 = (b1 && *b1 == t1.b) ? block_of(t1) : y_i0;

        Bits x0;
        if (i == m) {
            x0 = y_i0;
        } else {
            Frame blk = pre_coin_clone->respond(Frame{MsgType::Coin, {1}});  // rewind, c_i = 0
            if (blk.type != MsgType::Block) continue;
            x0 = frame_bits(blk);
        }
        Bits x1 = troot.below(2) ? y_i1 : y_i0;

        // the low-entropy candidate set: block-i support values given the prefix
        std::set<Bits> low;
        for (const auto& [y, c] : support.next_block_counts(revealed)) low.insert(y);

        auto consistent = [&](const Bits& x) {
            if (params.h1_range_bits && !(eval_hash(h1, x) == y1)) return false;
            if (params.h2_range_bits && !(eval_hash(h2, x) == y2)) return false;
            return true;
        };
        bool success = !(x0 == x1) && (low.count(x0) || low.count(x1)) && consistent(x0) &&
                       consistent(x1);
        if (success) ++rep.successes;
    }
    rep.success_rate = trials ? double(rep.successes) / double(trials) : 0.0;
    rep.ci_halfwidth = hoeffding_halfwidth(1.0, trials);
    return rep;
}

// --- tcp transport ------------------------------------------------------------------------------

namespace {

void send_all(int fd, const uint8_t* data, size_t len) {
    size_t off = 0;
    while (off < len) {
        ssize_t n = ::send(fd, data + off, len - off, 0);
        if (n <= 0) throw ProtocolError("tcp: send failed");
        off += size_t(n);
    }
}

void recv_all(int fd, uint8_t* data, size_t len) {
    size_t off = 0;
    while (off < len) {
        ssize_t n = ::recv(fd, data + off, len - off, 0);
        if (n <= 0) throw ProtocolError("tcp: connection closed");
        off += size_t(n);
    }
}

void send_frame(int fd, const Frame& f) {
    auto bytes = encode_frames({f});
    send_all(fd, bytes.data(), bytes.size());
}

Frame recv_frame(int fd) {
    uint8_t head[4];
    recv_all(fd, head, 4);
    uint32_t len = (uint32_t(head[0]) << 24) | (uint32_t(head[1]) << 16) |
                   (uint32_t(head[2]) << 8) | uint32_t(head[3]);
    if (len < 1 || len > (1u << 20)) throw ProtocolError("tcp: bad frame length");
    std::vector<uint8_t> body(len);
    recv_all(fd, body.data(), len);
    Frame f;
    f.type = MsgType(body[0]);
    f.payload.assign(body.begin() + 1, body.end());
    return f;
}

struct FdCloser {
    int fd;
    ~FdCloser() {
        if (fd >= 0) ::close(fd);
    }
};

}  // namespace

CommitResult run_commit_sender_tcp(const ProtocolParams& params, int b, uint64_t sender_seed,
                                   const std::string& host, int port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw ProtocolError("tcp: socket failed");
    FdCloser closer{fd};
    addrinfo hints{}, *res = nullptr;
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
        throw ProtocolError("tcp: cannot resolve host");
    int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc != 0) throw ProtocolError("tcp: connect failed");

    SeedStream srng = SeedStream(sender_seed).child("sender");
    SenderSession sender(params, b, SenderSession::draw_sigma(params, srng));
    std::vector<Frame> transcript;
    int masked_round = 0;
    int round = 1;
    for (;;) {
        Frame q = recv_frame(fd);
        transcript.push_back(q);
        Frame a = sender.respond(q);
        transcript.push_back(a);
        send_frame(fd, a);
        if (a.type == MsgType::Mask) {
            masked_round = round;
            break;
        }
        if (a.type == MsgType::Block) ++round;
    }
    return CommitResult{encode_frames(transcript), sender.opening(), masked_round, transcript};
}

ReceiverCommitResult run_commit_receiver_tcp(const ProtocolParams& params, uint64_t receiver_seed,
                                             int port) {
    int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (lfd < 0) throw ProtocolError("tcp: socket failed");
    FdCloser lcloser{lfd};
    int opt = 1;
    ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &opt, sizeof(opt));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(uint16_t(port));
    if (::bind(lfd, (sockaddr*)&addr, sizeof(addr)) != 0) throw ProtocolError("tcp: bind failed");
    if (::listen(lfd, 1) != 0) throw ProtocolError("tcp: listen failed");
    int fd = ::accept(lfd, nullptr, nullptr);
    if (fd < 0) throw ProtocolError("tcp: accept failed");
    FdCloser closer{fd};

    ReceiverSession receiver(params, rng_coins(SeedStream(receiver_seed).child("receiver")));
    while (!receiver.commit_done()) {
        Frame q = receiver.emit();
        send_frame(fd, q);
        Frame a = recv_frame(fd);
        receiver.absorb(a);
    }
    return ReceiverCommitResult{receiver.commitment(), receiver.masked_round()};
}

}  // namespace ef
