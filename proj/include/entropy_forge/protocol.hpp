#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "entropy_forge/generators.hpp"
#include "entropy_forge/hashing.hpp"
#include "entropy_forge/online.hpp"
#include "entropy_forge/owf_attacks.hpp"

namespace ef {

/**
 * The commitment protocol. Per round the parties run the hashing subprotocol
 * on the sender's current block (first-family key/answer, second-family
 * key/answer, tcr key/answer), then the receiver flips an exact
 * Bernoulli(1/(m+1-i)) coin; on 0 the sender reveals the block, on 1 it
 * sends the masked bit (<u, y_i> xor b, together with u) and the commit
 * stage ends. The receiver is public-coin: every message it sends equals the
 * coins it drew. The commitment is the canonical byte string of all frames
 * in order; reveal is generic: re-execute the honest sender on the claimed
 * coins and compare its messages bit-exactly.
 *
 * Range 0 for any hash slot selects the degenerate empty family (no key, no
 * output bits), which is how the no-leakage hiding presets are written.
 */
struct ProtocolParams {
    int n = 4;
    GenPtr generator;       // padded internally to a uniform block width
    int h1_range_bits = 1;
    int h1_order = 2;       // independence order of the first family
    int h2_range_bits = 0;
    int tcr_range_bits = 0;
    TcrMode tcr_mode = TcrMode::KeyedMix;
    uint64_t tcr_instance = 0;
    int repetitions = 1;

    int m() const { return generator->block_count(); }
    int ell() const { return generator->max_block_bits(); }
    int seed_bits() const { return generator->seed_bits(); }
    int sigma_bits() const { return seed_bits() + ell(); }  // seed, then the mask vector u

    HashFamilySpec h1_family() const;
    HashFamilySpec h2_family() const;
    HashFamilySpec tcr_family() const;
    void validate() const;

    nlohmann::json to_json() const;
    static ProtocolParams from_json(const nlohmann::json& j);
};

// --- wire ---------------------------------------------------------------------

enum class MsgType : uint8_t {
    PublicParam = 0x01,
    H1Key = 0x11,
    Y1 = 0x12,
    H2Key = 0x13,
    Y2 = 0x14,
    TcrKey = 0x15,
    TcrOut = 0x16,
    Coin = 0x17,
    Block = 0x18,
    Mask = 0x19,
};

struct Frame {
    MsgType type;
    std::vector<uint8_t> payload;
    bool operator==(const Frame&) const = default;
};

// 4-byte big-endian length (of tag + payload), 1-byte type tag, payload.
std::vector<uint8_t> encode_frames(const std::vector<Frame>& frames);
std::vector<Frame> decode_frames(const std::vector<uint8_t>& bytes);
Frame bits_frame(MsgType type, const Bits& b);
Bits frame_bits(const Frame& f);

struct Opening {
    int b = 0;
    Bits sigma;  // sender coins: seed bits, then the ell-bit mask vector

    nlohmann::json to_json() const;
    static Opening from_json(const nlohmann::json& j, const ProtocolParams& params);
};

// --- sessions -----------------------------------------------------------------

// Receiver coins flow through this interface so a session can either draw
// fresh coins or replay recorded ones (reveal re-execution and the
// non-failing wrapper's random continuations both replay).
class ReceiverCoins {
public:
    virtual ~ReceiverCoins() = default;
    virtual Bits key_bits(int width) = 0;
    virtual uint64_t coin_draw(uint64_t bound) = 0;  // uniform in [0, bound)
};
std::unique_ptr<ReceiverCoins> rng_coins(SeedStream rng);

class ReceiverSession {
public:
    ReceiverSession(ProtocolParams params, std::unique_ptr<ReceiverCoins> coins);

    bool wants_to_send() const { return !done_ && sending_; }
    Frame emit();
    void absorb(const Frame& f);  // throws ProtocolError on anything out of order
    bool commit_done() const { return done_; }
    int masked_round() const { return masked_round_; }  // 1-based; 0 until the mask

    const std::vector<Frame>& transcript() const { return transcript_; }
    std::vector<uint8_t> commitment() const { return encode_frames(transcript_); }
    const std::vector<std::vector<uint8_t>>& coin_log() const { return coin_log_; }

private:
    enum class Step { H1, Y1, H2, Y2, TcrK, TcrO, Coin, BlockOrMask };
    ProtocolParams params_;
    std::unique_ptr<ReceiverCoins> coins_;
    Step step_ = Step::H1;
    bool sending_ = true;
    int round_ = 1;
    int masked_round_ = 0;
    bool done_ = false;
    std::vector<Frame> transcript_;
    std::vector<std::vector<uint8_t>> coin_log_;
};

class SenderSession {
public:
    SenderSession(ProtocolParams params, int b, Bits sigma);
    static Bits draw_sigma(const ProtocolParams& params, SeedStream& rng);

    Frame respond(const Frame& receiver_msg);  // throws ProtocolError
    bool commit_done() const { return done_; }
    Opening opening() const { return Opening{b_, sigma_}; }

private:
    enum class Step { H1, H2, TcrK, Coin };
    ProtocolParams params_;
    int b_;
    Bits sigma_;
    std::vector<Bits> blocks_;
    Bits u_;
    Step expect_ = Step::H1;
    int round_ = 1;
    bool done_ = false;
};

struct CommitResult {
    std::vector<uint8_t> commitment;
    Opening opening;
    int masked_round = 0;
    std::vector<Frame> transcript;
};

CommitResult run_commit(const ProtocolParams& params, int b, uint64_t sender_seed,
                        uint64_t receiver_seed);

// Generic reveal: accept iff the honest sender on (b, sigma) reproduces every
// sender frame of the commitment against its receiver frames.
std::optional<int> reveal_verify(const std::vector<uint8_t>& commitment, const Opening& opening,
                                 const ProtocolParams& params);
std::optional<int> reveal_verify_frames(const std::vector<Frame>& transcript,
                                        const Opening& opening, const ProtocolParams& params);

// --- cheating senders -----------------------------------------------------------

class CheatingSender {
public:
    virtual ~CheatingSender() = default;
    virtual std::unique_ptr<CheatingSender> clone() const = 0;
    virtual Frame respond(const Frame& receiver_msg) = 0;
    // the two claimed openings, once the commit stage has ended
    virtual std::pair<Opening, Opening> openings() const = 0;
};
using CheaterFactory = std::function<std::unique_ptr<CheatingSender>(SeedStream rng)>;

// The honest sender adapted to the cheating interface; opens the same way twice.
CheaterFactory honest_cheater(const ProtocolParams& params);

// Scripted double-opener for a 2-element-support generator whose blocks agree
// everywhere except one round: plays the lexicographically first seed, picks
// the mask vector u adversarially so the two candidate openings decode to
// different bits, and claims both seeds at reveal.
CheaterFactory support2_cheater(const ProtocolParams& params);

struct BindingOutcome {
    bool success = false;        // both openings accepted with distinct bits
    int masked_round = 0;
    std::vector<Frame> transcript;
};
BindingOutcome run_binding_game(const ProtocolParams& params, CheatingSender& cheater,
                                SeedStream receiver_rng);
AttackReport binding_attack_harness(const ProtocolParams& params, const CheaterFactory& cheater,
                                    uint64_t trials, SeedStream& rng);

// The hashing subprotocol run standalone over an ell-bit sender input: the
// two-family exchange (weak), optionally extended by the tcr round (strong).
struct HashingTranscript {
    HashFunction h1, h2, tcr;
    Bits y1, y2, w;
    bool strong = false;
    std::vector<Frame> frames;
};
HashingTranscript run_weak_hashing(const ProtocolParams& params, const Bits& x, SeedStream& rng);
HashingTranscript run_strong_hashing(const ProtocolParams& params, const Bits& x, SeedStream& rng);
// Whether a candidate input is consistent with a hashing transcript.
bool hashing_consistent(const HashingTranscript& t, const Bits& x);

// Exact Pr over round keys that two distinct blocks survive the full hashing
// subprotocol (collide under every sampled family).
double survival_probability(const ProtocolParams& params, const Bits& y0, const Bits& y1);

// --- parallel repetition -----------------------------------------------------------

// t lockstep copies committed to the same bit; reveal accepts iff every copy
// accepts the same bit.
struct ParallelCommitResult {
    std::vector<std::vector<uint8_t>> commitments;
    std::vector<Opening> openings;
};
// The repetition count the asymptotic analysis would pick, as a preset.
int asymptotic_repetition_count(int n, double p, int m);

ParallelCommitResult run_commit_parallel(const ProtocolParams& params, int b, uint64_t sender_seed,
                                         uint64_t receiver_seed);
std::optional<int> reveal_verify_parallel(const std::vector<std::vector<uint8_t>>& commitments,
                                          const std::vector<Opening>& openings,
                                          const ProtocolParams& params);
AttackReport parallel_binding_attack_harness(const ProtocolParams& params,
                                             const CheaterFactory& cheater, uint64_t trials,
                                             SeedStream& rng);

// --- hiding -------------------------------------------------------------------------

// Exact statistical distance between the receiver's commit-stage views under
// b = 0 and b = 1, by structured enumeration (mask round, revealed prefix,
// round keys, hash cell, mask vector). A dishonest receiver here can only
// bias its coin draws, so the worst case maximizes over the masked round and
// the mask-round keys instead of averaging. Exact mode needs enumerable key
// spaces and tcr range 0; otherwise supply a sampling budget for a plug-in
// estimate over sampled views.
enum class ReceiverStrategy { Honest, WorstCaseCoins };
double hiding_distance_exact(const ProtocolParams& params,
                             ReceiverStrategy strategy = ReceiverStrategy::Honest);
struct HidingEstimate {
    double sd = 0.0;
    uint64_t budget = 0;
    double ci_halfwidth = 0.0;  // Hoeffding on each empirical cell, aggregated
};
HidingEstimate hiding_distance_sampled(const ProtocolParams& params, uint64_t budget,
                                       SeedStream& rng);

// --- proof-derived machinery ----------------------------------------------------------

// A cheater with an explicitly enumerable internal coin space, one draw per
// round, as the exact adversary analyses need. The cheater's behavior
// through round i must depend only on coins[0..i-1] (everything our scripted
// cheaters satisfy); setup randomness belongs to round 1.
struct EnumerableCheater {
    std::vector<uint64_t> round_coin_space;  // values per round; 1 = deterministic
    std::function<std::unique_ptr<CheatingSender>(const std::vector<uint64_t>& coins)> make;
};
EnumerableCheater honest_enumerable_cheater(const ProtocolParams& params);
EnumerableCheater support2_enumerable_cheater(const ProtocolParams& params);
// Double-opens its final (1-bit-entropy) block with certainty: the block is
// chosen by a fresh coin, which shows up as accessible entropy.
EnumerableCheater coinflip_final_block_cheater(const ProtocolParams& params);

// The high-entropy online generator built from a cheating sender: the mask
// round is pinned to m, rounds feed the receiver's keys as coins, blocks are
// the cheater's revealed blocks, and the final block is read off the
// cheater's first opening. G-consistent whenever the cheater is non-failing.
OnlinePtr high_entropy_generator_from_sender(const EnumerableCheater& cheater,
                                             const ProtocolParams& params);

// Justification-searching wrapper: before forwarding each inner message it
// looks for an opening that explains the transcript so far via random
// continuations (fresh receiver coins), and falls back to honest play from
// the last justification when the search budget runs out.
CheaterFactory nonfailing_wrapper(const ProtocolParams& params, const CheaterFactory& inner,
                                  uint64_t retry_budget);

// The round-guessing adversary against the hashing subprotocol built from a
// non-failing cheating sender: replays a prefix with forced reveal coins,
// bridges round i to a live hashing session, and rewinds the cheater across
// both values of c_i. Success is the strong-binding event: distinct outputs,
// one inside the low-entropy block set, both consistent with the live
// transcript.
struct HashBreakReport {
    uint64_t trials = 0;
    uint64_t successes = 0;
    double success_rate = 0.0;
    double ci_halfwidth = 0.0;
};
HashBreakReport binding_to_hash_break(const ProtocolParams& params, const CheaterFactory& cheater,
                                      uint64_t trials, SeedStream& rng);

// --- transports -------------------------------------------------------------------

// Frames over a socket: sender connects to host:port, receiver listens once
// on port. The in-process driver is run_commit above.
CommitResult run_commit_sender_tcp(const ProtocolParams& params, int b, uint64_t sender_seed,
                                   const std::string& host, int port);
struct ReceiverCommitResult {
    std::vector<uint8_t> commitment;
    int masked_round = 0;
};
ReceiverCommitResult run_commit_receiver_tcp(const ProtocolParams& params, uint64_t receiver_seed,
                                             int port);

}  // namespace ef
