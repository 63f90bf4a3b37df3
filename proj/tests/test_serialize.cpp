#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "entropy_forge/protocol.hpp"
#include "entropy_forge/serialize.hpp"

using namespace ef;
using nlohmann::json;

TEST_CASE("distribution json round trip") {
    Distribution d = Distribution::from_counts(
        {{std::string("\x01", 1), 2}, {std::string("\x02", 1), 1}, {std::string("\x03", 1), 1}});
    json j = distribution_to_json(d);
    CHECK(j.contains("outcomes_hex"));
    CHECK(j.contains("weight_num"));
    CHECK(j.at("weight_denom_log2") == 2);
    Distribution back = distribution_from_json(j);
    CHECK(back.outcomes() == d.outcomes());
    CHECK(back.weight_num() == d.weight_num());
    CHECK(back.denom_log2() == d.denom_log2());
}

TEST_CASE("joint json keeps the schema") {
    std::vector<std::pair<std::string, uint64_t>> rows;
    for (uint64_t x = 0; x < 4; ++x)
        rows.emplace_back(std::string(1, char(x)) + std::string(1, char(x >> 1)), 1);
    JointDistribution jd(Distribution::from_counts(rows), {1, 1});
    JointDistribution back = joint_from_json(joint_to_json(jd));
    CHECK(back.arity() == 2);
    CHECK(back.schema() == jd.schema());
    CHECK(back.dist().outcomes() == jd.dist().outcomes());
}

TEST_CASE("hash function json carries kind, widths and key") {
    HashFamilySpec fam{HashKind::PolyEllWise, 8, 4, 3, TcrMode::OracleBacked, 0};
    SeedStream rng(5);
    HashFunction h = sample_hash(fam, rng);
    json j = hash_function_to_json(h);
    CHECK(j.at("kind") == "poly-ell-wise");
    CHECK(j.at("domain_bits") == 8);
    CHECK(j.at("range_bits") == 4);
    CHECK(j.at("ell") == 3);
    HashFunction back = hash_function_from_json(j);
    CHECK(back.family == h.family);
    CHECK(back.key == h.key);
    for (uint64_t x = 0; x < 256; ++x)
        CHECK(eval_hash(back, Bits(x, 8)) == eval_hash(h, Bits(x, 8)));
}

TEST_CASE("function tables and protocol params round trip") {
    FunctionTable f = FunctionTable::random_function(4, 11);
    FunctionTable back = function_table_from_json(function_table_to_json(f));
    CHECK(back.table == f.table);

    ProtocolParams p;
    p.n = 4;
    p.generator = direct_product(bit_blocks_generator(4), 2);
    p.h1_range_bits = 1;
    p.h2_range_bits = 0;
    ProtocolParams q = ProtocolParams::from_json(p.to_json());
    CHECK(q.m() == p.m());
    CHECK(q.ell() == p.ell());
    CHECK(q.h1_range_bits == 1);
    for (uint64_t x = 0; x < 256; ++x)
        CHECK(q.generator->eval_seed(x) == p.generator->eval_seed(x));
}

TEST_CASE("openings round trip against their params") {
    ProtocolParams p;
    p.n = 2;
    p.generator = bit_blocks_generator(2);
    p.h1_range_bits = 1;
    CommitResult res = run_commit(p, 1, 3, 4);
    Opening back = Opening::from_json(res.opening.to_json(), p);
    CHECK(back.b == res.opening.b);
    CHECK(back.sigma == res.opening.sigma);
    auto echoed = reveal_verify(res.commitment, back, p);
    REQUIRE(echoed);
    CHECK(*echoed == 1);
}

TEST_CASE("frame codec round trip and canonical bytes") {
    std::vector<Frame> frames = {bits_frame(MsgType::H1Key, Bits(0b1011, 4)),
                                 Frame{MsgType::Coin, {2}},
                                 bits_frame(MsgType::Block, Bits(0b01, 2))};
    auto bytes = encode_frames(frames);
    auto back = decode_frames(bytes);
    REQUIRE(back.size() == frames.size());
    for (size_t i = 0; i < frames.size(); ++i) CHECK(back[i] == frames[i]);
    // 4-byte big-endian length then tag
    CHECK(bytes[0] == 0);
    CHECK(bytes[3] == frames[0].payload.size() + 1);
    CHECK(bytes[4] == uint8_t(MsgType::H1Key));
}
