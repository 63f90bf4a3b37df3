#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "entropy_forge/bits.hpp"
#include "entropy_forge/errors.hpp"
#include "entropy_forge/rng.hpp"

using namespace ef;

TEST_CASE("construction and integer round trip") {
    Bits b(0b1010, 4);
    CHECK(b.size() == 4);
    CHECK(b.bit(0) == 1);
    CHECK(b.bit(1) == 0);
    CHECK(b.bit(2) == 1);
    CHECK(b.bit(3) == 0);
    CHECK(b.to_u64() == 0b1010);
    CHECK(b.to_binstring() == "1010");
    CHECK(Bits::from_binstring("1010") == b);
    CHECK_THROWS_AS(Bits(16, 4), ParamError);
}

TEST_CASE("hex round trip at odd widths") {
    for (int width : {1, 3, 4, 7, 8, 12, 17, 30}) {
        SeedStream rng(7 + width);
        for (int t = 0; t < 50; ++t) {
            Bits b = rng.bits(width);
            CHECK(Bits::from_hex(b.to_hex(), width) == b);
        }
    }
    CHECK(Bits(0b101, 3).to_hex() == "5");
    CHECK(Bits(0x1b, 8).to_hex() == "1b");
    CHECK_THROWS_AS(Bits::from_hex("ff", 3), ParamError);  // nonzero pad bits
}

TEST_CASE("slice, concat, xor, parity") {
    Bits b(0b110101, 6);
    CHECK(b.slice(0, 2) == Bits(0b11, 2));
    CHECK(b.slice(2, 4) == Bits(0b0101, 4));
    CHECK(b.slice(0, 2).concat(b.slice(2, 4)) == b);
    CHECK((Bits(0b1100, 4) ^ Bits(0b1010, 4)) == Bits(0b0110, 4));
    CHECK(Bits(0b1010, 4).parity_and(Bits(0b1100, 4)) == 1);
    CHECK(Bits(0b1010, 4).parity_and(Bits(0b0101, 4)) == 0);
    CHECK_THROWS_AS(Bits(1, 1) ^ Bits(1, 2), ParamError);
}

TEST_CASE("ordering and keys") {
    CHECK(Bits(0, 2) < Bits(1, 2));
    CHECK(Bits(0, 1) < Bits(0, 2));  // width first
    Bits b(0b10110, 5);
    CHECK(Bits::from_key(b.key()) == b);
    Bits empty;
    CHECK(Bits::from_key(empty.key()) == empty);
}

TEST_CASE("wide strings") {
    SeedStream rng(99);
    Bits b = rng.bits(130);
    CHECK(b.size() == 130);
    CHECK(Bits::from_hex(b.to_hex(), 130) == b);
    CHECK_THROWS_AS(b.to_u64(), ParamError);
    CHECK(b.slice(64, 66).size() == 66);
}
