#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

namespace ef {

/**
 * Fixed-width bit string b_1 b_2 ... b_w, w <= 192.
 *
 * Bit 0 is the *first* bit of the string. When a Bits value is read as an
 * integer, the first bit is the most significant one, so the 4-bit string
 * "1010" has value 0b1010. Hex serialization is big-endian over ceil(w/4)
 * nibbles of that integer. Widths above 64 are supported for everything
 * except integer conversion.
 *
 * Storage is inline (no heap): enumeration sweeps copy these by the million.
 * 192 bits covers the widest objects in the project (the higher-order
 * polynomial hash keys).
 */
class Bits {
public:
    static constexpr int kMaxWidth = 192;

    Bits() = default;
    Bits(uint64_t value, int width);

    static Bits zeros(int width);
    static Bits from_hex(const std::string& hex, int width);
    static Bits from_binstring(const std::string& s);  // e.g. "1010"

    int size() const { return width_; }
    bool empty() const { return width_ == 0; }

    int bit(int i) const;          // 0 or 1
    void set_bit(int i, int v);

    uint64_t to_u64() const;       // width must be <= 64
    std::string to_hex() const;
    std::string to_binstring() const;

    Bits slice(int begin, int len) const;
    Bits concat(const Bits& other) const;
    Bits operator^(const Bits& other) const;    // widths must match
    int parity_and(const Bits& mask) const;     // <this, mask> over GF(2)

    // Canonical byte key (width prefix + payload); usable as a map key and
    // as the opaque-outcome encoding fed to the entropy oracle.
    std::string key() const;
    static Bits from_key(const std::string& key);

    bool operator==(const Bits& other) const {
        if (width_ != other.width_) return false;
        for (int k = 0; k < used_bytes(); ++k)
            if (bytes_[k] != other.bytes_[k]) return false;
        return true;
    }
    bool operator<(const Bits& other) const {
        if (width_ != other.width_) return width_ < other.width_;
        for (int k = 0; k < used_bytes(); ++k)
            if (bytes_[k] != other.bytes_[k]) return bytes_[k] < other.bytes_[k];
        return false;
    }

private:
    int16_t width_ = 0;
    std::array<uint8_t, kMaxWidth / 8> bytes_{};  // bit i at bytes_[i/8], mask 0x80 >> (i%8)

    int used_bytes() const { return (width_ + 7) / 8; }
    void check_index(int i) const;
};

}  // namespace ef
