#include "entropy_forge/bits.hpp"

#include <bit>

#include "entropy_forge/errors.hpp"

namespace ef {

namespace {
void check_width(int width) {
    if (width < 0 || width > Bits::kMaxWidth) throw ParamError("Bits: width out of range");
}
}  // namespace

Bits::Bits(uint64_t value, int width) {
    if (width < 0 || width > 64) throw ParamError("Bits(value,width): width must be in [0,64]");
    if (width < 64 && (value >> width) != 0)
        throw ParamError("Bits(value,width): value does not fit in width");
    width_ = int16_t(width);
    for (int i = 0; i < width; ++i)
        if ((value >> (width - 1 - i)) & 1) bytes_[i >> 3] |= uint8_t(0x80u >> (i & 7));
}

Bits Bits::zeros(int width) {
    check_width(width);
    Bits b;
    b.width_ = int16_t(width);
    return b;
}

void Bits::check_index(int i) const {
    if (i < 0 || i >= width_) throw ParamError("Bits: bit index out of range");
}

int Bits::bit(int i) const {
    check_index(i);
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1;
}

void Bits::set_bit(int i, int v) {
    check_index(i);
    uint8_t mask = uint8_t(0x80u >> (i & 7));
    if (v)
        bytes_[i >> 3] |= mask;
    else
        bytes_[i >> 3] &= uint8_t(~mask);
}

uint64_t Bits::to_u64() const {
    if (width_ > 64) throw ParamError("Bits::to_u64: width exceeds 64");
    uint64_t v = 0;
    for (int i = 0; i < width_; ++i) v = (v << 1) | uint64_t(bit(i));
    return v;
}

static int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ParamError("Bits: bad hex digit");
}

std::string Bits::to_hex() const {
    int nibbles = (width_ + 3) / 4;
    int pad = nibbles * 4 - width_;  // leading zero bits of the first nibble
    std::string out(nibbles, '0');
    static const char* digits = "0123456789abcdef";
    for (int k = 0; k < nibbles; ++k) {
        int v = 0;
        for (int j = 0; j < 4; ++j) {
            int i = k * 4 + j - pad;  // bit-string index
            int b = (i >= 0 && i < width_) ? bit(i) : 0;
            v = (v << 1) | b;
        }
        out[k] = digits[v];
    }
    return out;
}

Bits Bits::from_hex(const std::string& hex, int width) {
    check_width(width);
    int nibbles = (width + 3) / 4;
    if ((int)hex.size() != nibbles)
        throw ParamError("Bits::from_hex: hex length does not match width");
    int pad = nibbles * 4 - width;
    Bits out = Bits::zeros(width);
    for (int k = 0; k < nibbles; ++k) {
        int v = hex_digit(hex[k]);
        for (int j = 0; j < 4; ++j) {
            int i = k * 4 + j - pad;
            int b = (v >> (3 - j)) & 1;
            if (i < 0 || i >= width) {
                if (b) throw ParamError("Bits::from_hex: nonzero pad bits");
            } else if (b) {
                out.set_bit(i, 1);
            }
        }
    }
    return out;
}

std::string Bits::to_binstring() const {
    std::string s(width_, '0');
    for (int i = 0; i < width_; ++i)
        if (bit(i)) s[i] = '1';
    return s;
}

Bits Bits::from_binstring(const std::string& s) {
    check_width((int)s.size());
    Bits out = Bits::zeros((int)s.size());
    for (int i = 0; i < (int)s.size(); ++i) {
        if (s[i] == '1')
            out.set_bit(i, 1);
        else if (s[i] != '0')
            throw ParamError("Bits::from_binstring: expected 0/1");
    }
    return out;
}

Bits Bits::slice(int begin, int len) const {
    if (begin < 0 || len < 0 || begin + len > width_) throw ParamError("Bits::slice out of range");
    Bits out = Bits::zeros(len);
    for (int i = 0; i < len; ++i)
        if (bit(begin + i)) out.set_bit(i, 1);
    return out;
}

Bits Bits::concat(const Bits& other) const {
    check_width(width_ + other.width_);
    Bits out = Bits::zeros(width_ + other.width_);
    for (int k = 0; k < used_bytes(); ++k) out.bytes_[k] = bytes_[k];
    for (int i = 0; i < other.width_; ++i)
        if (other.bit(i)) out.set_bit(width_ + i, 1);
    return out;
}

Bits Bits::operator^(const Bits& other) const {
    if (width_ != other.width_) throw ParamError("Bits::operator^: width mismatch");
    Bits out = *this;
    for (int k = 0; k < used_bytes(); ++k) out.bytes_[k] ^= other.bytes_[k];
    return out;
}

int Bits::parity_and(const Bits& mask) const {
    if (width_ != mask.width_) throw ParamError("Bits::parity_and: width mismatch");
    int p = 0;
    for (int k = 0; k < used_bytes(); ++k)
        p ^= std::popcount(unsigned(bytes_[k] & mask.bytes_[k])) & 1;
    return p;
}

std::string Bits::key() const {
    std::string out;
    out.reserve(2 + used_bytes());
    out.push_back(char(width_ & 0xff));
    out.push_back(char((width_ >> 8) & 0xff));
    out.append((const char*)bytes_.data(), size_t(used_bytes()));
    return out;
}

Bits Bits::from_key(const std::string& key) {
    if (key.size() < 2) throw ParamError("Bits::from_key: truncated");
    int width = (uint8_t)key[0] | ((uint8_t)key[1] << 8);
    check_width(width);
    if ((int)key.size() != 2 + (width + 7) / 8) throw ParamError("Bits::from_key: bad length");
    Bits out = Bits::zeros(width);
    for (size_t k = 2; k < key.size(); ++k) out.bytes_[k - 2] = (uint8_t)key[k];
    int tail = width & 7;
    if (tail && (out.bytes_[(width - 1) >> 3] & uint8_t(0xff >> tail)))
        throw ParamError("Bits::from_key: nonzero tail bits");
    return out;
}

}  // namespace ef
