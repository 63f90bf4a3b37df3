#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "entropy_forge/errors.hpp"

namespace ef {

/**
 * Exact nonnegative rational on 64-bit numerator/denominator, always reduced.
 *
 * All randomness in this project is uniform over finite sets, so every exact
 * probability is a ratio of set sizes; dyadic rationals (the common case) are
 * covered. Intermediate products run through 128 bits and must reduce back
 * into 64; at desk-scale parameters they always do.
 */
struct Frac {
    uint64_t num = 0;
    uint64_t den = 1;

    Frac() = default;
    Frac(uint64_t n, uint64_t d) : num(n), den(d) {
        if (d == 0) throw ParamError("Frac: zero denominator");
        reduce();
    }
    static Frac zero() { return Frac(); }
    static Frac one() { return Frac(1, 1); }
    static Frac dyadic(uint64_t n, int log2_den) {
        if (log2_den < 0 || log2_den > 63) throw ParamError("Frac::dyadic: bad exponent");
        return Frac(n, uint64_t(1) << log2_den);
    }

    bool is_zero() const { return num == 0; }
    bool is_one() const { return num == den; }
    double to_double() const { return double(num) / double(den); }

    Frac operator+(const Frac& o) const {
        unsigned __int128 n = (unsigned __int128)num * o.den + (unsigned __int128)o.num * den;
        unsigned __int128 d = (unsigned __int128)den * o.den;
        return from128(n, d);
    }
    Frac operator-(const Frac& o) const {
        unsigned __int128 a = (unsigned __int128)num * o.den;
        unsigned __int128 b = (unsigned __int128)o.num * den;
        if (b > a) throw ParamError("Frac: negative result");
        return from128(a - b, (unsigned __int128)den * o.den);
    }
    Frac operator*(const Frac& o) const {
        uint64_t g1 = std::gcd(num, o.den), g2 = std::gcd(o.num, den);
        unsigned __int128 n = (unsigned __int128)(num / g1) * (o.num / g2);
        unsigned __int128 d = (unsigned __int128)(den / g2) * (o.den / g1);
        return from128(n, d);
    }
    Frac operator/(const Frac& o) const {
        if (o.num == 0) throw ParamError("Frac: division by zero");
        return *this * Frac(o.den, o.num);
    }

    bool operator==(const Frac& o) const { return num == o.num && den == o.den; }
    bool operator<(const Frac& o) const {
        return (unsigned __int128)num * o.den < (unsigned __int128)o.num * den;
    }
    bool operator<=(const Frac& o) const { return !(o < *this); }
    bool operator>(const Frac& o) const { return o < *this; }
    bool operator>=(const Frac& o) const { return !(*this < o); }

    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

private:
    void reduce() {
        if (num == 0) {
            den = 1;
            return;
        }
        uint64_t g = std::gcd(num, den);
        num /= g;
        den /= g;
    }
    static Frac from128(unsigned __int128 n, unsigned __int128 d) {
        if (d == 0) throw ParamError("Frac: zero denominator");
        if (n == 0) return Frac();
        unsigned __int128 a = n, b = d;
        while (b) {
            auto t = a % b;
            a = b;
            b = t;
        }
        n /= a;
        d /= a;
        if (n > ~uint64_t(0) || d > ~uint64_t(0))
            throw ParamError("Frac: value exceeds 64-bit exact range");
        Frac f;
        f.num = (uint64_t)n;
        f.den = (uint64_t)d;
        return f;
    }
};

}  // namespace ef
