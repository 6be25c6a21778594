#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "chainplace/errors.hpp"

namespace chainplace {

/// Exact ratio used for resource-augmentation factors.
using rational = boost::rational<std::int64_t>;

inline double to_double(const rational& r) {
    return boost::rational_cast<double>(r);
}

/// floor(r * value) for non-negative r and value, computed without rounding.
inline std::int64_t floor_mul(const rational& r, std::int64_t value) {
    return (r.numerator() * value) / r.denominator();
}

/// Parses "2", "1.25", or "3/2" into an exact rational.
inline rational parse_rational(std::string_view text) {
    auto fail = [&] { return config_error("cannot parse ratio '" + std::string(text) + "'"); };
    if (text.empty()) throw fail();
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        try {
            auto num = std::stoll(std::string(text.substr(0, slash)));
            auto den = std::stoll(std::string(text.substr(slash + 1)));
            if (den == 0) throw fail();
            return rational(num, den);
        } catch (const std::logic_error&) {
            throw fail();
        }
    }
    std::int64_t whole = 0;
    std::int64_t frac = 0;
    std::int64_t scale = 1;
    bool seen_dot = false;
    bool seen_digit = false;
    for (char c : text) {
        if (c == '.') {
            if (seen_dot) throw fail();
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            seen_digit = true;
            if (seen_dot) {
                if (scale >= 1'000'000'000) continue; // ignore digits past 1e-9
                frac = frac * 10 + (c - '0');
                scale *= 10;
            } else {
                whole = whole * 10 + (c - '0');
            }
        } else {
            throw fail();
        }
    }
    if (!seen_digit) throw fail();
    return rational(whole * scale + frac, scale);
}

inline std::string to_string(const rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

} // namespace chainplace
