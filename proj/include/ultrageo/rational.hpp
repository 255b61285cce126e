#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "error.hpp"

namespace ultrageo {

/// Exact rational used for every distance, budget and certificate.
using Rational = boost::rational<std::int64_t>;

inline std::string format(const Rational& r) {
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline Rational abs(const Rational& r) { return r < 0 ? -r : r; }

/// Smallest integer >= r.
inline std::int64_t ceil(const Rational& r) {
    std::int64_t q = r.numerator() / r.denominator();
    if (r.numerator() % r.denominator() != 0 && r.numerator() > 0) ++q;
    return q;
}

/// Largest integer <= r.
inline std::int64_t floor(const Rational& r) {
    std::int64_t q = r.numerator() / r.denominator();
    if (r.numerator() % r.denominator() != 0 && r.numerator() < 0) --q;
    return q;
}

namespace detail {
inline std::int64_t parse_int(std::string_view s) {
    if (s.empty()) throw ParseError("empty integer");
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) throw ParseError("malformed integer '" + std::string(s) + "'");
    std::int64_t v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') throw ParseError("malformed integer '" + std::string(s) + "'");
        if (v > (INT64_MAX - 9) / 10) throw ParseError("integer overflow in '" + std::string(s) + "'");
        v = v * 10 + (s[i] - '0');
    }
    return neg ? -v : v;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}
}  // namespace detail

/// Accepts "p/q", integers and finite decimals ("0.25" -> 1/4).
inline Rational parse_rational(std::string_view text) {
    auto s = detail::trim(text);
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto num = detail::parse_int(detail::trim(s.substr(0, slash)));
        auto den = detail::parse_int(detail::trim(s.substr(slash + 1)));
        if (den == 0) throw ParseError("zero denominator in '" + std::string(s) + "'");
        return Rational(num, den);
    }
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        auto ip = s.substr(0, dot);
        auto fp = s.substr(dot + 1);
        bool neg = !ip.empty() && ip[0] == '-';
        if (fp.size() > 15) throw ParseError("too many decimals in '" + std::string(s) + "'");
        std::int64_t whole = (ip.empty() || ip == "-" || ip == "+") ? 0 : detail::parse_int(ip);
        std::int64_t frac = fp.empty() ? 0 : detail::parse_int(fp);
        if (frac < 0) throw ParseError("malformed decimal '" + std::string(s) + "'");
        std::int64_t den = 1;
        for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
        Rational r = Rational(whole < 0 ? -whole : whole) + Rational(frac, den);
        return neg ? -r : r;
    }
    return Rational(detail::parse_int(s));
}

}  // namespace ultrageo
