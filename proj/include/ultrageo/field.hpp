#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "rational.hpp"

namespace ultrageo {

/// An element of GF(p^k), encoded as sum_i c_i p^i over its coefficient
/// vector in the modulus basis. The encoding is only meaningful together with
/// the Field that produced it.
struct FieldElement {
    std::uint32_t code = 0;

    constexpr auto operator<=>(const FieldElement&) const = default;
};

namespace detail {

using Poly = std::vector<std::uint32_t>;  // low degree first

inline bool is_prime(std::uint32_t p) {
    if (p < 2) return false;
    for (std::uint32_t d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

inline void poly_trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

/// Remainder of a modulo a monic polynomial m over Z_p.
inline Poly poly_mod(Poly a, const Poly& m, std::uint32_t p) {
    poly_trim(a);
    const std::size_t dm = m.size() - 1;
    while (a.size() > dm) {
        const std::uint32_t lead = a.back();
        const std::size_t shift = a.size() - 1 - dm;
        for (std::size_t i = 0; i <= dm; ++i)
            a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + (p - lead) * m[i]) % p);
        poly_trim(a);
    }
    return a;
}

/// Exhaustive irreducibility test: no monic factor of degree <= deg/2.
inline bool is_irreducible(const Poly& m, std::uint32_t p) {
    const std::size_t deg = m.size() - 1;
    for (std::size_t d = 1; d <= deg / 2; ++d) {
        std::uint64_t count = 1;
        for (std::size_t i = 0; i < d; ++i) count *= p;
        for (std::uint64_t c = 0; c < count; ++c) {
            Poly f(d + 1, 0);
            std::uint64_t x = c;
            for (std::size_t i = 0; i < d; ++i) {
                f[i] = static_cast<std::uint32_t>(x % p);
                x /= p;
            }
            f[d] = 1;
            if (poly_mod(m, f, p).empty()) return false;
        }
    }
    return true;
}

struct FieldData {
    std::uint32_t p = 2;
    std::uint32_t k = 1;
    std::uint32_t q = 2;
    Poly modulus;  // monic, length k+1
    bool involution = false;

    // Full tables for q <= kTableLimit; log/exp tables up to kLogLimit.
    static constexpr std::uint32_t kTableLimit = 512;
    static constexpr std::uint32_t kLogLimit = 1u << 20;
    std::vector<std::uint32_t> add_tab, mul_tab;
    std::vector<std::uint32_t> neg_tab, inv_tab, conj_tab;
    std::vector<std::uint32_t> log_tab, exp_tab;

    Poly decode(std::uint32_t c) const {
        Poly out(k, 0);
        for (std::uint32_t i = 0; i < k; ++i) {
            out[i] = c % p;
            c /= p;
        }
        return out;
    }

    std::uint32_t encode(const Poly& a) const {
        std::uint32_t c = 0;
        for (std::size_t i = a.size(); i-- > 0;) c = c * p + a[i];
        return c;
    }

    std::uint32_t slow_add(std::uint32_t a, std::uint32_t b) const {
        if (k == 1) return (a + b) % p;
        std::uint32_t out = 0, scale = 1;
        for (std::uint32_t i = 0; i < k; ++i) {
            out += ((a % p + b % p) % p) * scale;
            a /= p;
            b /= p;
            scale *= p;
        }
        return out;
    }

    std::uint32_t slow_neg(std::uint32_t a) const {
        std::uint32_t out = 0, scale = 1;
        for (std::uint32_t i = 0; i < k; ++i) {
            out += ((p - a % p) % p) * scale;
            a /= p;
            scale *= p;
        }
        return out;
    }

    std::uint32_t slow_mul(std::uint32_t a, std::uint32_t b) const {
        if (k == 1) return static_cast<std::uint32_t>((std::uint64_t{a} * b) % p);
        auto x = decode(a), y = decode(b);
        Poly prod(2 * k - 1, 0);
        for (std::uint32_t i = 0; i < k; ++i)
            for (std::uint32_t j = 0; j < k; ++j)
                prod[i + j] = static_cast<std::uint32_t>((prod[i + j] + std::uint64_t{x[i]} * y[j]) % p);
        auto r = poly_mod(prod, modulus, p);
        r.resize(k, 0);
        return encode(r);
    }

    std::uint32_t slow_pow(std::uint32_t a, std::uint64_t e) const {
        std::uint32_t r = 1;
        while (e) {
            if (e & 1) r = slow_mul(r, a);
            a = slow_mul(a, a);
            e >>= 1;
        }
        return r;
    }

    void build() {
        q = 1;
        for (std::uint32_t i = 0; i < k; ++i) q *= p;
        if (q <= kLogLimit) {
            // Find a primitive element by brute force; the group is cyclic of order q-1.
            log_tab.assign(q, 0);
            exp_tab.assign(2 * (q - 1), 0);
            for (std::uint32_t g = 1; g < q; ++g) {
                std::uint32_t x = 1, ord = 0;
                do {
                    x = slow_mul(x, g);
                    ++ord;
                } while (x != 1 && ord < q);
                if (ord != q - 1) continue;
                x = 1;
                for (std::uint32_t i = 0; i < q - 1; ++i) {
                    exp_tab[i] = exp_tab[i + q - 1] = x;
                    log_tab[x] = i;
                    x = slow_mul(x, g);
                }
                break;
            }
        }
        if (q <= kTableLimit) {
            add_tab.resize(std::size_t{q} * q);
            mul_tab.resize(std::size_t{q} * q);
            for (std::uint32_t a = 0; a < q; ++a)
                for (std::uint32_t b = 0; b < q; ++b) {
                    add_tab[a * q + b] = slow_add(a, b);
                    mul_tab[a * q + b] = fast_mul_nolut(a, b);
                }
        }
        if (q <= kLogLimit) {
            neg_tab.resize(q);
            inv_tab.assign(q, 0);
            conj_tab.resize(q);
            for (std::uint32_t a = 0; a < q; ++a) {
                neg_tab[a] = slow_neg(a);
                if (a != 0) inv_tab[a] = exp_tab[(q - 1 - log_tab[a]) % (q - 1)];
                conj_tab[a] = involution ? slow_pow(a, half_frobenius_exponent()) : a;
            }
        }
    }

    std::uint64_t half_frobenius_exponent() const {
        std::uint64_t e = 1;
        for (std::uint32_t i = 0; i < k / 2; ++i) e *= p;
        return e;
    }

    std::uint32_t fast_mul_nolut(std::uint32_t a, std::uint32_t b) const {
        if (a == 0 || b == 0) return 0;
        if (!log_tab.empty()) return exp_tab[log_tab[a] + log_tab[b]];
        return slow_mul(a, b);
    }
};

}  // namespace detail

/// GF(p^k) with p <= 97 prime and k <= 4, optionally carrying the order-two
/// involution x -> x^(p^(k/2)) (only for even k). Cheap to copy; all copies
/// share one immutable table set.
class Field {
public:
    static constexpr std::uint32_t kMaxPrime = 97;
    static constexpr std::uint32_t kMaxDegree = 4;

    Field() : Field(binary()) {}

    static Field prime(std::uint32_t p) { return extension(p, 1); }

    static const Field& binary() {
        static const Field f = prime(2);
        return f;
    }

    /// Extension with the lexicographically smallest monic irreducible modulus,
    /// coefficients compared low degree first. The involution is enabled for
    /// even degree.
    static Field extension(std::uint32_t p, std::uint32_t k) {
        check_params(p, k);
        std::uint64_t count = 1;
        for (std::uint32_t i = 0; i < k; ++i) count *= p;
        // c0 is the most significant digit of the enumeration counter.
        for (std::uint64_t c = 0; c < count; ++c) {
            detail::Poly m(k + 1, 0);
            std::uint64_t x = c;
            for (std::uint32_t i = k; i-- > 0;) {
                m[i] = static_cast<std::uint32_t>(x % p);
                x /= p;
            }
            m[k] = 1;
            if (detail::is_irreducible(m, p)) return Field(p, k, std::move(m), k % 2 == 0);
        }
        throw InvalidField("no irreducible polynomial found");
    }

    /// Explicit modulus, coefficients c0..ck (must be monic and irreducible).
    static Field with_modulus(std::uint32_t p, std::vector<std::uint32_t> modulus, bool involution) {
        if (modulus.size() < 2) throw InvalidField("modulus must have degree >= 1");
        const auto k = static_cast<std::uint32_t>(modulus.size() - 1);
        check_params(p, k);
        for (auto c : modulus)
            if (c >= p) throw InvalidField("modulus coefficient out of range");
        if (modulus.back() != 1) throw InvalidField("modulus must be monic");
        if (!detail::is_irreducible(modulus, p)) throw InvalidField("modulus is reducible");
        if (involution && k % 2 != 0) throw InvalidField("involution requires even degree");
        return Field(p, k, std::move(modulus), involution);
    }

    /// "p", "p^k" or "p^k:c0,c1,...,ck".
    static Field parse(std::string_view text) {
        auto s = detail::trim(text);
        std::string_view head = s, tail;
        if (auto colon = s.find(':'); colon != std::string_view::npos) {
            head = s.substr(0, colon);
            tail = s.substr(colon + 1);
        }
        std::uint32_t p = 0, k = 1;
        if (auto caret = head.find('^'); caret != std::string_view::npos) {
            p = to_u32(head.substr(0, caret));
            k = to_u32(head.substr(caret + 1));
        } else {
            p = to_u32(head);
        }
        if (tail.empty()) {
            if (s.find(':') != std::string_view::npos) throw ParseError("empty modulus in field spec");
            return extension(p, k);
        }
        std::vector<std::uint32_t> coeffs;
        while (!tail.empty()) {
            auto comma = tail.find(',');
            coeffs.push_back(to_u32(tail.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            tail.remove_prefix(comma + 1);
        }
        if (coeffs.size() != k + 1) throw ParseError("modulus length does not match degree");
        return with_modulus(p, std::move(coeffs), k % 2 == 0);
    }

    Field with_involution(bool enabled) const {
        if (enabled == d_->involution) return *this;
        if (enabled && d_->k % 2 != 0) throw InvalidField("involution requires even degree");
        return Field(d_->p, d_->k, d_->modulus, enabled);
    }

    std::uint32_t characteristic() const noexcept { return d_->p; }
    std::uint32_t degree() const noexcept { return d_->k; }
    std::uint32_t order() const noexcept { return d_->q; }
    const std::vector<std::uint32_t>& modulus() const noexcept { return d_->modulus; }
    bool involution_enabled() const noexcept { return d_->involution; }

    std::string spec() const {
        std::string s = std::to_string(d_->p);
        if (d_->k > 1) {
            s += "^" + std::to_string(d_->k) + ":";
            for (std::size_t i = 0; i < d_->modulus.size(); ++i)
                s += (i ? "," : "") + std::to_string(d_->modulus[i]);
        }
        return s;
    }

    FieldElement zero() const noexcept { return {0}; }
    FieldElement one() const noexcept { return {1}; }

    FieldElement element(std::uint32_t code) const {
        if (code >= d_->q) throw OutOfRange("element code out of range");
        return {code};
    }

    /// The image of the integer n under Z -> GF(p) -> GF(p^k).
    FieldElement from_integer(std::int64_t n) const {
        const auto p = static_cast<std::int64_t>(d_->p);
        return {static_cast<std::uint32_t>(((n % p) + p) % p)};
    }

    FieldElement add(FieldElement a, FieldElement b) const noexcept {
        if (!d_->add_tab.empty()) return {d_->add_tab[a.code * d_->q + b.code]};
        return {d_->slow_add(a.code, b.code)};
    }

    FieldElement neg(FieldElement a) const noexcept {
        if (!d_->neg_tab.empty()) return {d_->neg_tab[a.code]};
        return {d_->slow_neg(a.code)};
    }

    FieldElement sub(FieldElement a, FieldElement b) const noexcept { return add(a, neg(b)); }

    FieldElement mul(FieldElement a, FieldElement b) const noexcept {
        if (!d_->mul_tab.empty()) return {d_->mul_tab[a.code * d_->q + b.code]};
        return {d_->fast_mul_nolut(a.code, b.code)};
    }

    FieldElement inv(FieldElement a) const {
        if (a.code == 0) throw DivisionByZero("inverse of zero");
        if (!d_->inv_tab.empty()) return {d_->inv_tab[a.code]};
        return {d_->slow_pow(a.code, std::uint64_t{d_->q} - 2)};
    }

    FieldElement div(FieldElement a, FieldElement b) const { return mul(a, inv(b)); }

    FieldElement pow(FieldElement a, std::int64_t e) const {
        if (e < 0) return pow(inv(a), -e);
        return {d_->slow_pow(a.code, static_cast<std::uint64_t>(e))};
    }

    /// The field involution, or the identity when it is disabled.
    FieldElement conj(FieldElement a) const noexcept {
        if (!d_->involution) return a;
        if (!d_->conj_tab.empty()) return {d_->conj_tab[a.code]};
        return {d_->slow_pow(a.code, d_->half_frobenius_exponent())};
    }

    std::vector<std::uint32_t> coefficients(FieldElement a) const { return d_->decode(a.code); }

    FieldElement from_coefficients(const std::vector<std::uint32_t>& c) const {
        if (c.size() != d_->k) throw ParseError("wrong number of coefficients");
        for (auto x : c)
            if (x >= d_->p) throw ParseError("coefficient out of range");
        return {d_->encode(c)};
    }

    /// Integer for prime fields, "[c0,...,c_{k-1}]" otherwise.
    std::string format(FieldElement a) const {
        if (d_->k == 1) return std::to_string(a.code);
        auto c = coefficients(a);
        std::string s = "[";
        for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
        return s + "]";
    }

    FieldElement parse_element(std::string_view text) const {
        auto s = detail::trim(text);
        if (!s.empty() && s.front() == '[') {
            if (s.back() != ']') throw ParseError("unterminated element '" + std::string(s) + "'");
            s = s.substr(1, s.size() - 2);
            std::vector<std::uint32_t> c;
            while (true) {
                auto comma = s.find(',');
                c.push_back(to_u32(s.substr(0, comma)));
                if (comma == std::string_view::npos) break;
                s.remove_prefix(comma + 1);
            }
            return from_coefficients(c);
        }
        auto v = detail::parse_int(s);
        if (d_->k == 1) {
            if (v < 0 || v >= static_cast<std::int64_t>(d_->p))
                throw ParseError("element out of range '" + std::string(s) + "'");
            return {static_cast<std::uint32_t>(v)};
        }
        // A bare integer in an extension field denotes a prime-field element.
        if (v < 0 || v >= static_cast<std::int64_t>(d_->p))
            throw ParseError("element out of range '" + std::string(s) + "'");
        return {static_cast<std::uint32_t>(v)};
    }

    bool is_zero(FieldElement a) const noexcept { return a.code == 0; }

    friend bool operator==(const Field& a, const Field& b) noexcept {
        return a.d_ == b.d_ || (a.d_->p == b.d_->p && a.d_->modulus == b.d_->modulus &&
                                a.d_->involution == b.d_->involution);
    }

private:
    Field(std::uint32_t p, std::uint32_t k, std::vector<std::uint32_t> modulus, bool involution) {
        auto d = std::make_shared<detail::FieldData>();
        d->p = p;
        d->k = k;
        d->modulus = std::move(modulus);
        d->involution = involution;
        d->build();
        d_ = std::move(d);
    }

    static void check_params(std::uint32_t p, std::uint32_t k) {
        if (!detail::is_prime(p)) throw InvalidField(std::to_string(p) + " is not prime");
        if (p > kMaxPrime) throw InvalidField("characteristic above " + std::to_string(kMaxPrime));
        if (k < 1 || k > kMaxDegree) throw InvalidField("degree must be in [1, 4]");
    }

    static std::uint32_t to_u32(std::string_view s) {
        auto v = detail::parse_int(detail::trim(s));
        if (v < 0 || v > UINT32_MAX) throw ParseError("value out of range '" + std::string(s) + "'");
        return static_cast<std::uint32_t>(v);
    }

    std::shared_ptr<const detail::FieldData> d_;
};

}  // namespace ultrageo
