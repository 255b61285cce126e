#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "error.hpp"
#include "permutation.hpp"
#include "rational.hpp"

namespace ultrageo {

/// Writes the cycle pi = (a1 ... am) as lambda * rho with
/// lambda = (a1 ... al) and rho = (a1 a_{l+1} ... am); 1 < l < m.
inline std::pair<Cycle, Cycle> split_cycle(const Cycle& pi, std::size_t l) {
    if (l <= 1 || l >= pi.size()) throw OutOfRange("split length must satisfy 1 < l < cycle length");
    Cycle lambda(pi.begin(), pi.begin() + static_cast<std::ptrdiff_t>(l));
    Cycle rho;
    rho.reserve(pi.size() - l + 1);
    rho.push_back(pi.front());
    rho.insert(rho.end(), pi.begin() + static_cast<std::ptrdiff_t>(l), pi.end());
    return {std::move(lambda), std::move(rho)};
}

struct PermSplit {
    Permutation h;
    Permutation k;
};

namespace detail {

/// A greedy packing unit: an odd cycle, or two even cycles (longer first).
struct PermUnit {
    std::vector<Cycle> parts;
    std::size_t size = 0;
};

inline std::vector<PermUnit> packing_units(const Permutation& g) {
    auto cyc = cycles(g).cycles;
    std::stable_sort(cyc.begin(), cyc.end(), [](const Cycle& a, const Cycle& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.front() < b.front();
    });
    std::vector<PermUnit> units;
    const Cycle* pending = nullptr;
    for (const auto& c : cyc) {
        if (c.size() % 2 == 1) {
            units.push_back({{c}, c.size()});
        } else if (!pending) {
            pending = &c;
        } else {
            // Decreasing order puts the longer (or earlier) cycle first.
            units.push_back({{*pending, c}, c.size() + pending->size()});
            pending = nullptr;
        }
    }
    if (pending) throw ParityError("permutation is odd");
    return units;
}

/// Smallest odd integer >= x.
inline std::size_t odd_ceiling(const Rational& x) {
    std::int64_t v = ceil(x);
    if (v % 2 == 0) ++v;
    return static_cast<std::size_t>(std::max<std::int64_t>(v, 1));
}

}  // namespace detail

/// Factors an even permutation g as h * k with h, k even,
/// |mu_h - t mu_g| <= 3/2 and |mu_k - (1-t) mu_g| <= 3/2.
///
/// Cycles are packed into h in decreasing length (ties: smallest point) until
/// the next unit overflows t mu_g; later units go to k, and the single
/// overflowing unit is divided between them.
inline PermSplit split_even(const Permutation& g, const Rational& t) {
    if (t < 0 || t > 1) throw OutOfRange("t must lie in [0, 1]");
    const auto units = detail::packing_units(g);
    const std::size_t n = g.size();
    const auto mu_g = static_cast<std::int64_t>(support_count(g));
    const Rational target = t * mu_g;
    const Rational three_halves(3, 2);

    std::vector<Cycle> h_cycles, k_cycles;
    std::int64_t packed = 0;
    std::size_t idx = 0;
    for (; idx < units.size(); ++idx) {
        if (Rational(packed + static_cast<std::int64_t>(units[idx].size)) > target) break;
        packed += static_cast<std::int64_t>(units[idx].size);
        for (const auto& c : units[idx].parts) h_cycles.push_back(c);
    }
    if (idx < units.size()) {
        const auto& u = units[idx];
        for (std::size_t j = idx + 1; j < units.size(); ++j)
            for (const auto& c : units[j].parts) k_cycles.push_back(c);
        const Rational r1 = target - packed;
        const Rational r2 = Rational(static_cast<std::int64_t>(u.size)) - r1;
        auto give = [&](std::vector<Cycle>& side) {
            for (const auto& c : u.parts) side.push_back(c);
        };
        if (r1 <= three_halves) {
            give(k_cycles);
        } else if (r2 <= three_halves) {
            give(h_cycles);
        } else if (u.parts.size() == 1) {
            const std::size_t l = detail::odd_ceiling(r1 - Rational(1, 2));
            auto [lambda, rho] = split_cycle(u.parts[0], l);
            h_cycles.push_back(std::move(lambda));
            k_cycles.push_back(std::move(rho));
        } else {
            const Cycle& longer = u.parts[0];
            const Cycle& shorter = u.parts[1];
            const bool h_is_larger = r1 >= r2;
            const Rational r_small = h_is_larger ? r2 : r1;
            const std::size_t b = longer.size();
            const std::size_t l_small = detail::odd_ceiling(r_small - Rational(1, 2));
            if (l_small + 1 <= b) {
                // Shorter cycle whole to the larger budget; longer cycle split so the
                // smaller side receives an odd-length piece.
                const std::size_t l_first = h_is_larger ? b - l_small + 1 : l_small;
                auto [lambda, rho] = split_cycle(longer, l_first);
                (h_is_larger ? h_cycles : k_cycles).push_back(shorter);
                h_cycles.push_back(std::move(lambda));
                k_cycles.push_back(std::move(rho));
            } else {
                // Equal even lengths with an almost even budget: (x1..xa)(y1..yb) equals
                // (x1 .. xa y1) * (x1 y2 .. yb y1), two odd cycles sharing x1 and y1.
                Cycle first(shorter);
                first.push_back(longer.front());
                Cycle second;
                second.push_back(shorter.front());
                second.insert(second.end(), longer.begin() + 1, longer.end());
                second.push_back(longer.front());
                h_cycles.push_back(std::move(first));
                k_cycles.push_back(std::move(second));
            }
        }
    }

    PermSplit out{Permutation::from_cycles(n, h_cycles), Permutation::from_cycles(n, k_cycles)};
    const auto mu_h = static_cast<std::int64_t>(support_count(out.h));
    const auto mu_k = static_cast<std::int64_t>(support_count(out.k));
    if (!(out.h * out.k == g) || !is_even(out.h) || !is_even(out.k) ||
        abs(Rational(mu_h) - target) > three_halves || abs(Rational(mu_k) - (mu_g - target)) > three_halves)
        throw InvariantViolation("split_even produced an output outside its contract");
    return out;
}

/// z = x * h with (h, k) = split_even(x^-1 y, 1/2); both d(x,z) and d(z,y)
/// are at most d(x,y)/2 + 3/(2n).
inline Permutation midpoint_perm(const Permutation& x, const Permutation& y) {
    if (x.size() != y.size()) throw ShapeMismatch("permutation degree mismatch");
    if (!is_even(x) || !is_even(y)) throw ParityError("midpoint endpoints must be even");
    const auto split = split_even(x.inverse() * y, Rational(1, 2));
    return x * split.h;
}

}  // namespace ultrageo
