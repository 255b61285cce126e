#pragma once

// Brute-force oracles for the tests. They deliberately avoid the library's
// elimination routines.

#include <ultrageo/field.hpp>
#include <ultrageo/matrix.hpp>
#include <ultrageo/permutation.hpp>
#include <ultrageo/random.hpp>
#include <ultrageo/sampling.hpp>

#include <set>
#include <vector>

namespace ultrageo::testing {

/// Rank from the size of the row space: |span| = q^rank, by enumeration.
inline std::size_t brute_force_rank(const Matrix& m) {
    const auto& f = m.field();
    std::uint64_t combos = 1;
    for (std::size_t i = 0; i < m.rows(); ++i) combos *= f.order();
    std::set<std::vector<std::uint32_t>> span;
    for (std::uint64_t c = 0; c < combos; ++c) {
        std::vector<std::uint32_t> v(m.cols(), 0);
        std::uint64_t x = c;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            FieldElement coef{static_cast<std::uint32_t>(x % f.order())};
            x /= f.order();
            for (std::size_t j = 0; j < m.cols(); ++j) v[j] = f.add(FieldElement{v[j]}, f.mul(coef, m(i, j))).code;
        }
        span.insert(v);
    }
    std::size_t r = 0;
    for (std::uint64_t s = 1; s < span.size(); s *= f.order()) ++r;
    return r;
}

/// dim ker(m) by counting solutions of m v = 0 over all vectors.
inline std::size_t brute_force_nullity(const Matrix& m) {
    const auto& f = m.field();
    std::uint64_t total = 1;
    for (std::size_t j = 0; j < m.cols(); ++j) total *= f.order();
    std::uint64_t zeros = 0;
    for (std::uint64_t c = 0; c < total; ++c) {
        std::vector<FieldElement> v(m.cols());
        std::uint64_t x = c;
        for (auto& e : v) {
            e = FieldElement{static_cast<std::uint32_t>(x % f.order())};
            x /= f.order();
        }
        bool ok = true;
        for (std::size_t i = 0; i < m.rows() && ok; ++i) {
            FieldElement s = f.zero();
            for (std::size_t j = 0; j < m.cols(); ++j) s = f.add(s, f.mul(m(i, j), v[j]));
            ok = s.code == 0;
        }
        zeros += ok;
    }
    std::size_t d = 0;
    for (std::uint64_t s = 1; s < zeros; s *= f.order()) ++d;
    return d;
}

/// Leibniz expansion; fine for n <= 6.
inline FieldElement leibniz_det(const Matrix& m) {
    const auto& f = m.field();
    const std::size_t n = m.rows();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    FieldElement total = f.zero();
    do {
        std::size_t inversions = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
        FieldElement term = f.one();
        for (std::size_t i = 0; i < n; ++i) term = f.mul(term, m(i, perm[i]));
        total = inversions % 2 ? f.sub(total, term) : f.add(total, term);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

/// Every nonzero scalar in the field.
inline std::vector<FieldElement> nonzero_elements(const Field& f) {
    std::vector<FieldElement> out;
    for (std::uint32_t c = 1; c < f.order(); ++c) out.push_back(FieldElement{c});
    return out;
}

}  // namespace ultrageo::testing
