#pragma once

// Random instance generators shared by the verification suites.

#include <numeric>
#include <vector>

#include "field.hpp"
#include "matrix.hpp"
#include "permutation.hpp"
#include "random.hpp"

namespace ultrageo {

inline FieldElement random_element(const Field& f, SplitMix64& rng) {
    return FieldElement{static_cast<std::uint32_t>(rng.below(f.order()))};
}

inline FieldElement random_nonzero(const Field& f, SplitMix64& rng) {
    return FieldElement{static_cast<std::uint32_t>(1 + rng.below(f.order() - 1))};
}

inline Matrix random_matrix(const Field& f, std::size_t r, std::size_t c, SplitMix64& rng) {
    return Matrix::generate(f, r, c, [&](std::size_t, std::size_t) { return random_element(f, rng); });
}

inline Matrix random_invertible(const Field& f, std::size_t n, SplitMix64& rng) {
    while (true) {
        auto m = random_matrix(f, n, n, rng);
        if (is_invertible(m)) return m;
    }
}

/// Random element of SL_n: the first row of a random invertible matrix is
/// scaled by det^-1.
inline Matrix random_sl(const Field& f, std::size_t n, SplitMix64& rng) {
    auto m = random_invertible(f, n, rng);
    const auto dinv = f.inv(det(m));
    return Matrix::generate(f, n, n, [&](std::size_t i, std::size_t j) { return i == 0 ? f.mul(dinv, m(i, j)) : m(i, j); });
}

inline Permutation random_permutation(std::size_t n, SplitMix64& rng) {
    std::vector<std::uint32_t> img(n);
    std::iota(img.begin(), img.end(), 0u);
    for (std::size_t i = n; i > 1; --i) std::swap(img[i - 1], img[rng.below(i)]);
    return Permutation(std::move(img));
}

inline Permutation random_even_permutation(std::size_t n, SplitMix64& rng) {
    auto g = random_permutation(n, rng);
    if (!is_even(g)) g = g * Permutation::from_cycles(n, {{0, 1}});
    return g;
}

}  // namespace ultrageo
