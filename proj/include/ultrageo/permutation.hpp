#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "rational.hpp"

namespace ultrageo {

/// One cycle (a1 a2 ... am): a1 -> a2 -> ... -> am -> a1. Points are 0-indexed.
using Cycle = std::vector<std::uint32_t>;

/// Permutation of {0, ..., n-1} stored as its image array.
///
/// Products compose left to right: (s * t)(i) = t(s(i)).
class Permutation {
public:
    Permutation() = default;

    explicit Permutation(std::size_t n) : images_(n) { std::iota(images_.begin(), images_.end(), 0u); }

    explicit Permutation(std::vector<std::uint32_t> images) : images_(std::move(images)) {
        std::vector<bool> seen(images_.size(), false);
        for (auto v : images_) {
            if (v >= images_.size() || seen[v]) throw ParseError("image list is not a bijection");
            seen[v] = true;
        }
    }

    /// Product of the given cycles; each must be disjoint from the others.
    static Permutation from_cycles(std::size_t n, const std::vector<Cycle>& cycles) {
        std::vector<std::uint32_t> img(n);
        std::iota(img.begin(), img.end(), 0u);
        std::vector<bool> used(n, false);
        for (const auto& c : cycles) {
            for (std::size_t i = 0; i < c.size(); ++i) {
                if (c[i] >= n) throw OutOfRange("cycle point out of range");
                if (used[c[i]]) throw ParseError("cycles are not disjoint");
                used[c[i]] = true;
                img[c[i]] = c[(i + 1) % c.size()];
            }
        }
        return Permutation(std::move(img));
    }

    std::size_t size() const noexcept { return images_.size(); }
    std::uint32_t operator[](std::size_t i) const noexcept { return images_[i]; }
    const std::vector<std::uint32_t>& images() const noexcept { return images_; }

    Permutation inverse() const {
        std::vector<std::uint32_t> inv(images_.size());
        for (std::uint32_t i = 0; i < images_.size(); ++i) inv[images_[i]] = i;
        return Permutation(std::move(inv), Unchecked{});
    }

    friend Permutation operator*(const Permutation& s, const Permutation& t) {
        if (s.size() != t.size()) throw ShapeMismatch("permutation degree mismatch");
        std::vector<std::uint32_t> out(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) out[i] = t.images_[s.images_[i]];
        return Permutation(std::move(out), Unchecked{});
    }

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    struct Unchecked {};
    Permutation(std::vector<std::uint32_t> images, Unchecked) : images_(std::move(images)) {}

    std::vector<std::uint32_t> images_;
};

/// Disjoint cycles of length >= 2, each starting at its smallest point,
/// listed by smallest point.
struct CycleDecomposition {
    std::vector<Cycle> cycles;
};

inline CycleDecomposition cycles(const Permutation& g) {
    CycleDecomposition out;
    std::vector<bool> seen(g.size(), false);
    for (std::uint32_t i = 0; i < g.size(); ++i) {
        if (seen[i] || g[i] == i) continue;
        Cycle c;
        for (std::uint32_t j = i; !seen[j]; j = g[j]) {
            seen[j] = true;
            c.push_back(j);
        }
        out.cycles.push_back(std::move(c));
    }
    return out;
}

/// Number of points moved.
inline std::size_t support_count(const Permutation& g) {
    std::size_t mu = 0;
    for (std::uint32_t i = 0; i < g.size(); ++i) mu += g[i] != i;
    return mu;
}

/// Parity read off the cycle decomposition: (moved points - cycles) mod 2.
inline bool is_even(const Permutation& g) {
    const auto dec = cycles(g);
    std::size_t mu = 0;
    for (const auto& c : dec.cycles) mu += c.size();
    return (mu - dec.cycles.size()) % 2 == 0;
}

/// Normalized Hamming distance mu(s^-1 t) / n.
inline Rational hamming_distance(const Permutation& s, const Permutation& t) {
    if (s.size() != t.size()) throw ShapeMismatch("permutation degree mismatch");
    if (s.size() == 0) return Rational(0);
    std::int64_t differ = 0;
    const auto& a = s.images();
    const auto& b = t.images();
    for (std::size_t i = 0; i < a.size(); ++i) differ += a[i] != b[i];
    return Rational(differ, static_cast<std::int64_t>(s.size()));
}

/// One-line 1-indexed image list, e.g. "2 3 1 5 4".
inline std::string format(const Permutation& g) {
    std::string s;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(g[i] + 1);
    }
    return s;
}

inline std::string format_cycles(const Permutation& g) {
    std::string s;
    for (const auto& c : cycles(g).cycles) {
        s += '(';
        for (std::size_t i = 0; i < c.size(); ++i) s += (i ? " " : "") + std::to_string(c[i] + 1);
        s += ')';
    }
    return s.empty() ? "()" : s;
}

/// Parses one-line image lists or cycle notation ("(1 2 3)(4 5)"), 1-indexed.
/// `n` fixes the degree for cycle notation; 0 infers it from the largest point.
inline Permutation parse_permutation(std::string_view text, std::size_t n = 0) {
    auto s = detail::trim(text);
    auto read_numbers = [](std::string_view body) {
        std::vector<std::int64_t> nums;
        std::size_t i = 0;
        while (i < body.size()) {
            while (i < body.size() && (body[i] == ' ' || body[i] == ',' || body[i] == '\t')) ++i;
            std::size_t j = i;
            while (j < body.size() && body[j] != ' ' && body[j] != ',' && body[j] != '\t') ++j;
            if (j > i) nums.push_back(detail::parse_int(body.substr(i, j - i)));
            i = j;
        }
        return nums;
    };
    if (s.empty() || s.front() == '(') {
        std::vector<Cycle> cyc;
        std::size_t max_point = 0;
        std::size_t i = 0;
        while (i < s.size()) {
            if (s[i] == ' ') {
                ++i;
                continue;
            }
            if (s[i] != '(') throw ParseError("expected '(' in cycle notation");
            auto close = s.find(')', i);
            if (close == std::string_view::npos) throw ParseError("unterminated cycle");
            Cycle c;
            for (auto v : read_numbers(s.substr(i + 1, close - i - 1))) {
                if (v < 1) throw ParseError("cycle points are 1-indexed");
                c.push_back(static_cast<std::uint32_t>(v - 1));
                max_point = std::max<std::size_t>(max_point, static_cast<std::size_t>(v));
            }
            if (c.size() >= 2) cyc.push_back(std::move(c));
            i = close + 1;
        }
        if (n == 0) n = max_point;
        if (max_point > n) throw OutOfRange("cycle point exceeds degree");
        std::vector<std::uint32_t> img(n);
        std::iota(img.begin(), img.end(), 0u);
        // Cycles given in notation need not be disjoint; compose them left to right.
        Permutation g(std::move(img));
        for (const auto& c : cyc) g = g * Permutation::from_cycles(n, {c});
        return g;
    }
    auto nums = read_numbers(s);
    if (n != 0 && nums.size() != n) throw ParseError("image list length does not match degree");
    std::vector<std::uint32_t> img;
    img.reserve(nums.size());
    for (auto v : nums) {
        if (v < 1 || static_cast<std::size_t>(v) > nums.size()) throw ParseError("image out of range");
        img.push_back(static_cast<std::uint32_t>(v - 1));
    }
    return Permutation(std::move(img));
}

}  // namespace ultrageo
