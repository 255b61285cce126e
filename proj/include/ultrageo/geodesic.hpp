#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "linear_split.hpp"
#include "perm_split.hpp"
#include "permutation.hpp"
#include "rational.hpp"

namespace ultrageo {

enum class MetricKind { hamming, rank, projective_rank };

inline std::string_view metric_name(MetricKind k) {
    switch (k) {
        case MetricKind::hamming: return "hamming";
        case MetricKind::rank: return "rank";
        case MetricKind::projective_rank: return "projective-rank";
    }
    return "?";
}

inline MetricKind parse_metric(std::string_view s) {
    for (auto k : {MetricKind::hamming, MetricKind::rank, MetricKind::projective_rank})
        if (s == metric_name(k)) return k;
    if (s == "psl" || s == "projective") return MetricKind::projective_rank;
    throw ParseError("unknown metric '" + std::string(s) + "'");
}

/// A metric on A_n (Hamming) or SL_n (rank, projective rank) together with
/// the additive error of its midpoint oracle.
struct MetricGroupContext {
    MetricKind kind = MetricKind::hamming;
    std::size_t n = 0;
    Rational epsilon;

    static MetricGroupContext hamming(std::size_t n) {
        if (n == 0) throw OutOfRange("degree must be positive");
        return {MetricKind::hamming, n, Rational(3, 2 * static_cast<std::int64_t>(n))};
    }
    static MetricGroupContext rank(std::size_t n) {
        if (n == 0) throw OutOfRange("degree must be positive");
        return {MetricKind::rank, n, Rational(3, static_cast<std::int64_t>(n))};
    }
    static MetricGroupContext projective_rank(std::size_t n) {
        if (n == 0) throw OutOfRange("degree must be positive");
        return {MetricKind::projective_rank, n, Rational(3, static_cast<std::int64_t>(n))};
    }

    Rational distance(const Permutation& x, const Permutation& y) const {
        require(MetricKind::hamming, x.size());
        return hamming_distance(x, y);
    }
    Rational distance(const Matrix& x, const Matrix& y) const {
        require_matrix(x);
        return kind == MetricKind::rank ? rank_distance(x, y) : projective_rank_distance(x, y);
    }

    Permutation midpoint(const Permutation& x, const Permutation& y) const {
        require(MetricKind::hamming, x.size());
        return midpoint_perm(x, y);
    }
    Matrix midpoint(const Matrix& x, const Matrix& y) const {
        require_matrix(x);
        if (kind == MetricKind::projective_rank) return midpoint_psl(x, y);
        const auto& f = x.field();
        if (det(x) != f.one() || det(y) != f.one()) throw NotSpecialLinear("midpoint endpoints must lie in SL_n");
        const Matrix g = inverse(x) * y;
        const auto r = static_cast<std::int64_t>(ultrageo::rank(g - Matrix::identity(f, n)));
        return x * split_sl(g, f.one(), Rational(r, 2)).h;
    }

private:
    void require(MetricKind k, std::size_t size) const {
        if (kind != k) throw ShapeMismatch("element kind does not match the metric");
        if (size != n) throw ShapeMismatch("element degree does not match the context");
    }
    void require_matrix(const Matrix& x) const {
        if (kind == MetricKind::hamming) throw ShapeMismatch("element kind does not match the metric");
        if (!x.is_square() || x.rows() != n) throw ShapeMismatch("element degree does not match the context");
    }
};

/// Points p(m / 2^K) for m = 0..2^K.
template <class Element>
struct DyadicPath {
    std::size_t depth = 0;
    std::vector<Element> points;

    std::size_t size() const noexcept { return points.size(); }
    Rational lambda(std::size_t i) const {
        return Rational(static_cast<std::int64_t>(i), std::int64_t{1} << depth);
    }
    /// k with lambda(i) = odd / 2^k; endpoints have level 0.
    std::size_t level(std::size_t i) const {
        if (i == 0 || i + 1 == points.size()) return 0;
        std::size_t k = depth;
        while (i % 2 == 0) {
            i /= 2;
            --k;
        }
        return k;
    }
};

/// Breadth-first dyadic recursion: level k fills the odd multiples of 2^-k
/// from the oracle on (left neighbour, right neighbour).
template <class Element>
DyadicPath<Element> dyadic_path(const MetricGroupContext& ctx, const Element& x, const Element& y, std::size_t depth) {
    if (depth > 20) throw OutOfRange("path depth is limited to 20");
    (void)ctx.distance(x, y);
    const std::size_t count = (std::size_t{1} << depth) + 1;
    DyadicPath<Element> path{depth, std::vector<Element>(count, x)};
    path.points.back() = y;
    for (std::size_t k = 1; k <= depth; ++k) {
        const std::size_t step = std::size_t{1} << (depth - k);
        for (std::size_t i = step; i < count; i += 2 * step)
            path.points[i] = ctx.midpoint(path.points[i - step], path.points[i + step]);
    }
    return path;
}

struct DeviationReport {
    Rational max_deviation;
    std::size_t pair_violations = 0;  // pairs exceeding (k + k') epsilon
    std::size_t pairs = 0;
};

/// |d(p(l), p(l')) - |l - l'| d(x, y)| over all point pairs, with the
/// per-pair (k + k') epsilon check.
template <class Element>
DeviationReport deviation_report(const MetricGroupContext& ctx, const DyadicPath<Element>& path) {
    DeviationReport out{Rational(0), 0, 0};
    if (path.points.size() < 2) return out;
    const Rational ell = ctx.distance(path.points.front(), path.points.back());
    for (std::size_t i = 0; i < path.size(); ++i)
        for (std::size_t j = i + 1; j < path.size(); ++j) {
            const Rational dev = abs(ctx.distance(path.points[i], path.points[j]) - (path.lambda(j) - path.lambda(i)) * ell);
            out.max_deviation = std::max(out.max_deviation, dev);
            const auto bound = Rational(static_cast<std::int64_t>(path.level(i) + path.level(j))) * ctx.epsilon;
            if (dev > bound) ++out.pair_violations;
            ++out.pairs;
        }
    return out;
}

template <class Element>
Rational path_deviation(const MetricGroupContext& ctx, const DyadicPath<Element>& path) {
    return deviation_report(ctx, path).max_deviation;
}

/// (d(x,y)/2 + eps - d(x,z), d(x,y)/2 + eps - d(z,y)); both are >= 0 for a
/// valid midpoint.
template <class Element>
std::pair<Rational, Rational> halfdistance_certificate(const MetricGroupContext& ctx, const Element& x, const Element& y,
                                                       const Element& z) {
    const Rational budget = ctx.distance(x, y) / 2 + ctx.epsilon;
    return {budget - ctx.distance(x, z), budget - ctx.distance(z, y)};
}

}  // namespace ultrageo
