#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "field.hpp"
#include "matrix.hpp"
#include "random.hpp"
#include "rational.hpp"

namespace ultrageo {

namespace detail {

inline void require_square_pair(const Matrix& x, const Matrix& y) {
    require_same_field(x, y);
    if (!x.is_square() || x.rows() != y.rows() || x.cols() != y.cols())
        throw ShapeMismatch("metric arguments must be square of equal size");
    if (x.rows() == 0) throw ShapeMismatch("metric on 0x0 matrices is undefined");
}

inline std::size_t rank_minus_scalar(const Matrix& g, FieldElement lambda) {
    return rank(g - Matrix::scalar(g.field(), g.rows(), lambda));
}

}  // namespace detail

/// rk(x - y) / n.
inline Rational rank_distance(const Matrix& x, const Matrix& y) {
    detail::require_square_pair(x, y);
    return Rational(static_cast<std::int64_t>(rank(x - y)), static_cast<std::int64_t>(x.rows()));
}

/// min over nonzero lambda of rk(x - lambda y) / n.
inline Rational projective_rank_distance(const Matrix& x, const Matrix& y) {
    detail::require_square_pair(x, y);
    const auto& f = x.field();
    std::size_t best = x.rows();
    for (std::uint32_t c = 1; c < f.order() && best > 0; ++c) best = std::min(best, rank(x - scale(FieldElement{c}, y)));
    return Rational(static_cast<std::int64_t>(best), static_cast<std::int64_t>(x.rows()));
}

/// A g-invariant cyclic subspace with basis e1, e1(g-1), ..., e1(g-1)^{m-1}.
struct CyclicSummand {
    std::vector<Vector> basis;
    std::size_t dim() const noexcept { return basis.size(); }
};

namespace detail {

/// Orbit v, vg, vg^2, ... up to the first dependency, with the relation
/// v g^m = sum_i coeffs[i] v g^i.
struct Krylov {
    std::vector<Vector> orbit;
    Vector coeffs;
};

inline Krylov krylov(const Matrix& g, const Vector& v) {
    const auto& f = g.field();
    RowSpan span(f, g.cols());
    Krylov out;
    Vector w = v;
    while (span.insert(w)) {
        out.orbit.push_back(w);
        w = w * g;
    }
    out.coeffs = span.reduce(w).second;
    return out;
}

/// p(g) applied to w, where p(x) = x^m - sum coeffs[i] x^i. Also returns
/// the vectors w g^i for i < m.
inline Vector apply_relation(const Matrix& g, const Vector& coeffs, const Vector& w, std::vector<Vector>* powers) {
    const auto& f = g.field();
    Vector acc(w.size(), f.zero()), cur = w;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (powers) powers->push_back(cur);
        acc = axpy(f, acc, f.neg(coeffs[i]), cur);
        cur = cur * g;
    }
    return axpy(f, acc, f.one(), cur);
}

/// Splits a cyclic summand of maximal orbit dimension off the g-invariant
/// subspace spanned by `space`, returning its Krylov data and an invariant
/// complement inside `space`.
inline std::pair<Krylov, std::vector<Vector>> split_max_cyclic(const Matrix& g, const std::vector<Vector>& space,
                                                               SplitMix64& rng) {
    const auto& f = g.field();
    const std::size_t d = space.size();
    std::deque<Vector> queue(space.begin(), space.end());
    std::size_t lower = 0;
    const std::size_t budget = 64 + 4 * d;
    for (std::size_t attempt = 0; attempt < budget; ++attempt) {
        Vector v;
        if (!queue.empty()) {
            v = queue.front();
            queue.pop_front();
        } else {
            v.assign(g.cols(), f.zero());
            for (const auto& b : space) v = axpy(f, v, FieldElement{static_cast<std::uint32_t>(rng.below(f.order()))}, b);
        }
        if (is_zero_vector(v)) continue;
        auto kv = krylov(g, v);
        const std::size_t m = kv.orbit.size();
        if (m < lower) continue;

        // The relation of v must kill all of `space`; ker p(g) is invariant, so
        // it suffices to test generators not yet covered by checked orbits.
        RowSpan covered(f, g.cols());
        for (const auto& o : kv.orbit) covered.insert(o);
        std::optional<Vector> witness;
        for (const auto& b : space) {
            if (covered.dim() == d) break;
            if (covered.contains(b)) continue;
            std::vector<Vector> powers;
            if (!is_zero_vector(apply_relation(g, kv.coeffs, b, &powers))) {
                witness = b;
                break;
            }
            for (const auto& pw : powers) covered.insert(pw);
        }
        if (witness) {
            lower = m + 1;
            queue.push_front(axpy(f, v, f.one(), *witness));
            continue;
        }

        // Functional phi with phi(v g^i) = [i == m-1]; the complement is the
        // common kernel of phi(. g^i) for i < m.
        const Matrix kmat = Matrix::from_rows(f, kv.orbit, g.cols());
        Vector target(m, f.zero());
        target[m - 1] = f.one();
        Vector u = solve_right(kmat, target);
        const Matrix basis = Matrix::from_rows(f, space, g.cols());
        Matrix cond(f, d, 0);
        for (std::size_t i = 0; i < m; ++i) {
            Matrix col = Matrix::generate(f, u.size(), 1, [&](std::size_t r, std::size_t) { return u[r]; });
            cond = hstack(cond, basis * col);
            auto next = g * col;
            for (std::size_t r = 0; r < u.size(); ++r) u[r] = next(r, 0);
        }
        std::vector<Vector> complement;
        for (const auto& c : left_kernel_basis(cond)) complement.push_back(c * basis);
        if (complement.size() + m != d) throw InvariantViolation("cyclic complement has the wrong dimension");
        return {std::move(kv), std::move(complement)};
    }
    throw InvariantViolation("no vector of maximal orbit dimension found");
}

}  // namespace detail

/// Decomposes F^n into cyclic F<g>-submodules. Deterministic: candidates are
/// the current basis vectors first, then combinations from a fixed seed.
inline std::vector<CyclicSummand> cyclic_decomposition(const Matrix& g) {
    if (!g.is_square()) throw ShapeMismatch("cyclic decomposition needs a square matrix");
    if (!is_invertible(g)) throw SingularMatrix("cyclic decomposition needs an invertible matrix");
    const auto& f = g.field();
    const std::size_t n = g.rows();
    const Matrix gm1 = g - Matrix::identity(f, n);
    SplitMix64 rng(0x5eedc7c11cULL);
    std::vector<Vector> space = Matrix::identity(f, n).row_list();
    std::vector<CyclicSummand> out;
    while (!space.empty()) {
        auto [kv, rest] = detail::split_max_cyclic(g, space, rng);
        CyclicSummand s;
        Vector e = kv.orbit.front();
        for (std::size_t i = 0; i < kv.orbit.size(); ++i) {
            s.basis.push_back(e);
            e = e * gm1;
        }
        out.push_back(std::move(s));
        space = std::move(rest);
    }
    return out;
}

/// One level of the split_gl recursion, kept for inspecting slack.
struct SplitStep {
    std::size_t dim = 0;
    std::size_t rank = 0;
    char branch = 'h';  // 'h': whole summand to h; 'k': remainder to k; 'b': cyclic base case
    Rational phi1, phi2;
    Rational slack;
};

struct MatrixSplit {
    Matrix h;
    Matrix k;
    std::vector<SplitStep> trace;
    /// max(|rk(h - lambda) - phi1|, |rk(k - 1) - phi2|)
    Rational slack;
};

namespace detail {

inline Rational rank_slack(std::size_t rh, std::size_t rk, const Rational& phi1, const Rational& phi2) {
    return std::max(abs(Rational(static_cast<std::int64_t>(rh)) - phi1),
                    abs(Rational(static_cast<std::int64_t>(rk)) - phi2));
}

inline void check_split_args(const Matrix& g, FieldElement lambda, const Rational& phi1, std::size_t& r) {
    if (!g.is_square() || g.rows() == 0) throw ShapeMismatch("split needs a nonempty square matrix");
    if (lambda.code == 0) throw OutOfRange("lambda must be nonzero");
    if (lambda.code >= g.field().order()) throw OutOfRange("lambda is not a field element");
    if (!is_invertible(g)) throw SingularMatrix("split needs an invertible matrix");
    r = rank_minus_scalar(g, lambda);
    if (phi1 < 0 || phi1 > static_cast<std::int64_t>(r)) throw OutOfRange("phi1 must lie in [0, rk(g - lambda)]");
}

}  // namespace detail

/// g = h k with |rk(h - lambda) - phi1| <= 2 and |rk(k - 1) - phi2| <= 2,
/// where phi2 = rk(g - lambda) - phi1.
inline MatrixSplit split_gl(const Matrix& g, FieldElement lambda, const Rational& phi1) {
    std::size_t r = 0;
    detail::check_split_args(g, lambda, phi1, r);
    const auto& f = g.field();
    const std::size_t n = g.rows();
    const Rational phi2_total = Rational(static_cast<std::int64_t>(r)) - phi1;
    const Matrix g1 = scale(f.inv(lambda), g);

    const auto summands = cyclic_decomposition(g1);
    std::vector<Vector> rows;
    for (const auto& s : summands) rows.insert(rows.end(), s.basis.begin(), s.basis.end());
    const Matrix basis = Matrix::from_rows(f, rows, n);
    const Matrix basis_inv = inverse(basis);
    const Matrix local = basis * g1 * basis_inv;  // block diagonal

    std::vector<FieldElement> hbuf(n * n, f.zero());
    for (std::size_t i = 0; i < n; ++i) hbuf[i * n + i] = f.one();
    auto copy_block = [&](std::size_t off, std::size_t m) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) hbuf[(off + i) * n + off + j] = local(off + i, off + j);
    };
    std::vector<std::size_t> ranks, offsets;
    std::size_t off = 0;
    for (const auto& s : summands) {
        const auto blk = submatrix(local, off, off, s.dim(), s.dim());
        ranks.push_back(rank(blk - Matrix::identity(f, s.dim())));
        offsets.push_back(off);
        off += s.dim();
    }
    std::vector<std::size_t> suffix(summands.size() + 1, 0);
    for (std::size_t i = summands.size(); i-- > 0;) suffix[i] = suffix[i + 1] + ranks[i];

    MatrixSplit out{Matrix(f, 0, 0), Matrix(f, 0, 0), {}, Rational(0)};
    Rational p1 = phi1, p2 = phi2_total;
    for (std::size_t i = 0; i < summands.size(); ++i) {
        const std::size_t m = summands[i].dim();
        const auto ri = static_cast<std::int64_t>(ranks[i]);
        const auto rest = static_cast<std::int64_t>(suffix[i + 1]);
        if (Rational(ri) <= p1) {
            copy_block(offsets[i], m);
            out.trace.push_back({m, ranks[i], 'h', p1, p2, Rational(0)});
            p1 -= ri;
            continue;
        }
        if (Rational(rest) > p2) throw InvariantViolation("neither budget covers its summand");
        // Everything after summand i goes to k; summand i is split directly.
        p2 -= rest;
        const std::int64_t s = ceil(p1);
        std::size_t rh = 0, rk = 0;
        if (s >= static_cast<std::int64_t>(m)) {
            copy_block(offsets[i], m);
            rh = ranks[i];
        } else if (s > 0) {
            const std::size_t su = static_cast<std::size_t>(s), o = offsets[i];
            for (std::size_t a = 0; a < m; ++a) hbuf[(o + a) * n + o + a] = f.zero();
            for (std::size_t a = 0; a < su; ++a) {
                hbuf[(o + a) * n + o + a] = f.one();
                hbuf[(o + a) * n + o + a + 1] = f.one();
            }
            hbuf[(o + su) * n + o] = f.one();
            for (std::size_t a = su + 1; a < m; ++a) hbuf[(o + a) * n + o + a] = f.one();
            rh = su + 1;
        }
        {
            const auto hb = Matrix(f, n, n, hbuf);
            const auto hblk = submatrix(hb, offsets[i], offsets[i], m, m);
            const auto kblk = inverse(hblk) * submatrix(local, offsets[i], offsets[i], m, m);
            rk = rank(kblk - Matrix::identity(f, m));
        }
        out.trace.push_back({m, ranks[i], 'b', p1, p2, detail::rank_slack(rh, rk, p1, p2)});
        if (i + 1 < summands.size())
            out.trace.push_back({n - offsets[i + 1], suffix[i + 1], 'k', Rational(0), Rational(rest), Rational(0)});
        break;
    }

    const Matrix h1 = basis_inv * Matrix(f, n, n, std::move(hbuf)) * basis;
    out.h = scale(lambda, h1);
    out.k = inverse(h1) * g1;
    const auto rh = detail::rank_minus_scalar(out.h, lambda);
    const auto rk = rank(out.k - Matrix::identity(f, n));
    out.slack = detail::rank_slack(rh, rk, phi1, phi2_total);
    if (!(out.h * out.k == g) || out.slack > 2) throw InvariantViolation("split_gl produced an output outside its contract");
    return out;
}

/// As split_gl for det g = 1, with h, k in SL_n and slack at most 3.
inline MatrixSplit split_sl(const Matrix& g, FieldElement lambda, const Rational& phi1) {
    if (g.is_square() && g.rows() > 0 && det(g) != g.field().one()) throw NotSpecialLinear("det g != 1");
    auto s = split_gl(g, lambda, phi1);
    const auto& f = g.field();
    const std::size_t n = g.rows();
    const FieldElement dk = det(s.k);
    auto dmat = [&](FieldElement x) {
        std::vector<FieldElement> diag(n, f.one());
        diag[0] = x;
        return Matrix::diagonal(f, diag);
    };
    s.h = s.h * dmat(dk);
    s.k = dmat(f.inv(dk)) * s.k;
    const Rational phi2 = Rational(static_cast<std::int64_t>(detail::rank_minus_scalar(g, lambda))) - phi1;
    s.slack = detail::rank_slack(detail::rank_minus_scalar(s.h, lambda), rank(s.k - Matrix::identity(f, n)), phi1, phi2);
    if (!(s.h * s.k == g) || det(s.h) != f.one() || det(s.k) != f.one() || s.slack > 3)
        throw InvariantViolation("split_sl produced an output outside its contract");
    return s;
}

/// m_{lambda,n} = diag(lambda^{-(n-1)}, lambda, ..., lambda).
struct EMatrix {
    FieldElement lambda;
    std::size_t n = 0;

    Matrix matrix(const Field& f) const {
        std::vector<FieldElement> diag(n, lambda);
        diag[0] = f.pow(lambda, -static_cast<std::int64_t>(n - 1));
        return Matrix::diagonal(f, diag);
    }
};

/// dim ker(x - lambda) for every nonzero lambda, indexed by code - 1.
inline std::vector<std::size_t> eigenspace_dims(const Matrix& x) {
    std::vector<std::size_t> out;
    for (std::uint32_t c = 1; c < x.field().order(); ++c)
        out.push_back(x.rows() - detail::rank_minus_scalar(x, FieldElement{c}));
    return out;
}

/// The defining condition of X: dim ker(x - lambda) <= dim ker(x - 1) + 2 for all lambda != 0.
inline bool satisfies_eigen_balance(const Matrix& x) {
    const auto dims = eigenspace_dims(x);
    return std::all_of(dims.begin(), dims.end(), [&](std::size_t d) { return d <= dims[0] + 2; });
}

struct ENormalization {
    EMatrix m;
    Matrix x;
};

/// a = m_{lambda,n} x with x satisfying the eigen-balance condition; lambda
/// maximizes dim ker(a - lambda), earliest field code on ties.
inline ENormalization normalize_by_E(const Matrix& a) {
    if (!a.is_square() || a.rows() < 2) throw ShapeMismatch("normalize_by_E needs a square matrix with n >= 2");
    if (!is_invertible(a)) throw SingularMatrix("normalize_by_E needs an invertible matrix");
    const auto& f = a.field();
    const std::size_t n = a.rows();
    const auto dims = eigenspace_dims(a);
    std::size_t best = 0;
    for (std::size_t i = 1; i < dims.size(); ++i)
        if (dims[i] > dims[best]) best = i;
    const FieldElement lambda{static_cast<std::uint32_t>(best + 1)};
    const EMatrix m{lambda, n};
    const Matrix x = EMatrix{f.inv(lambda), n}.matrix(f) * a;
    if (!(m.matrix(f) * x == a) || !satisfies_eigen_balance(x))
        throw InvariantViolation("normalize_by_E produced an output outside its contract");
    return {m, x};
}

/// The scalar minimizing rk(g - lambda), earliest code on ties.
inline FieldElement best_scalar(const Matrix& g) {
    const auto& f = g.field();
    FieldElement best{1};
    std::size_t best_rank = detail::rank_minus_scalar(g, best);
    for (std::uint32_t c = 2; c < f.order() && best_rank > 0; ++c) {
        const auto r = detail::rank_minus_scalar(g, FieldElement{c});
        if (r < best_rank) {
            best_rank = r;
            best = FieldElement{c};
        }
    }
    return best;
}

/// Midpoint of x and y in the projective rank metric: x h with h from
/// split_sl(x^-1 y, lambda*, r/2).
inline Matrix midpoint_psl(const Matrix& x, const Matrix& y) {
    detail::require_square_pair(x, y);
    const auto& f = x.field();
    if (det(x) != f.one() || det(y) != f.one()) throw NotSpecialLinear("midpoint endpoints must lie in SL_n");
    const Matrix g = inverse(x) * y;
    const FieldElement lambda = best_scalar(g);
    const auto r = static_cast<std::int64_t>(detail::rank_minus_scalar(g, lambda));
    return x * split_sl(g, lambda, Rational(r, 2)).h;
}

}  // namespace ultrageo
