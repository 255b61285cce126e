#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "forms.hpp"
#include "geodesic.hpp"
#include "linear_split.hpp"
#include "matrix.hpp"
#include "rational.hpp"
#include "sampling.hpp"

namespace ultrageo {

enum class BlockGroup { Sp, SU, OmegaPlusShape };

inline std::string_view group_name(BlockGroup g) {
    switch (g) {
        case BlockGroup::Sp: return "Sp";
        case BlockGroup::SU: return "SU";
        case BlockGroup::OmegaPlusShape: return "Omega";
    }
    return "?";
}

inline BlockGroup parse_group(std::string_view s) {
    if (s == "Sp" || s == "sp") return BlockGroup::Sp;
    if (s == "SU" || s == "su") return BlockGroup::SU;
    if (s == "Omega" || s == "omega" || s == "OmegaPlusShape") return BlockGroup::OmegaPlusShape;
    throw ParseError("unknown group tag '" + std::string(s) + "'");
}

/// Whether the group's block equations use the field involution.
inline bool uses_involution(BlockGroup g) noexcept { return g == BlockGroup::SU; }

/// A 2n x 2n matrix (a b; c d) tagged with the group it should lie in.
struct BlockElement {
    Matrix m;
    BlockGroup group = BlockGroup::Sp;

    std::size_t n() const noexcept { return m.rows() / 2; }
    Matrix a() const { return submatrix(m, 0, 0, n(), n()); }
    Matrix b() const { return submatrix(m, 0, n(), n(), n()); }
    Matrix c() const { return submatrix(m, n(), 0, n(), n()); }
    Matrix d() const { return submatrix(m, n(), n(), n(), n()); }
};

namespace detail {

inline Matrix star_for(BlockGroup g, const Matrix& x) { return star(x, uses_involution(g)); }

inline bool is_symmetric(const Matrix& k) { return k.is_square() && k == transpose(k); }

inline bool is_antihermitian(const Matrix& k, bool sesq) { return k.is_square() && star(k, sesq) == -k; }

inline Matrix swap_halves(const Field& f, std::size_t n) {
    const Matrix z(f, n, n), one = Matrix::identity(f, n);
    return block(z, one, one, z);
}

}  // namespace detail

/// The block equations of the tagged group and det = 1.
inline bool is_member(const BlockElement& g) {
    const auto& f = g.m.field();
    if (!g.m.is_square() || g.m.rows() % 2 != 0) return false;
    if (g.group == BlockGroup::SU && !f.involution_enabled()) return false;
    const std::size_t n = g.n();
    const Matrix one = Matrix::identity(f, n);
    const Matrix a = g.a(), b = g.b(), c = g.c(), d = g.d();
    if (g.group == BlockGroup::Sp) {
        if (!(a * transpose(d) - b * transpose(c) == one)) return false;
        if (!detail::is_symmetric(a * transpose(b)) || !detail::is_symmetric(c * transpose(d))) return false;
    } else {
        auto s = [&](const Matrix& x) { return detail::star_for(g.group, x); };
        if (!(a * s(d) + b * s(c) == one)) return false;
        if (!(a * s(b) + b * s(a)).is_zero() || !(c * s(d) + d * s(c)).is_zero()) return false;
    }
    return det(g.m) == f.one();
}

enum class FactorTag { U, U_T, V, V_T, H, E, Y };

inline std::string_view tag_name(FactorTag t) {
    switch (t) {
        case FactorTag::U: return "U";
        case FactorTag::U_T: return "U_T";
        case FactorTag::V: return "V";
        case FactorTag::V_T: return "V_T";
        case FactorTag::H: return "H";
        case FactorTag::E: return "E";
        case FactorTag::Y: return "Y";
    }
    return "?";
}

/// An element of one of the subgroups U, U^T, V, V^T, H, E or of the set Y.
/// The payload is k for the unipotent tags and a for H and Y; E carries
/// lambda and n.
struct SubgroupFactor {
    FactorTag tag = FactorTag::H;
    BlockGroup group = BlockGroup::Sp;
    Matrix payload;
    FieldElement lambda{1};
    std::size_t n = 0;

    const Field& field() const { return payload.field(); }

    Matrix matrix() const {
        const auto& f = field();
        const Matrix one = Matrix::identity(f, n), z(f, n, n);
        switch (tag) {
            case FactorTag::U:
            case FactorTag::V: return block(one, payload, z, one);
            case FactorTag::U_T:
            case FactorTag::V_T: return block(one, z, payload, one);
            case FactorTag::H:
            case FactorTag::Y: return direct_sum(inverse(payload), detail::star_for(group, payload));
            case FactorTag::E: {
                const FieldElement lb = uses_involution(group) ? f.conj(lambda) : lambda;
                return direct_sum(EMatrix{f.inv(lambda), n}.matrix(f), EMatrix{lb, n}.matrix(f));
            }
        }
        return one;
    }

    BlockElement element() const { return {matrix(), group}; }

    /// The tag invariant: symmetric k for U, anti-hermitian k for V,
    /// invertible a for H, the eigen-balance condition for Y.
    bool valid() const {
        switch (tag) {
            case FactorTag::U:
            case FactorTag::U_T: return payload.rows() == n && detail::is_symmetric(payload);
            case FactorTag::V:
            case FactorTag::V_T: return payload.rows() == n && detail::is_antihermitian(payload, uses_involution(group));
            case FactorTag::H: return payload.rows() == n && is_invertible(payload);
            case FactorTag::Y: return payload.rows() == n && is_invertible(payload) && satisfies_eigen_balance(payload);
            case FactorTag::E: return lambda.code != 0 && n >= 2;
        }
        return false;
    }
};

inline SubgroupFactor make_factor(FactorTag tag, BlockGroup group, const Matrix& payload) {
    return {tag, group, payload, FieldElement{1}, payload.rows()};
}

inline SubgroupFactor make_e_factor(BlockGroup group, const Field& f, FieldElement lambda, std::size_t n) {
    return {FactorTag::E, group, Matrix::identity(f, n), lambda, n};
}

/// Reads a 2n x 2n matrix as an element of the tagged subgroup, checking
/// the block shape and the tag invariant.
inline SubgroupFactor as_factor(const Matrix& m, FactorTag tag, BlockGroup group) {
    if (!m.is_square() || m.rows() % 2 != 0) throw ShapeMismatch("block matrix must be 2n x 2n");
    const std::size_t n = m.rows() / 2;
    const auto& f = m.field();
    const Matrix a = submatrix(m, 0, 0, n, n), b = submatrix(m, 0, n, n, n), c = submatrix(m, n, 0, n, n),
                 d = submatrix(m, n, n, n, n);
    const Matrix one = Matrix::identity(f, n);
    SubgroupFactor out;
    switch (tag) {
        case FactorTag::U:
        case FactorTag::V:
            if (!(a == one) || !(d == one) || !c.is_zero()) throw NotInGroup("not an upper unipotent block matrix");
            out = make_factor(tag, group, b);
            break;
        case FactorTag::U_T:
        case FactorTag::V_T:
            if (!(a == one) || !(d == one) || !b.is_zero()) throw NotInGroup("not a lower unipotent block matrix");
            out = make_factor(tag, group, c);
            break;
        case FactorTag::H:
        case FactorTag::Y:
            if (!b.is_zero() || !c.is_zero() || !is_invertible(a)) throw NotInGroup("not a block diagonal matrix");
            out = make_factor(tag, group, inverse(a));
            if (!(out.matrix() == m)) throw NotInGroup("diagonal blocks are not (a^-1, a^*)");
            break;
        case FactorTag::E:
            throw OutOfRange("E factors are built from lambda, not read from matrices");
    }
    if (!out.valid()) throw NotInGroup("payload violates the tag invariant");
    return out;
}

struct SymplecticFactors {
    SubgroupFactor u1, u2, u3, h;  // U^T, U, U^T, H
};

struct IsometryFactors {
    SubgroupFactor v1, v2, v3, h;  // V, V^T, V, H
};

/// An m x m matrix k1 with k1 + k1^* = 0: floor(m/2) blocks [[0,1],[-1,0]]
/// and, for odd m, a last entry lambda with conj(lambda) = -lambda (1 in
/// characteristic 2, 0 when no nonzero such lambda exists).
inline Matrix build_k1(std::size_t m, const Field& f, bool sesquilinear) {
    std::vector<FieldElement> buf(m * m, f.zero());
    for (std::size_t i = 0; i + 1 < m; i += 2) {
        buf[i * m + i + 1] = f.one();
        buf[(i + 1) * m + i] = f.neg(f.one());
    }
    if (m % 2 == 1) {
        FieldElement lambda = f.zero();
        if (f.characteristic() == 2) {
            lambda = f.one();
        } else if (sesquilinear && f.involution_enabled()) {
            for (std::uint32_t c = 1; c < f.order() && lambda.code == 0; ++c)
                if (f.conj(FieldElement{c}) == f.neg(FieldElement{c})) lambda = FieldElement{c};
        }
        buf[(m - 1) * m + m - 1] = lambda;
    }
    return Matrix(f, m, m, std::move(buf));
}

namespace detail {

struct BlockReduction {
    Matrix lower1, upper, lower2, h;  // g = lower1 * upper * lower2 * h
};

/// The row reduction shared by both factorizations: x1 g x2 x3 x4 is lower
/// unipotent for x1, x2 in H, x3 lower and x4 upper unipotent.
inline BlockReduction reduce_block(const Matrix& g, BlockGroup group) {
    const auto& f = g.field();
    const std::size_t n = g.rows() / 2;
    const Matrix one = Matrix::identity(f, n), z(f, n, n);
    auto hmat = [&](const Matrix& a) { return direct_sum(inverse(a), star_for(group, a)); };
    auto top_left = [&](const Matrix& m) { return submatrix(m, 0, 0, n, n); };

    const auto red = rref(top_left(g));
    const std::size_t r = red.pivots.size();
    const Matrix pmat = red.transform;
    const Matrix qmat = transpose(rref(transpose(red.reduced)).transform);
    Matrix x1 = hmat(inverse(pmat));
    const Matrix x2 = hmat(inverse(qmat));
    Matrix m1 = x1 * g * x2;
    {
        const Matrix b1 = submatrix(m1, 0, n, n, n);
        if (!submatrix(b1, r, 0, n - r, r).is_zero()) throw InvariantViolation("block reduction lost the zero block");
        const Matrix s = submatrix(b1, r, r, n - r, n - r), q = submatrix(b1, 0, r, r, n - r);
        const Matrix sinv = inverse(s);
        const Matrix row_op = block(Matrix::identity(f, r), -(q * sinv), Matrix(f, n - r, r), sinv);
        x1 = hmat(inverse(row_op)) * x1;
    }
    const Matrix k1 = group == BlockGroup::Sp ? Matrix::identity(f, n - r) : build_k1(n - r, f, uses_involution(group));
    const Matrix kk = direct_sum(Matrix(f, r, r), k1);
    const Matrix x3 = block(one, z, kk, one);
    const Matrix a2 = top_left(x1 * g * x2 * x3);
    if (!is_invertible(a2)) {
        if (group == BlockGroup::Sp) throw InvariantViolation("symplectic reduction reached a singular block");
        throw ImpossibleCase("a2 is singular; the input cannot lie in the group");
    }
    x1 = hmat(a2) * x1;
    const Matrix m3 = x1 * g * x2 * x3;
    const Matrix b2 = submatrix(m3, 0, n, n, n);
    const Matrix x4 = block(one, -b2, z, one);
    const Matrix y = m3 * x4;
    if (!(submatrix(y, 0, 0, n, n) == one) || !submatrix(y, 0, n, n, n).is_zero() || !(submatrix(y, n, n, n, n) == one))
        throw InvariantViolation("block reduction did not reach a lower unipotent matrix");
    const Matrix x1i = inverse(x1);
    return {x1i * y * x1, x1i * inverse(x4) * x1, x1i * inverse(x3) * x1, x1i * inverse(x2)};
}

inline void require_block_input(const BlockElement& g, BlockGroup want) {
    if (!g.m.is_square() || g.m.rows() % 2 != 0 || g.m.rows() == 0) throw ShapeMismatch("block element must be 2n x 2n");
    if (g.group != want && !(want == BlockGroup::SU && g.group == BlockGroup::OmegaPlusShape))
        throw OutOfRange("block element has the wrong group tag");
    if (g.group == BlockGroup::SU && !g.m.field().involution_enabled()) throw InvalidField("SU needs a field with an involution");
    if (!is_member(g)) throw NotInGroup("element fails the block equations of its group");
}

}  // namespace detail

/// g = u1 u2 u3 h with u1, u3 in U^T, u2 in U and h in H.
inline SymplecticFactors factor_symplectic(const BlockElement& g) {
    detail::require_block_input(g, BlockGroup::Sp);
    const auto red = detail::reduce_block(g.m, BlockGroup::Sp);
    SymplecticFactors out{as_factor(red.lower1, FactorTag::U_T, g.group), as_factor(red.upper, FactorTag::U, g.group),
                          as_factor(red.lower2, FactorTag::U_T, g.group), as_factor(red.h, FactorTag::H, g.group)};
    if (!(out.u1.matrix() * out.u2.matrix() * out.u3.matrix() * out.h.matrix() == g.m))
        throw InvariantViolation("symplectic factorization does not reconstruct g");
    return out;
}

/// g = v1 v2 v3 h with v1, v3 in V, v2 in V^T and h in H with det 1, for
/// the SU and orthogonal block shapes. The reduction runs on w g w with
/// w = (0 1; 1 0), which exchanges V and V^T.
inline IsometryFactors factor_isometry_block(const BlockElement& g) {
    detail::require_block_input(g, BlockGroup::SU);
    const auto& f = g.m.field();
    const std::size_t n = g.n();
    if (g.group == BlockGroup::OmegaPlusShape && n < 3) throw OutOfRange("the orthogonal shape needs n >= 3");
    const Matrix w = detail::swap_halves(f, n);
    const auto red = detail::reduce_block(w * g.m * w, g.group);
    IsometryFactors out{as_factor(w * red.lower1 * w, FactorTag::V, g.group), as_factor(w * red.upper * w, FactorTag::V_T, g.group),
                        as_factor(w * red.lower2 * w, FactorTag::V, g.group), as_factor(w * red.h * w, FactorTag::H, g.group)};
    if (!(out.v1.matrix() * out.v2.matrix() * out.v3.matrix() * out.h.matrix() == g.m))
        throw InvariantViolation("isometry factorization does not reconstruct g");
    if (det(out.h.matrix()) != f.one()) throw InvariantViolation("H factor has det != 1");
    if (!is_member(out.h.element())) throw InvariantViolation("H factor is not in the group");
    return out;
}

/// Number of rows of d kept at parameter t: 2 floor((s + s'/2) t), and the
/// whole of d at t = 1.
inline std::size_t truncation_rows(const CongruenceForm& cf, const Rational& t) {
    if (t >= 1) return cf.rank();
    const Rational half_rank(static_cast<std::int64_t>(2 * cf.blocks + cf.diagonal), 2);
    return static_cast<std::size_t>(2 * floor(half_rank * t));
}

/// The point (1 k(t); 0 1) (or its transpose shape) on the path from 1 to
/// u, with k(t) = c d(t) c^* and d(t) the first truncation_rows rows of d.
inline BlockElement unipotent_geodesic_point(const SubgroupFactor& u, const Rational& t) {
    if (t < 0 || t > 1) throw OutOfRange("t must lie in [0, 1]");
    if (u.tag == FactorTag::H || u.tag == FactorTag::E || u.tag == FactorTag::Y)
        throw OutOfRange("unipotent paths need a U, U_T, V or V_T factor");
    if (!u.valid()) throw NotInGroup("payload violates the tag invariant");
    const auto& f = u.field();
    const bool sesq_tag = (u.tag == FactorTag::V || u.tag == FactorTag::V_T) && uses_involution(u.group);
    const auto cf = (u.tag == FactorTag::U || u.tag == FactorTag::U_T)
                        ? symmetric_congruence_normal_form(u.payload)
                        : antihermitian_congruence_normal_form(u.payload, sesq_tag);
    const std::size_t keep = truncation_rows(cf, t);
    const Matrix dt = Matrix::generate(f, u.n, u.n, [&](std::size_t i, std::size_t j) { return i < keep ? cf.d(i, j) : f.zero(); });
    const Matrix kt = cf.c * dt * detail::star(cf.c, sesq_tag);
    SubgroupFactor p = u;
    p.payload = kt;
    const BlockGroup group = (u.tag == FactorTag::U || u.tag == FactorTag::U_T) ? BlockGroup::Sp : u.group;
    return {p.matrix(), group};
}

/// h = e y with e in E and y in Y. normalize_by_E gives a = m x; then
/// a = (m x m^-1) m and H(x' m) = E(lambda) H(x'), with x' conjugate to x.
inline std::pair<SubgroupFactor, SubgroupFactor> decompose_H(const SubgroupFactor& h) {
    if (h.tag != FactorTag::H) throw OutOfRange("decompose_H needs an H factor");
    if (!h.valid()) throw NotInGroup("H payload is not invertible");
    const auto& f = h.field();
    const auto norm = normalize_by_E(h.payload);
    const Matrix m = norm.m.matrix(f);
    SubgroupFactor y = make_factor(FactorTag::Y, h.group, m * norm.x * inverse(m));
    SubgroupFactor e = make_e_factor(h.group, f, norm.m.lambda, h.n);
    if (!(e.matrix() * y.matrix() == h.matrix()) || !y.valid()) throw InvariantViolation("H = EY decomposition failed");
    return {e, y};
}

/// All points of the star path from 1 to y at dyadic parameters m / 2^depth.
/// The a-part is scaled into SL_n by diag(det(a)^-1, 1, ..., 1); the inner
/// path joins 1 to that matrix in the rank metric and the final point is y.
inline std::vector<BlockElement> star_path(const SubgroupFactor& y, std::size_t depth) {
    if (y.tag != FactorTag::Y && y.tag != FactorTag::H) throw OutOfRange("star paths need a Y factor");
    if (!is_invertible(y.payload)) throw NotInGroup("Y payload is not invertible");
    const auto& f = y.field();
    const std::size_t n = y.n;
    std::vector<FieldElement> corr(n, f.one());
    corr[0] = f.inv(det(y.payload));
    const Matrix target = y.payload * Matrix::diagonal(f, corr);
    const auto ctx = MetricGroupContext::rank(n);
    const auto inner = dyadic_path(ctx, Matrix::identity(f, n), target, depth);
    std::vector<BlockElement> out;
    const BlockGroup group = y.group;
    for (std::size_t i = 0; i < inner.size(); ++i) {
        SubgroupFactor p = make_factor(FactorTag::H, group, i + 1 == inner.size() ? y.payload : inner.points[i]);
        out.push_back({p.matrix(), group});
    }
    return out;
}

/// The star path point at t, with t rounded down to a multiple of 2^-depth.
inline BlockElement star_path_point(const SubgroupFactor& y, const Rational& t, std::size_t depth) {
    if (t < 0 || t > 1) throw OutOfRange("t must lie in [0, 1]");
    const auto path = star_path(y, depth);
    const auto idx = static_cast<std::size_t>(floor(t * Rational(std::int64_t{1} << depth)));
    return path[idx];
}

namespace detail {

inline Matrix random_symmetric(const Field& f, std::size_t n, SplitMix64& rng) {
    Matrix m = random_matrix(f, n, n, rng);
    return Matrix::generate(f, n, n, [&](std::size_t i, std::size_t j) { return i <= j ? m(i, j) : m(j, i); });
}

inline Matrix random_antihermitian(const Field& f, std::size_t n, bool sesq, SplitMix64& rng) {
    std::vector<FieldElement> diag_choices;
    for (std::uint32_t c = 0; c < f.order(); ++c) {
        const FieldElement x{c};
        if ((sesq ? f.conj(x) : x) == f.neg(x)) diag_choices.push_back(x);
    }
    Matrix m = random_matrix(f, n, n, rng);
    std::vector<FieldElement> diag(n);
    for (auto& d : diag) d = diag_choices[rng.below(diag_choices.size())];
    return Matrix::generate(f, n, n, [&](std::size_t i, std::size_t j) {
        if (i == j) return diag[i];
        if (i < j) return m(i, j);
        return f.neg(sesq ? f.conj(m(j, i)) : m(j, i));
    });
}

/// Random a whose H-element lies in the group: det(a) fixed by the involution for SU.
inline Matrix random_h_payload(const Field& f, std::size_t n, BlockGroup group, SplitMix64& rng) {
    if (group != BlockGroup::SU) return random_invertible(f, n, rng);
    std::vector<FieldElement> fixed;
    for (std::uint32_t c = 1; c < f.order(); ++c)
        if (f.conj(FieldElement{c}) == FieldElement{c}) fixed.push_back(FieldElement{c});
    std::vector<FieldElement> diag(n, f.one());
    diag[0] = fixed[rng.below(fixed.size())];
    return Matrix::diagonal(f, diag) * random_sl(f, n, rng);
}

}  // namespace detail

/// Random generator of the group: a U/U^T (Sp) or V/V^T factor, or an H factor.
inline SubgroupFactor random_generator(BlockGroup group, const Field& f, std::size_t n, SplitMix64& rng) {
    const auto pick = rng.below(3);
    if (pick == 2) return make_factor(FactorTag::H, group, detail::random_h_payload(f, n, group, rng));
    if (group == BlockGroup::Sp)
        return make_factor(pick == 0 ? FactorTag::U : FactorTag::U_T, group, detail::random_symmetric(f, n, rng));
    return make_factor(pick == 0 ? FactorTag::V : FactorTag::V_T, group,
                       detail::random_antihermitian(f, n, uses_involution(group), rng));
}

/// Product of `length` random generators.
inline BlockElement random_block_element(BlockGroup group, const Field& f, std::size_t n, SplitMix64& rng,
                                         std::size_t length = 30) {
    if (group == BlockGroup::SU && !f.involution_enabled()) throw InvalidField("SU needs a field with an involution");
    Matrix m = Matrix::identity(f, 2 * n);
    for (std::size_t i = 0; i < length; ++i) m = m * random_generator(group, f, n, rng).matrix();
    return {m, group};
}

inline std::string format(const BlockElement& g) { return std::string(group_name(g.group)) + ":" + format(g.m); }

inline BlockElement parse_block_element(const Field& f, std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ParseError("block element text must be group:matrix");
    BlockElement g{parse_matrix(f, text.substr(colon + 1)), parse_group(detail::trim(text.substr(0, colon)))};
    if (!g.m.is_square() || g.m.rows() % 2 != 0 || g.m.rows() == 0) throw ShapeMismatch("block element must be 2n x 2n");
    return g;
}

inline std::string format(const SubgroupFactor& s) {
    if (s.tag == FactorTag::E) {
        return "E:" + s.field().format(s.lambda) + "," + std::to_string(s.n);
    }
    return std::string(tag_name(s.tag)) + ":" + format(s.payload);
}

}  // namespace ultrageo
