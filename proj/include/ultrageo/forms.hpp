#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "field.hpp"
#include "matrix.hpp"
#include "random.hpp"
#include "sampling.hpp"

namespace ultrageo {

enum class FormKind { symmetric, alternating, hermitian, quadratic };

inline std::string_view kind_name(FormKind k) {
    switch (k) {
        case FormKind::symmetric: return "symmetric";
        case FormKind::alternating: return "alternating";
        case FormKind::hermitian: return "hermitian";
        case FormKind::quadratic: return "quadratic";
    }
    return "?";
}

inline FormKind parse_kind(std::string_view s) {
    for (auto k : {FormKind::symmetric, FormKind::alternating, FormKind::hermitian, FormKind::quadratic})
        if (s == kind_name(k)) return k;
    throw ParseError("unknown form kind '" + std::string(s) + "'");
}

namespace detail {

/// conj(m)^T when `sesquilinear`, m^T otherwise.
inline Matrix star(const Matrix& m, bool sesquilinear) { return sesquilinear ? adjoint(m) : transpose(m); }

inline bool is_alternating(const Matrix& k) {
    if (!k.is_square() || !(k == -transpose(k))) return false;
    for (std::size_t i = 0; i < k.rows(); ++i)
        if (k(i, i).code != 0) return false;
    return true;
}

/// Upper-triangular representative of the quadratic form v b v^T.
inline Matrix upper_representative(const Matrix& b) {
    const auto& f = b.field();
    return Matrix::generate(f, b.rows(), b.cols(), [&](std::size_t i, std::size_t j) {
        if (i > j) return f.zero();
        if (i == j) return b(i, i);
        return f.add(b(i, j), b(j, i));
    });
}

}  // namespace detail

/// A finite-dimensional space with a symmetric, alternating, hermitian or
/// quadratic form. For the quadratic kind `gram()` is the upper-triangular
/// B with Q(v) = v B v^T and `polar()` is B + B^T.
class FormSpace {
public:
    static FormSpace make(FormKind kind, const Matrix& gram) {
        if (!gram.is_square()) throw ShapeMismatch("Gram matrix must be square");
        const auto& f = gram.field();
        switch (kind) {
            case FormKind::symmetric:
                if (!(gram == transpose(gram))) throw WrongSymmetry("symmetric form needs a symmetric Gram matrix");
                return FormSpace(kind, gram, gram);
            case FormKind::alternating:
                if (!detail::is_alternating(gram)) throw NotAlternating("alternating form needs an alternating Gram matrix");
                return FormSpace(kind, gram, gram);
            case FormKind::hermitian:
                if (!f.involution_enabled()) throw InvalidField("hermitian forms need a field with an involution");
                if (!(gram == adjoint(gram))) throw WrongSymmetry("hermitian form needs Gram = conj(Gram)^T");
                return FormSpace(kind, gram, gram);
            case FormKind::quadratic: {
                Matrix b = detail::upper_representative(gram);
                Matrix p = b + transpose(b);
                return FormSpace(kind, std::move(b), std::move(p));
            }
        }
        throw ParseError("unknown form kind");
    }

    FormKind kind() const noexcept { return kind_; }
    const Field& field() const noexcept { return gram_.field(); }
    std::size_t dim() const noexcept { return gram_.rows(); }
    const Matrix& gram() const noexcept { return gram_; }
    const Matrix& polar() const noexcept { return polar_; }
    bool sesquilinear() const noexcept { return kind_ == FormKind::hermitian; }

    Matrix star(const Matrix& m) const { return detail::star(m, sesquilinear()); }

    /// The bilinear or sesquilinear form (the polar form for the quadratic kind).
    FieldElement form(const Vector& u, const Vector& v) const {
        const auto& f = field();
        const Vector up = u * polar_;
        FieldElement s = f.zero();
        for (std::size_t i = 0; i < v.size(); ++i) s = f.add(s, f.mul(up[i], sesquilinear() ? f.conj(v[i]) : v[i]));
        return s;
    }

    /// Q(v) for the quadratic kind, form(v, v) otherwise.
    FieldElement quad(const Vector& v) const {
        if (kind_ != FormKind::quadratic) return form(v, v);
        const auto& f = field();
        const Vector vb = v * gram_;
        FieldElement s = f.zero();
        for (std::size_t i = 0; i < v.size(); ++i) s = f.add(s, f.mul(vb[i], v[i]));
        return s;
    }

    /// Gram matrix of the (polar) form on the rows of `basis`.
    Matrix gram_of(const Matrix& basis) const { return basis * polar_ * star(basis); }

    /// The form carried to the span of the rows of `basis`, in those coordinates.
    FormSpace restrict(const Matrix& basis) const {
        if (basis.cols() != dim()) throw ShapeMismatch("basis length does not match the space");
        if (kind_ == FormKind::quadratic) return make(kind_, basis * gram_ * transpose(basis));
        return FormSpace(kind_, gram_of(basis), gram_of(basis));
    }

    /// Basis of the radical of the polar form.
    Matrix radical() const { return Matrix::from_rows(field(), left_kernel_basis(polar_), dim()); }

    /// Gram invertible; for the quadratic kind, polar invertible or (char 2)
    /// a one-dimensional polar radical on which Q does not vanish.
    bool is_nonsingular() const {
        if (is_invertible(polar_) || dim() == 0) return true;
        if (kind_ != FormKind::quadratic || field().characteristic() != 2) return false;
        const Matrix rad = radical();
        return rad.rows() == 1 && quad(rad.row(0)).code != 0;
    }

    bool polar_nondegenerate() const { return dim() == 0 || is_invertible(polar_); }

    /// Whether v -> v g preserves the form (and Q, for the quadratic kind).
    bool preserves(const Matrix& g) const {
        if (!g.is_square() || g.rows() != dim()) return false;
        if (!(g * polar_ * star(g) == polar_)) return false;
        if (kind_ == FormKind::quadratic) return detail::is_alternating(g * gram_ * transpose(g) - gram_);
        return true;
    }

    std::string format() const { return std::string(kind_name(kind_)) + ":" + ultrageo::format(gram_); }

    static FormSpace parse(const Field& f, std::string_view text) {
        const auto colon = text.find(':');
        if (colon == std::string_view::npos) throw ParseError("form text must be kind:matrix");
        return make(parse_kind(detail::trim(text.substr(0, colon))), parse_matrix(f, text.substr(colon + 1)));
    }

private:
    FormSpace(FormKind k, Matrix g, Matrix p) : kind_(k), gram_(std::move(g)), polar_(std::move(p)) {}

    FormKind kind_;
    Matrix gram_;
    Matrix polar_;
};

/// k = c d c^* with d in block normal form: `blocks` 2x2 blocks, then
/// `diagonal` nonzero diagonal entries, then zeros.
struct CongruenceForm {
    Matrix c;
    Matrix d;
    std::size_t blocks = 0;
    std::size_t diagonal = 0;
    std::size_t rank() const noexcept { return 2 * blocks + diagonal; }
};

namespace detail {

/// Gram-Schmidt for a form with k^* = eps k (eps = -1 when `minus`). Finds
/// P with P k P^* in normal form and returns c = P^-1.
inline CongruenceForm congruence_reduce(const Matrix& k, bool sesq, bool minus, bool allow_diagonal) {
    const auto& f = k.field();
    const std::size_t n = k.rows();
    const FieldElement eps = minus ? f.neg(f.one()) : f.one();
    auto phi = [&](const Vector& x, const Vector& y) {
        const Vector xk = x * k;
        FieldElement s = f.zero();
        for (std::size_t i = 0; i < n; ++i) s = f.add(s, f.mul(xk[i], sesq ? f.conj(y[i]) : y[i]));
        return s;
    };
    std::vector<Vector> work = Matrix::identity(f, n).row_list();
    std::vector<Vector> block_rows, diag_rows;
    while (!work.empty()) {
        std::optional<std::size_t> aniso;
        if (allow_diagonal)
            for (std::size_t i = 0; i < work.size() && !aniso; ++i)
                if (phi(work[i], work[i]).code != 0) aniso = i;
        if (aniso) {
            const Vector u = work[*aniso];
            work.erase(work.begin() + static_cast<std::ptrdiff_t>(*aniso));
            const FieldElement inv = f.inv(phi(u, u));
            for (auto& w : work) w = detail::axpy(f, w, f.neg(f.mul(phi(w, u), inv)), u);
            diag_rows.push_back(u);
            continue;
        }
        std::optional<std::pair<std::size_t, std::size_t>> pair;
        FieldElement b = f.zero();
        for (std::size_t i = 0; i < work.size() && !pair; ++i)
            for (std::size_t j = i + 1; j < work.size() && !pair; ++j)
                if ((b = phi(work[i], work[j])).code != 0) pair = {i, j};
        if (!pair) break;
        const auto [i, j] = *pair;
        if (allow_diagonal) {
            // phi(u + a w, u + a w) = x + eps conj(x) with x = conj(a) b, so it
            // is enough to try x over a basis of F over its prime field.
            bool replaced = false;
            std::uint32_t e = 1;
            for (std::uint32_t t = 0; t < f.degree() && !replaced; ++t, e *= f.characteristic()) {
                const FieldElement x{e};
                const FieldElement tr = f.add(x, f.mul(eps, sesq ? f.conj(x) : x));
                if (tr.code == 0) continue;
                const FieldElement a_bar = f.div(x, b);
                work[i] = detail::axpy(f, work[i], sesq ? f.conj(a_bar) : a_bar, work[j]);
                replaced = true;
            }
            if (replaced) continue;
        }
        const Vector u = work[i];
        const FieldElement cb = f.inv(b);
        const Vector v = detail::scaled(f, sesq ? f.conj(cb) : cb, work[j]);
        work.erase(work.begin() + static_cast<std::ptrdiff_t>(j));
        work.erase(work.begin() + static_cast<std::ptrdiff_t>(i));
        for (auto& w : work) {
            const FieldElement wv = phi(w, v), wu = phi(w, u);
            w = detail::axpy(f, w, f.neg(wv), u);
            w = detail::axpy(f, w, f.neg(f.mul(eps, wu)), v);
        }
        block_rows.push_back(u);
        block_rows.push_back(v);
    }
    std::vector<Vector> rows = block_rows;
    rows.insert(rows.end(), diag_rows.begin(), diag_rows.end());
    rows.insert(rows.end(), work.begin(), work.end());
    const Matrix p = Matrix::from_rows(f, rows, n);
    CongruenceForm out{inverse(p), p * k * star(p, sesq), block_rows.size() / 2, diag_rows.size()};

    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            FieldElement want = f.zero();
            if (r < 2 * out.blocks && r / 2 == c / 2 && r != c) want = r % 2 == 0 ? f.one() : eps;
            const bool diag_part = r == c && r >= 2 * out.blocks && r < out.rank();
            if (diag_part ? out.d(r, c).code == 0 : out.d(r, c) != want)
                throw InvariantViolation("congruence reduction did not reach normal form");
        }
    return out;
}

}  // namespace detail

/// k = c d c^T for alternating k; d has blocks [[0,1],[-1,0]] then zeros.
inline CongruenceForm skew_congruence_normal_form(const Matrix& k) {
    if (!detail::is_alternating(k)) throw NotAlternating("matrix is not skew-symmetric with zero diagonal");
    return detail::congruence_reduce(k, false, true, false);
}

/// k = c d c^T for symmetric k; d has blocks [[0,1],[1,0]], then nonzero
/// diagonal entries, then zeros. Valid in characteristic 2.
inline CongruenceForm symmetric_congruence_normal_form(const Matrix& k) {
    if (!k.is_square()) throw ShapeMismatch("normal form needs a square matrix");
    if (!(k == transpose(k))) throw WrongSymmetry("matrix is not symmetric");
    return detail::congruence_reduce(k, false, false, true);
}

/// k = c d conj(c)^T for hermitian k over a field with involution.
inline CongruenceForm hermitian_congruence_normal_form(const Matrix& k) {
    if (!k.is_square()) throw ShapeMismatch("normal form needs a square matrix");
    if (!(k == adjoint(k))) throw WrongSymmetry("matrix is not hermitian");
    return detail::congruence_reduce(k, true, false, true);
}

/// k = c d c^* for conj(k)^T = -k, using the field's involution (the
/// identity when it is disabled). Blocks are [[0,1],[-1,0]].
inline CongruenceForm antihermitian_congruence_normal_form(const Matrix& k, bool sesquilinear) {
    if (!k.is_square()) throw ShapeMismatch("normal form needs a square matrix");
    if (sesquilinear && !k.field().involution_enabled()) throw InvalidField("field has no involution");
    if (!(detail::star(k, sesquilinear) == -k)) throw WrongSymmetry("matrix is not anti-hermitian");
    return detail::congruence_reduce(k, sesquilinear, true, true);
}

inline CongruenceForm antihermitian_congruence_normal_form(const Matrix& k) {
    return antihermitian_congruence_normal_form(k, k.field().involution_enabled());
}

namespace detail {

/// Deterministic search over coordinate vectors of length d: unit vectors,
/// then lines e_i + a e_j, then everything when q^d <= 10^6, then seeded
/// random draws.
template <class Pred>
std::optional<Vector> search_coordinates(const Field& f, std::size_t d, Pred&& pred, std::uint64_t seed) {
    if (d == 0) return std::nullopt;
    Vector v(d, f.zero());
    for (std::size_t i = 0; i < d; ++i) {
        v[i] = f.one();
        if (pred(v)) return v;
        v[i] = f.zero();
    }
    const std::uint32_t line_limit = std::min<std::uint32_t>(f.order(), 256);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) continue;
            for (std::uint32_t a = 1; a < line_limit; ++a) {
                v[i] = f.one();
                v[j] = FieldElement{a};
                if (pred(v)) return v;
                v[i] = v[j] = f.zero();
            }
        }
    std::uint64_t total = 1;
    bool small = true;
    for (std::size_t i = 0; i < d && small; ++i) {
        total *= f.order();
        small = total <= 1000000;
    }
    if (small) {
        for (std::uint64_t c = 1; c < total; ++c) {
            std::uint64_t x = c;
            for (auto& e : v) {
                e = FieldElement{static_cast<std::uint32_t>(x % f.order())};
                x /= f.order();
            }
            if (pred(v)) return v;
        }
        return std::nullopt;
    }
    SplitMix64 rng(seed);
    for (int attempt = 0; attempt < 200000; ++attempt) {
        for (auto& e : v) e = random_element(f, rng);
        if (pred(v)) return v;
    }
    return std::nullopt;
}

inline Vector combine(const Field& f, const Vector& coords, const Matrix& basis) {
    Vector out(basis.cols(), f.zero());
    for (std::size_t i = 0; i < coords.size(); ++i)
        if (coords[i].code != 0) out = detail::axpy(f, out, coords[i], basis.row(i));
    return out;
}

/// Some a with a conj(a) = x, for x nonzero in the fixed field.
inline FieldElement norm_preimage(const Field& f, FieldElement x) {
    for (std::uint32_t c = 1; c < f.order(); ++c) {
        FieldElement a{c};
        if (f.mul(a, f.conj(a)) == x) return a;
    }
    throw InvariantViolation("norm map is not onto");
}

/// Some b with b + conj(b) = x, for x in the fixed field.
inline FieldElement trace_preimage(const Field& f, FieldElement x) {
    std::uint32_t e = 1;
    for (std::uint32_t t = 0; t < f.degree(); ++t, e *= f.characteristic()) {
        const FieldElement b0{e};
        const FieldElement tr = f.add(b0, f.conj(b0));
        if (tr.code != 0) return f.mul(f.div(x, tr), b0);
    }
    throw InvariantViolation("trace map vanishes");
}

}  // namespace detail

/// Hyperbolic pairs plus a tail of at most two vectors; for hermitian spaces
/// an orthonormal basis grouped in consecutive pairs instead.
struct StandardBasis {
    std::vector<std::pair<Vector, Vector>> hyperbolic_pairs;
    std::vector<Vector> tail;
    int type = 1;  // 1: no tail, 2: tail of two, 3: tail of one
    bool orthonormal = false;

    std::string type_tag() const { return type == 1 ? "(i)" : type == 2 ? "(ii)" : "(iii)"; }

    /// Rows e_1..e_m, f_1..f_m, tail; orthonormal bases keep their own order.
    Matrix matrix(const Field& f, std::size_t n) const {
        std::vector<Vector> rows;
        if (orthonormal) {
            for (const auto& [a, b] : hyperbolic_pairs) {
                rows.push_back(a);
                rows.push_back(b);
            }
        } else {
            for (const auto& p : hyperbolic_pairs) rows.push_back(p.first);
            for (const auto& p : hyperbolic_pairs) rows.push_back(p.second);
        }
        rows.insert(rows.end(), tail.begin(), tail.end());
        return Matrix::from_rows(f, rows, n);
    }
};

/// Standard basis of a non-singular quadratic or hermitian space.
inline StandardBasis standard_basis(const FormSpace& space) {
    const auto& f = space.field();
    const std::size_t n = space.dim();
    if (space.kind() != FormKind::quadratic && space.kind() != FormKind::hermitian)
        throw OutOfRange("standard bases are defined for quadratic and hermitian spaces");
    if (!space.is_nonsingular()) throw SingularSpace("standard basis needs a non-singular space");
    StandardBasis out;

    if (space.kind() == FormKind::hermitian) {
        const auto cf = hermitian_congruence_normal_form(space.gram());
        if (cf.blocks != 0 || cf.diagonal != n) throw InvariantViolation("hermitian space did not diagonalize");
        const Matrix p = inverse(cf.c);
        std::vector<Vector> ortho;
        for (std::size_t i = 0; i < n; ++i) {
            const Vector u = p.row(i);
            ortho.push_back(detail::scaled(f, detail::norm_preimage(f, f.inv(space.form(u, u))), u));
        }
        out.orthonormal = true;
        for (std::size_t i = 0; i + 1 < n; i += 2) out.hyperbolic_pairs.emplace_back(ortho[i], ortho[i + 1]);
        if (n % 2) out.tail.push_back(ortho.back());
        out.type = n % 2 ? 3 : 1;
        return out;
    }

    Matrix work = Matrix::identity(f, n);
    std::uint64_t seed = 0x51a7e5ULL;
    while (work.rows() > 0) {
        const FormSpace sub = space.restrict(work);
        const std::size_t d = work.rows();
        auto hit = detail::search_coordinates(
            f, d,
            [&](const Vector& c) {
                if (sub.quad(c).code != 0) return false;
                return !detail::is_zero_vector(c * sub.polar());
            },
            seed++);
        if (!hit) break;
        const Vector e = detail::combine(f, *hit, work);
        std::size_t j = 0;
        while (space.form(e, work.row(j)).code == 0) ++j;
        const Vector fp = detail::scaled(f, f.inv(space.form(e, work.row(j))), work.row(j));
        const Vector fv = detail::axpy(f, fp, f.neg(space.quad(fp)), e);
        std::vector<Vector> projected;
        for (std::size_t i = 0; i < d; ++i) {
            Vector w = work.row(i);
            const FieldElement wf = space.form(w, fv), we = space.form(w, e);
            w = detail::axpy(f, w, f.neg(wf), e);
            w = detail::axpy(f, w, f.neg(we), fv);
            projected.push_back(std::move(w));
        }
        work = row_basis(Matrix::from_rows(f, projected, n));
        if (work.rows() + 2 != d) throw InvariantViolation("hyperbolic complement has the wrong dimension");
        out.hyperbolic_pairs.emplace_back(e, fv);
    }
    if (work.rows() > 2) throw InvariantViolation("isotropic vector search failed");
    out.tail = work.row_list();
    out.type = work.rows() == 0 ? 1 : work.rows() == 2 ? 2 : 3;
    return out;
}

/// A subspace D of the row space of W with the form non-singular on D,
/// chosen as a greedy complement of the radical of W inside W.
inline Matrix split_off_nondegenerate(const FormSpace& space, const Matrix& w) {
    const auto& f = space.field();
    if (w.cols() != space.dim()) throw ShapeMismatch("subspace basis length does not match the space");
    const Matrix wb = row_basis(w);
    if (wb.rows() == 0) return wb;
    const auto rad = left_kernel_basis(space.gram_of(wb));
    std::vector<Vector> rad_rows;
    for (const auto& c : rad) rad_rows.push_back(c * wb);
    const Matrix rmat = Matrix::from_rows(f, rad_rows, space.dim());
    const Matrix all = extend_basis(rmat, wb);
    std::vector<Vector> d;
    for (std::size_t i = rmat.rows(); i < all.rows(); ++i) d.push_back(all.row(i));
    Matrix out = Matrix::from_rows(f, d, space.dim());
    if (out.rows() > 0 && !is_invertible(space.gram_of(out))) throw InvariantViolation("split-off subspace is degenerate");
    return out;
}

namespace detail {

inline void require_witt_space(const FormSpace& space) {
    if (space.kind() != FormKind::quadratic && space.kind() != FormKind::hermitian)
        throw OutOfRange("Witt extension is implemented for quadratic and hermitian forms");
    if (!space.polar_nondegenerate()) throw SingularSpace("Witt extension needs a non-degenerate polar form");
}

/// Images for the tail of a standard basis: vectors in span(dst) realizing the
/// same Gram data as src.
inline std::vector<Vector> match_tail(const FormSpace& s, const std::vector<Vector>& src, const std::vector<Vector>& dst) {
    const auto& f = s.field();
    if (src.size() != dst.size()) throw InvariantViolation("standard basis tails differ in size");
    if (src.empty()) return {};
    if (src.size() == 1) {
        const FieldElement qx = s.quad(src[0]), qy = s.quad(dst[0]);
        for (std::uint32_t c = 1; c < f.order(); ++c) {
            FieldElement a{c};
            if (f.mul(f.mul(a, a), qy) == qx) return {detail::scaled(f, a, dst[0])};
        }
        throw InvariantViolation("tails are not isometric");
    }
    const FieldElement qx = s.quad(src[0]), qy = s.quad(src[1]), pxy = s.form(src[0], src[1]);
    const FieldElement q0 = s.quad(dst[0]), q1 = s.quad(dst[1]), p01 = s.form(dst[0], dst[1]);
    auto qval = [&](FieldElement a, FieldElement b) {
        return f.add(f.add(f.mul(f.mul(a, a), q0), f.mul(f.mul(a, b), p01)), f.mul(f.mul(b, b), q1));
    };
    const FieldElement two = f.from_integer(2);
    auto pval = [&](FieldElement a, FieldElement b, FieldElement c, FieldElement d) {
        // polar form of dst combinations: phi(x,x) = 2Q(x)
        FieldElement s0 = f.mul(f.mul(a, c), f.mul(two, q0));
        s0 = f.add(s0, f.mul(f.add(f.mul(a, d), f.mul(b, c)), p01));
        return f.add(s0, f.mul(f.mul(b, d), f.mul(two, q1)));
    };
    const std::uint32_t q = f.order();
    for (std::uint32_t a = 0; a < q; ++a)
        for (std::uint32_t b = 0; b < q; ++b) {
            if (a == 0 && b == 0) continue;
            if (qval(FieldElement{a}, FieldElement{b}) != qx) continue;
            for (std::uint32_t c = 0; c < q; ++c)
                for (std::uint32_t d = 0; d < q; ++d) {
                    if (f.sub(f.mul(FieldElement{a}, FieldElement{d}), f.mul(FieldElement{b}, FieldElement{c})).code == 0)
                        continue;
                    if (qval(FieldElement{c}, FieldElement{d}) != qy) continue;
                    if (pval(FieldElement{a}, FieldElement{b}, FieldElement{c}, FieldElement{d}) != pxy) continue;
                    return {detail::axpy(f, detail::scaled(f, FieldElement{a}, dst[0]), FieldElement{b}, dst[1]),
                            detail::axpy(f, detail::scaled(f, FieldElement{c}, dst[0]), FieldElement{d}, dst[1])};
                }
        }
    throw InvariantViolation("tails are not isometric");
}

/// Orthogonal complement of the row space of `basis`.
inline Matrix perp(const FormSpace& s, const Matrix& basis) {
    return Matrix::from_rows(s.field(), left_kernel_basis(s.polar() * s.star(basis)), s.dim());
}

}  // namespace detail

/// An isometry h of the space with u_i h = image_i for the rows u_i of
/// `domain`. The form must be quadratic or hermitian with a non-degenerate
/// polar form; the partial map must be injective and form-preserving.
inline Matrix witt_complete(const FormSpace& space, const Matrix& domain, const Matrix& image) {
    const auto& f = space.field();
    const std::size_t n = space.dim();
    detail::require_witt_space(space);
    if (domain.cols() != n || image.cols() != n || domain.rows() != image.rows())
        throw ShapeMismatch("partial map shapes do not match the space");
    if (rank(domain) != domain.rows() || rank(image) != image.rows()) throw NotIsometry("partial map is not injective");
    if (!(space.gram_of(domain) == space.gram_of(image))) throw NotIsometry("partial map does not preserve the form");
    if (space.kind() == FormKind::quadratic)
        for (std::size_t i = 0; i < domain.rows(); ++i)
            if (space.quad(domain.row(i)) != space.quad(image.row(i)))
                throw NotIsometry("partial map does not preserve Q");
    if (domain.rows() == 0) return Matrix::identity(f, n);

    Matrix dom = domain, img = image;
    std::uint64_t seed = 0x3177ULL;
    while (true) {
        const auto rad = left_kernel_basis(space.gram_of(dom));
        if (rad.empty()) break;
        const std::size_t d = dom.rows();
        const Matrix change = extend_basis(Matrix::from_rows(f, rad, d), Matrix::identity(f, d));
        dom = change * dom;
        img = change * img;
        // s with phi(u_i, s) = [i == 0], where u_0 is a radical vector.
        Vector e0(d, f.zero());
        e0[0] = f.one();
        auto partner = [&](const Matrix& m) {
            Vector y = solve_right(m * space.polar(), e0);
            return space.sesquilinear() ? detail::conj_vector(f, y) : y;
        };
        const Vector r = dom.row(0), r2 = img.row(0);
        Vector s = partner(dom), s2 = partner(img);
        if (space.kind() == FormKind::hermitian) {
            s = detail::axpy(f, s, detail::trace_preimage(f, f.neg(space.form(s, s))), r);
            s2 = detail::axpy(f, s2, detail::trace_preimage(f, f.neg(space.form(s2, s2))), r2);
        } else if (space.quad(r).code == 0) {
            s = detail::axpy(f, s, f.neg(space.quad(s)), r);
            s2 = detail::axpy(f, s2, f.neg(space.quad(s2)), r2);
        } else {
            // Characteristic 2 with Q(r) != 0: move s2 inside the orthogonal
            // complement of the image until Q agrees.
            const Matrix t = detail::perp(space, img);
            const FieldElement want = space.quad(s);
            if (space.quad(s2) != want) {
                auto hit = detail::search_coordinates(
                    f, t.rows(), [&](const Vector& c) { return space.quad(detail::axpy(f, s2, f.one(), detail::combine(f, c, t))) == want; },
                    seed++);
                if (!hit) throw InvariantViolation("no partner vector with matching Q");
                s2 = detail::axpy(f, s2, f.one(), detail::combine(f, *hit, t));
            }
        }
        dom = vstack(dom, Matrix::from_rows(f, {s}, n));
        img = vstack(img, Matrix::from_rows(f, {s2}, n));
    }

    Matrix src = dom, dst = img;
    if (dom.rows() < n) {
        const Matrix c1 = detail::perp(space, dom), c2 = detail::perp(space, img);
        const auto b1 = standard_basis(space.restrict(c1)), b2 = standard_basis(space.restrict(c2));
        if (b1.hyperbolic_pairs.size() != b2.hyperbolic_pairs.size() || b1.tail.size() != b2.tail.size())
            throw InvariantViolation("complements have different standard bases");
        const Matrix m1 = b1.matrix(f, c1.rows()) * c1;
        Matrix m2 = b2.matrix(f, c2.rows()) * c2;
        if (!b1.orthonormal && !b1.tail.empty()) {
            const std::size_t t0 = 2 * b1.hyperbolic_pairs.size();
            std::vector<Vector> st, dt;
            for (std::size_t i = t0; i < m1.rows(); ++i) {
                st.push_back(m1.row(i));
                dt.push_back(m2.row(i));
            }
            const auto matched = detail::match_tail(space, st, dt);
            auto rows = m2.row_list();
            for (std::size_t i = 0; i < matched.size(); ++i) rows[t0 + i] = matched[i];
            m2 = Matrix::from_rows(f, rows, n);
        }
        src = vstack(src, m1);
        dst = vstack(dst, m2);
    }
    Matrix h = inverse(src) * dst;
    if (!space.preserves(h) || !(domain * h == image)) throw InvariantViolation("Witt completion is not an isometry");
    return h;
}

struct WittExtension {
    Matrix h;        // isometry of L in the coordinates of the given L basis
    Matrix u;        // the subspace on which h agrees with g (rows in V)
    std::size_t defect = 0;  // rk(g|_L - h)
};

/// For V = L + S orthogonal and g an isometry of V, an isometry h of L with
/// rk(g|_L - h) <= 3 dim S, agreeing with g on a non-degenerate U inside
/// L and g^-1(L).
inline WittExtension witt_extend(const FormSpace& space, const Matrix& l, const Matrix& s, const Matrix& g) {
    const auto& f = space.field();
    const std::size_t n = space.dim();
    if (space.kind() != FormKind::quadratic && space.kind() != FormKind::hermitian)
        throw OutOfRange("Witt extension is implemented for quadratic and hermitian forms");
    if (l.cols() != n || s.cols() != n || g.rows() != n || !g.is_square()) throw ShapeMismatch("shapes do not match the space");
    if (l.rows() + s.rows() != n || rank(vstack(l, s)) != n) throw ShapeMismatch("L and S must form a direct sum equal to V");
    if (s.rows() > 0 && !(l * space.polar() * space.star(s)).is_zero())
        throw OutOfRange("L and S must be orthogonal");
    if (!space.is_nonsingular()) throw SingularSpace("the space must be non-singular");
    const FormSpace lspace = space.restrict(l);
    detail::require_witt_space(lspace);
    if (s.rows() > 0 && !space.restrict(s).is_nonsingular()) throw SingularSpace("the form must be non-singular on S");
    if (!is_invertible(g) || !space.preserves(g)) throw NotIsometry("g does not preserve the form");

    const Matrix w = intersect_row_spaces(l, l * inverse(g));
    const Matrix u = split_off_nondegenerate(space, w);
    if (n - u.rows() > 4 * s.rows()) throw InvariantViolation("dim(V/U) exceeds 4 dim S");
    std::vector<Vector> dom, img;
    for (std::size_t i = 0; i < u.rows(); ++i) {
        dom.push_back(coordinates(l, u.row(i)));
        img.push_back(coordinates(l, u.row(i) * g));
    }
    const Matrix h = witt_complete(lspace, Matrix::from_rows(f, dom, l.rows()), Matrix::from_rows(f, img, l.rows()));
    WittExtension out{h, u, rank(l * g - h * l)};
    if (out.defect > 3 * s.rows()) throw InvariantViolation("rk(g|_L - h) exceeds 3 dim S");
    return out;
}

/// Reflection in v: x -> x - phi(x, v)/Q(v) v for the quadratic kind, and
/// x -> x - b phi(x, v) v with b + conj(b) = phi(v, v) b conj(b) for the
/// hermitian kind. Requires v anisotropic.
inline Matrix reflection(const FormSpace& space, const Vector& v) {
    const auto& f = space.field();
    const std::size_t n = space.dim();
    const FieldElement a = space.quad(v);
    if (a.code == 0) throw OutOfRange("reflection needs an anisotropic vector");
    FieldElement beta;
    if (space.kind() == FormKind::quadratic) {
        beta = f.inv(a);
    } else if (space.kind() == FormKind::hermitian) {
        beta = f.inv(detail::trace_preimage(f, a));
    } else {
        throw OutOfRange("reflections are implemented for quadratic and hermitian forms");
    }
    const Matrix vrow = Matrix::from_rows(f, {v}, n);
    return Matrix::identity(f, n) - scale(beta, space.polar() * space.star(vrow) * vrow);
}

/// Random non-singular space of the given kind and dimension.
inline FormSpace random_form_space(const Field& f, FormKind kind, std::size_t n, SplitMix64& rng) {
    while (true) {
        Matrix m = random_matrix(f, n, n, rng);
        Matrix g(f, 0, 0);
        switch (kind) {
            case FormKind::quadratic: g = m; break;
            case FormKind::symmetric: g = m + transpose(m); break;
            case FormKind::alternating: g = m - transpose(m); break;
            case FormKind::hermitian: g = m + adjoint(m); break;
        }
        auto space = FormSpace::make(kind, g);
        if (space.is_nonsingular()) return space;
    }
}

/// Product of `length` reflections in random anisotropic vectors.
inline Matrix random_isometry(const FormSpace& space, std::size_t length, SplitMix64& rng) {
    const auto& f = space.field();
    Matrix g = Matrix::identity(f, space.dim());
    std::size_t done = 0;
    for (std::size_t guard = 0; done < length && guard < 64 * (length + 1); ++guard) {
        const Vector v = random_matrix(f, 1, space.dim(), rng).row(0);
        if (space.quad(v).code == 0) continue;
        g = g * reflection(space, v);
        ++done;
    }
    return g;
}

/// A random orthogonal decomposition V = L + S with dim S = s_dim and the
/// form non-singular on both (bases as rows).
inline std::pair<Matrix, Matrix> random_orthogonal_split(const FormSpace& space, std::size_t s_dim, SplitMix64& rng) {
    const auto& f = space.field();
    const std::size_t n = space.dim();
    if (s_dim > n) throw OutOfRange("dim S exceeds dim V");
    if (!space.polar_nondegenerate()) {
        // Characteristic 2, odd dimension: S has to be the polar radical.
        if (s_dim != 1) throw OutOfRange("a defective quadratic space only splits off its radical");
        const Matrix rad = space.radical();
        const Matrix all = extend_basis(rad, random_invertible(f, n, rng));
        return {submatrix(all, 1, 0, n - 1, n), rad};
    }
    if (space.kind() == FormKind::quadratic && f.characteristic() == 2 && s_dim % 2 == 1)
        throw OutOfRange("in characteristic 2 a non-degenerate S has even dimension");
    if (s_dim == 0) return {Matrix::identity(f, n), Matrix(f, 0, n)};
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const Matrix s = random_matrix(f, s_dim, n, rng);
        if (rank(s) != s_dim || !is_invertible(space.gram_of(s))) continue;
        if (!space.restrict(s).is_nonsingular()) continue;
        return {detail::perp(space, s), s};
    }
    throw InvariantViolation("no non-degenerate subspace found");
}

}  // namespace ultrageo
