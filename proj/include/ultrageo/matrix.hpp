#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "field.hpp"

namespace ultrageo {

using Vector = std::vector<FieldElement>;

/// Dense immutable matrix over a Field. Row vectors act on the right
/// (v -> v * M), so subspaces are carried as matrices whose rows span them.
class Matrix {
public:
    Matrix() = default;

    Matrix(Field field, std::size_t rows, std::size_t cols)
        : field_(std::move(field)), rows_(rows), cols_(cols), data_(rows * cols, FieldElement{0}) {}

    Matrix(Field field, std::size_t rows, std::size_t cols, std::vector<FieldElement> data)
        : field_(std::move(field)), rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) throw ShapeMismatch("entry count does not match shape");
    }

    static Matrix identity(const Field& f, std::size_t n) { return scalar(f, n, f.one()); }

    static Matrix scalar(const Field& f, std::size_t n, FieldElement lambda) {
        Matrix m(f, n, n);
        for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = lambda;
        return m;
    }

    static Matrix diagonal(const Field& f, std::span<const FieldElement> entries) {
        const auto n = entries.size();
        Matrix m(f, n, n);
        for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = entries[i];
        return m;
    }

    static Matrix from_rows(const Field& f, const std::vector<Vector>& rows, std::size_t cols) {
        Matrix m(f, rows.size(), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols) throw ShapeMismatch("row length mismatch");
            std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * cols));
        }
        return m;
    }

    /// Integer literals mapped through Z -> GF(p); convenient in tests.
    static Matrix from_integers(const Field& f, std::initializer_list<std::initializer_list<std::int64_t>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r ? rows.begin()->size() : 0;
        std::vector<FieldElement> data;
        data.reserve(r * c);
        for (const auto& row : rows) {
            if (row.size() != c) throw ShapeMismatch("ragged integer matrix");
            for (auto v : row) data.push_back(f.from_integer(v));
        }
        return Matrix(f, r, c, std::move(data));
    }

    template <class Fn>
    static Matrix generate(const Field& f, std::size_t rows, std::size_t cols, Fn&& fn) {
        std::vector<FieldElement> data;
        data.reserve(rows * cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) data.push_back(fn(i, j));
        return Matrix(f, rows, cols, std::move(data));
    }

    const Field& field() const noexcept { return field_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }
    std::span<const FieldElement> data() const noexcept { return data_; }

    FieldElement operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    Vector row(std::size_t i) const {
        auto first = data_.begin() + static_cast<std::ptrdiff_t>(i * cols_);
        return Vector(first, first + static_cast<std::ptrdiff_t>(cols_));
    }

    std::vector<Vector> row_list() const {
        std::vector<Vector> out;
        out.reserve(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out.push_back(row(i));
        return out;
    }

    bool is_zero() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](FieldElement e) { return e.code == 0; });
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_ &&
               (a.data_.empty() || a.field_ == b.field_);
    }

private:
    Field field_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<FieldElement> data_;
};

namespace detail {

inline void require_same_field(const Matrix& a, const Matrix& b) {
    if (!(a.field() == b.field())) throw ShapeMismatch("matrices over different fields");
}

/// Gaussian elimination in place on a row-major buffer, pivoting on the first
/// nonzero entry of each column. Row operations are mirrored on `aug` when
/// given. Returns pivot columns; `det` accumulates the determinant factor.
inline std::vector<std::size_t> eliminate(const Field& f, std::vector<FieldElement>& a, std::size_t rows,
                                          std::size_t cols, std::vector<FieldElement>* aug, std::size_t acols,
                                          bool reduced, FieldElement* det = nullptr) {
    std::vector<std::size_t> pivots;
    FieldElement d = f.one();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && a[piv * cols + c].code == 0) ++piv;
        if (piv == rows) continue;
        if (piv != r) {
            std::swap_ranges(a.begin() + static_cast<std::ptrdiff_t>(piv * cols),
                             a.begin() + static_cast<std::ptrdiff_t>((piv + 1) * cols),
                             a.begin() + static_cast<std::ptrdiff_t>(r * cols));
            if (aug)
                std::swap_ranges(aug->begin() + static_cast<std::ptrdiff_t>(piv * acols),
                                 aug->begin() + static_cast<std::ptrdiff_t>((piv + 1) * acols),
                                 aug->begin() + static_cast<std::ptrdiff_t>(r * acols));
            d = f.neg(d);
        }
        const FieldElement pv = a[r * cols + c];
        d = f.mul(d, pv);
        const FieldElement pinv = f.inv(pv);
        for (std::size_t j = c; j < cols; ++j) a[r * cols + j] = f.mul(a[r * cols + j], pinv);
        if (aug)
            for (std::size_t j = 0; j < acols; ++j) (*aug)[r * acols + j] = f.mul((*aug)[r * acols + j], pinv);
        for (std::size_t i = reduced ? 0 : r + 1; i < rows; ++i) {
            if (i == r) continue;
            const FieldElement factor = a[i * cols + c];
            if (factor.code == 0) continue;
            const FieldElement nf = f.neg(factor);
            for (std::size_t j = c; j < cols; ++j)
                a[i * cols + j] = f.add(a[i * cols + j], f.mul(nf, a[r * cols + j]));
            if (aug)
                for (std::size_t j = 0; j < acols; ++j)
                    (*aug)[i * acols + j] = f.add((*aug)[i * acols + j], f.mul(nf, (*aug)[r * acols + j]));
        }
        pivots.push_back(c);
        ++r;
    }
    if (det) *det = (r == rows && rows == cols) ? d : f.zero();
    return pivots;
}

inline std::vector<FieldElement> copy_data(const Matrix& m) { return {m.data().begin(), m.data().end()}; }

/// y + a x
inline Vector axpy(const Field& f, const Vector& y, FieldElement a, const Vector& x) {
    Vector out(y);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.add(out[i], f.mul(a, x[i]));
    return out;
}

inline Vector scaled(const Field& f, FieldElement a, const Vector& x) {
    Vector out(x);
    for (auto& e : out) e = f.mul(a, e);
    return out;
}

inline Vector conj_vector(const Field& f, const Vector& x) {
    Vector out(x);
    for (auto& e : out) e = f.conj(e);
    return out;
}

inline bool is_zero_vector(const Vector& v) {
    return std::all_of(v.begin(), v.end(), [](FieldElement e) { return e.code == 0; });
}

}  // namespace detail

inline Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeMismatch("addition shape mismatch");
    detail::require_same_field(a, b);
    const auto& f = a.field();
    std::vector<FieldElement> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.add(a.data()[i], b.data()[i]);
    return Matrix(f, a.rows(), a.cols(), std::move(out));
}

inline Matrix operator-(const Matrix& a) {
    const auto& f = a.field();
    std::vector<FieldElement> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.neg(a.data()[i]);
    return Matrix(f, a.rows(), a.cols(), std::move(out));
}

inline Matrix operator-(const Matrix& a, const Matrix& b) { return a + (-b); }

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("product shape mismatch");
    detail::require_same_field(a, b);
    const auto& f = a.field();
    const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
    std::vector<FieldElement> out(n * p, f.zero());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < m; ++k) {
            const FieldElement x = a(i, k);
            if (x.code == 0) continue;
            for (std::size_t j = 0; j < p; ++j) out[i * p + j] = f.add(out[i * p + j], f.mul(x, b(k, j)));
        }
    return Matrix(f, n, p, std::move(out));
}

inline Matrix scale(FieldElement lambda, const Matrix& a) {
    const auto& f = a.field();
    std::vector<FieldElement> out(a.data().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.mul(lambda, a.data()[i]);
    return Matrix(f, a.rows(), a.cols(), std::move(out));
}

inline Vector operator*(const Vector& v, const Matrix& m) {
    if (v.size() != m.rows()) throw ShapeMismatch("vector-matrix shape mismatch");
    const auto& f = m.field();
    Vector out(m.cols(), f.zero());
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k].code == 0) continue;
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] = f.add(out[j], f.mul(v[k], m(k, j)));
    }
    return out;
}

inline Matrix transpose(const Matrix& a) {
    return Matrix::generate(a.field(), a.cols(), a.rows(), [&](std::size_t i, std::size_t j) { return a(j, i); });
}

/// Entrywise field involution.
inline Matrix conj(const Matrix& a) {
    const auto& f = a.field();
    return Matrix::generate(f, a.rows(), a.cols(), [&](std::size_t i, std::size_t j) { return f.conj(a(i, j)); });
}

/// Conjugate transpose; plain transpose when the involution is disabled.
inline Matrix adjoint(const Matrix& a) {
    const auto& f = a.field();
    return Matrix::generate(f, a.cols(), a.rows(), [&](std::size_t i, std::size_t j) { return f.conj(a(j, i)); });
}

inline Matrix submatrix(const Matrix& a, std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) {
    if (r0 + nr > a.rows() || c0 + nc > a.cols()) throw ShapeMismatch("submatrix out of bounds");
    return Matrix::generate(a.field(), nr, nc, [&](std::size_t i, std::size_t j) { return a(r0 + i, c0 + j); });
}

inline Matrix hstack(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeMismatch("hstack row mismatch");
    return Matrix::generate(a.field(), a.rows(), a.cols() + b.cols(), [&](std::size_t i, std::size_t j) {
        return j < a.cols() ? a(i, j) : b(i, j - a.cols());
    });
}

inline Matrix vstack(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ShapeMismatch("vstack column mismatch");
    return Matrix::generate(a.field(), a.rows() + b.rows(), a.cols(), [&](std::size_t i, std::size_t j) {
        return i < a.rows() ? a(i, j) : b(i - a.rows(), j);
    });
}

/// (a b; c d) from four equally sized square blocks.
inline Matrix block(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d) {
    return vstack(hstack(a, b), hstack(c, d));
}

inline Matrix direct_sum(const Matrix& a, const Matrix& b) {
    const auto& f = a.field();
    return block(a, Matrix(f, a.rows(), b.cols()), Matrix(f, b.rows(), a.cols()), b);
}

inline std::size_t rank(const Matrix& m) {
    auto buf = detail::copy_data(m);
    return detail::eliminate(m.field(), buf, m.rows(), m.cols(), nullptr, 0, false).size();
}

struct RowReduction {
    Matrix reduced;                   ///< reduced row echelon form
    std::vector<std::size_t> pivots;  ///< pivot column per nonzero row
    Matrix transform;                 ///< invertible, transform * m == reduced
};

inline RowReduction rref(const Matrix& m) {
    auto buf = detail::copy_data(m);
    auto id = detail::copy_data(Matrix::identity(m.field(), m.rows()));
    auto piv = detail::eliminate(m.field(), buf, m.rows(), m.cols(), &id, m.rows(), true);
    return {Matrix(m.field(), m.rows(), m.cols(), std::move(buf)), std::move(piv),
            Matrix(m.field(), m.rows(), m.rows(), std::move(id))};
}

/// Basis of {v : m * v^T = 0}, one vector per free column of the RREF.
inline std::vector<Vector> kernel_basis(const Matrix& m) {
    const auto& f = m.field();
    auto buf = detail::copy_data(m);
    auto piv = detail::eliminate(f, buf, m.rows(), m.cols(), nullptr, 0, true);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto c : piv) is_pivot[c] = true;
    std::vector<Vector> out;
    for (std::size_t fc = 0; fc < m.cols(); ++fc) {
        if (is_pivot[fc]) continue;
        Vector v(m.cols(), f.zero());
        v[fc] = f.one();
        for (std::size_t i = 0; i < piv.size(); ++i) v[piv[i]] = f.neg(buf[i * m.cols() + fc]);
        out.push_back(std::move(v));
    }
    return out;
}

/// Basis of {v : v * m = 0}.
inline std::vector<Vector> left_kernel_basis(const Matrix& m) { return kernel_basis(transpose(m)); }

inline FieldElement det(const Matrix& m) {
    if (!m.is_square()) throw ShapeMismatch("determinant of non-square matrix");
    auto buf = detail::copy_data(m);
    FieldElement d;
    detail::eliminate(m.field(), buf, m.rows(), m.cols(), nullptr, 0, false, &d);
    return m.rows() == 0 ? m.field().one() : d;
}

inline bool is_invertible(const Matrix& m) { return m.is_square() && rank(m) == m.rows(); }

inline Matrix inverse(const Matrix& m) {
    if (!m.is_square()) throw ShapeMismatch("inverse of non-square matrix");
    auto buf = detail::copy_data(m);
    auto id = detail::copy_data(Matrix::identity(m.field(), m.rows()));
    auto piv = detail::eliminate(m.field(), buf, m.rows(), m.cols(), &id, m.rows(), true);
    if (piv.size() != m.rows()) throw SingularMatrix("matrix is not invertible");
    return Matrix(m.field(), m.rows(), m.rows(), std::move(id));
}

/// Rows of m that are independent of all earlier rows (greedy, in order).
inline std::vector<std::size_t> independent_rows(const Matrix& m) {
    auto buf = detail::copy_data(transpose(m));
    auto piv = detail::eliminate(m.field(), buf, m.cols(), m.rows(), nullptr, 0, false);
    return piv;
}

/// A basis of the row space of m, drawn from its rows.
inline Matrix row_basis(const Matrix& m) {
    std::vector<Vector> rows;
    for (auto i : independent_rows(m)) rows.push_back(m.row(i));
    return Matrix::from_rows(m.field(), rows, m.cols());
}

/// Coordinates x with x * basis == v, for v in the row space of an
/// independent set `basis`. Throws OutOfRange if v is not in the span.
inline Vector coordinates(const Matrix& basis, const Vector& v) {
    const auto& f = basis.field();
    if (v.size() != basis.cols()) throw ShapeMismatch("coordinate vector length mismatch");
    // Solve basis^T x^T = v^T.
    Matrix column = Matrix::generate(f, v.size(), 1, [&](std::size_t i, std::size_t) { return v[i]; });
    Matrix sys = hstack(transpose(basis), column);
    auto buf = detail::copy_data(sys);
    auto piv = detail::eliminate(f, buf, sys.rows(), sys.cols(), nullptr, 0, true);
    const std::size_t k = basis.rows();
    if (!piv.empty() && piv.back() == k) throw OutOfRange("vector not in span");
    Vector x(k, f.zero());
    for (std::size_t i = 0; i < piv.size(); ++i) x[piv[i]] = buf[i * sys.cols() + k];
    return x;
}

/// Basis (rows) of the intersection of two row spaces given by independent rows.
inline Matrix intersect_row_spaces(const Matrix& a, const Matrix& b) {
    const auto& f = a.field();
    if (a.rows() == 0 || b.rows() == 0) return Matrix(f, 0, a.cols());
    // x*a = y*b  <=>  (x, -y) in the left kernel of (a; b).
    auto ker = left_kernel_basis(vstack(a, b));
    std::vector<Vector> rows;
    for (const auto& w : ker) {
        Vector x(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(a.rows()));
        rows.push_back(x * a);
    }
    if (rows.empty()) return Matrix(f, 0, a.cols());
    return row_basis(Matrix::from_rows(f, rows, a.cols()));
}

/// Some x with a * x = b (b a column, returned as a vector), free
/// variables set to zero. Throws OutOfRange if the system is inconsistent.
inline Vector solve_right(const Matrix& a, const Vector& b) {
    const auto& f = a.field();
    if (b.size() != a.rows()) throw ShapeMismatch("right-hand side length mismatch");
    Matrix column = Matrix::generate(f, b.size(), 1, [&](std::size_t i, std::size_t) { return b[i]; });
    Matrix sys = hstack(a, column);
    auto buf = detail::copy_data(sys);
    auto piv = detail::eliminate(f, buf, sys.rows(), sys.cols(), nullptr, 0, true);
    if (!piv.empty() && piv.back() == a.cols()) throw OutOfRange("linear system is inconsistent");
    Vector x(a.cols(), f.zero());
    for (std::size_t i = 0; i < piv.size(); ++i) x[piv[i]] = buf[i * sys.cols() + a.cols()];
    return x;
}

/// Incrementally grown row space kept in echelon form. Each stored row also
/// remembers its expression in terms of the vectors inserted so far, so a
/// vector inside the span can be written back in those terms.
class RowSpan {
public:
    RowSpan(Field f, std::size_t dim) : f_(std::move(f)), dim_(dim) {}

    std::size_t dim() const noexcept { return rows_.size(); }
    std::size_t ambient() const noexcept { return dim_; }

    /// Residual of v against the span and the combination c of inserted
    /// vectors with v = residual + sum c_i inserted_i.
    std::pair<Vector, Vector> reduce(const Vector& v) const {
        Vector r = v, c(inserted_, f_.zero());
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const FieldElement x = r[pivots_[i]];
            if (x.code == 0) continue;
            for (std::size_t j = pivots_[i]; j < dim_; ++j) r[j] = f_.sub(r[j], f_.mul(x, rows_[i][j]));
            for (std::size_t j = 0; j < inserted_; ++j) c[j] = f_.add(c[j], f_.mul(x, combos_[i][j]));
        }
        return {std::move(r), std::move(c)};
    }

    bool contains(const Vector& v) const {
        auto r = reduce(v).first;
        return std::all_of(r.begin(), r.end(), [](FieldElement e) { return e.code == 0; });
    }

    /// Adds v; returns false (and records nothing) when v is already in the span.
    bool insert(const Vector& v) {
        auto [r, c] = reduce(v);
        std::size_t p = 0;
        while (p < dim_ && r[p].code == 0) ++p;
        if (p == dim_) return false;
        for (auto& old : combos_) old.push_back(f_.zero());
        for (auto& e : c) e = f_.neg(e);
        c.push_back(f_.one());
        ++inserted_;
        const FieldElement inv = f_.inv(r[p]);
        for (auto& e : r) e = f_.mul(e, inv);
        for (auto& e : c) e = f_.mul(e, inv);
        rows_.push_back(std::move(r));
        combos_.push_back(std::move(c));
        pivots_.push_back(p);
        return true;
    }

private:
    Field f_;
    std::size_t dim_;
    std::size_t inserted_ = 0;
    std::vector<Vector> rows_, combos_;
    std::vector<std::size_t> pivots_;
};

/// Candidate rows of `pool` appended greedily to `base` while independent.
inline Matrix extend_basis(const Matrix& base, const Matrix& pool) {
    Matrix all = vstack(base, pool);
    std::vector<Vector> rows;
    for (auto i : independent_rows(all)) rows.push_back(all.row(i));
    return Matrix::from_rows(base.field(), rows, base.cols());
}

inline std::string format(const Matrix& m) {
    std::string s;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (i) s += ";";
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) s += ",";
            s += m.field().format(m(i, j));
        }
    }
    return s;
}

namespace detail {
/// Split on `sep` outside of square brackets.
inline std::vector<std::string_view> split_top(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '[') ++depth;
        if (s[i] == ']') --depth;
        if (s[i] == sep && depth == 0) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    out.push_back(s.substr(start));
    return out;
}
}  // namespace detail

/// Rows separated by ';', entries by ','. An empty string is the 0x0 matrix.
inline Matrix parse_matrix(const Field& f, std::string_view text) {
    auto s = detail::trim(text);
    if (s.empty()) return Matrix(f, 0, 0);
    std::vector<FieldElement> data;
    std::size_t cols = 0, rows = 0;
    for (auto row : detail::split_top(s, ';')) {
        auto entries = detail::split_top(detail::trim(row), ',');
        if (rows == 0) cols = entries.size();
        if (entries.size() != cols) throw ParseError("ragged matrix text");
        for (auto e : entries) data.push_back(f.parse_element(e));
        ++rows;
    }
    return Matrix(f, rows, cols, std::move(data));
}

}  // namespace ultrageo
