#include <ultrageo/forms.hpp>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace ultrageo;
using namespace ultrageo::testing;

namespace {

Matrix I(const Field& f, std::size_t n) { return Matrix::identity(f, n); }

// Q and the polar form evaluated straight from the stored matrices, entry by entry.
FieldElement oracle_q(const FormSpace& s, const Vector& v) {
    const auto& f = s.field();
    FieldElement acc = f.zero();
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) {
            const FieldElement c = s.sesquilinear() ? f.conj(v[j]) : v[j];
            acc = f.add(acc, f.mul(f.mul(v[i], s.gram()(i, j)), c));
        }
    return acc;
}

FieldElement oracle_phi(const FormSpace& s, const Vector& u, const Vector& v) {
    const auto& f = s.field();
    FieldElement acc = f.zero();
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) {
            const FieldElement c = s.sesquilinear() ? f.conj(v[j]) : v[j];
            acc = f.add(acc, f.mul(f.mul(u[i], s.polar()(i, j)), c));
        }
    return acc;
}

// Isometry check on every pair of unit vectors, without matrix products.
void expect_isometry(const FormSpace& s, const Matrix& h) {
    ASSERT_TRUE(is_invertible(h));
    const std::size_t n = s.dim();
    for (std::size_t i = 0; i < n; ++i) {
        if (s.kind() == FormKind::quadratic) {
            EXPECT_EQ(oracle_q(s, h.row(i)), s.gram()(i, i));
        }
        for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(oracle_phi(s, h.row(i), h.row(j)), s.polar()(i, j));
    }
    if (s.kind() == FormKind::quadratic) {
        SplitMix64 rng(3);
        for (int k = 0; k < 20; ++k) {
            const Vector v = random_matrix(s.field(), 1, n, rng).row(0);
            EXPECT_EQ(oracle_q(s, v * h), oracle_q(s, v));
        }
    }
}

void expect_standard_basis(const FormSpace& s, const StandardBasis& b) {
    const auto& f = s.field();
    const Matrix m = b.matrix(f, s.dim());
    EXPECT_EQ(rank(m), s.dim());
    if (b.orthonormal) {
        EXPECT_EQ(s.gram_of(m), I(f, s.dim()));
        return;
    }
    const auto& hp = b.hyperbolic_pairs;
    for (std::size_t i = 0; i < hp.size(); ++i) {
        EXPECT_EQ(oracle_q(s, hp[i].first).code, 0u);
        EXPECT_EQ(oracle_q(s, hp[i].second).code, 0u);
        for (std::size_t j = 0; j < hp.size(); ++j) {
            EXPECT_EQ(oracle_phi(s, hp[i].first, hp[j].second), i == j ? f.one() : f.zero());
            EXPECT_EQ(oracle_phi(s, hp[i].first, hp[j].first).code, 0u);
            EXPECT_EQ(oracle_phi(s, hp[i].second, hp[j].second).code, 0u);
        }
        for (const auto& t : b.tail) {
            EXPECT_EQ(oracle_phi(s, hp[i].first, t).code, 0u);
            EXPECT_EQ(oracle_phi(s, hp[i].second, t).code, 0u);
        }
    }
}

// Witt index by counting: the largest totally singular subspace is found by
// searching over all vectors of tiny spaces.
std::size_t brute_isotropic_count(const FormSpace& s) {
    const auto& f = s.field();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < s.dim(); ++i) total *= f.order();
    std::size_t count = 0;
    for (std::uint64_t c = 1; c < total; ++c) {
        Vector v(s.dim());
        std::uint64_t x = c;
        for (auto& e : v) {
            e = FieldElement{static_cast<std::uint32_t>(x % f.order())};
            x /= f.order();
        }
        count += oracle_q(s, v).code == 0;
    }
    return count;
}

}  // namespace

TEST(FormSpace, ValidatesSymmetry) {
    auto f = Field::prime(5);
    EXPECT_THROW(FormSpace::make(FormKind::symmetric, Matrix::from_integers(f, {{1, 2}, {3, 1}})), WrongSymmetry);
    EXPECT_THROW(FormSpace::make(FormKind::alternating, Matrix::from_integers(f, {{1, 0}, {0, 0}})), NotAlternating);
    EXPECT_THROW(FormSpace::make(FormKind::hermitian, I(f, 2)), InvalidField);
    EXPECT_THROW(FormSpace::make(FormKind::symmetric, Matrix(f, 2, 3)), ShapeMismatch);
    auto q = FormSpace::make(FormKind::quadratic, Matrix::from_integers(f, {{1, 2}, {3, 4}}));
    EXPECT_EQ(q.gram(), Matrix::from_integers(f, {{1, 0}, {0, 4}}));
    EXPECT_EQ(q.polar(), Matrix::from_integers(f, {{2, 0}, {0, 3}}));
}

TEST(FormSpace, QuadraticInCharacteristicTwoKeepsQ) {
    auto f = Field::prime(2);
    // Same polar form, different Q.
    auto a = FormSpace::make(FormKind::quadratic, Matrix::from_integers(f, {{0, 1}, {0, 0}}));
    auto b = FormSpace::make(FormKind::quadratic, Matrix::from_integers(f, {{1, 1}, {0, 1}}));
    EXPECT_EQ(a.polar(), b.polar());
    EXPECT_EQ(brute_isotropic_count(a), 2u);
    EXPECT_EQ(brute_isotropic_count(b), 0u);
    auto defective = FormSpace::make(FormKind::quadratic, Matrix::from_integers(f, {{0, 1, 0}, {0, 0, 0}, {0, 0, 1}}));
    EXPECT_FALSE(defective.polar_nondegenerate());
    EXPECT_TRUE(defective.is_nonsingular());
}

TEST(FormSpace, TextRoundTrip) {
    auto f = Field::parse("3^2");
    auto s = FormSpace::make(FormKind::hermitian, I(f, 3));
    auto back = FormSpace::parse(f, s.format());
    EXPECT_EQ(back.kind(), FormKind::hermitian);
    EXPECT_EQ(back.gram(), s.gram());
    EXPECT_THROW(FormSpace::parse(f, "bogus:1"), ParseError);
    EXPECT_THROW(FormSpace::parse(f, "symmetric 1"), ParseError);
}

TEST(Congruence, SkewExamples) {
    auto f = Field::prime(3);
    auto z = skew_congruence_normal_form(Matrix(f, 3, 3));
    EXPECT_EQ(z.c, I(f, 3));
    EXPECT_TRUE(z.d.is_zero());
    auto j = Matrix::from_integers(f, {{0, 1}, {-1, 0}});
    auto cj = skew_congruence_normal_form(j);
    EXPECT_EQ(cj.c, I(f, 2));
    EXPECT_EQ(cj.d, j);
    EXPECT_THROW(skew_congruence_normal_form(Matrix::from_integers(f, {{1, 0}, {0, 0}})), NotAlternating);
}

TEST(Congruence, SkewRankFourOverGF3) {
    auto f = Field::prime(3);
    SplitMix64 rng(42);
    int seen = 0;
    for (int trial = 0; trial < 200 && seen < 20; ++trial) {
        auto a = random_matrix(f, 4, 6, rng);
        auto j = direct_sum(Matrix::from_integers(f, {{0, 1}, {-1, 0}}), Matrix::from_integers(f, {{0, 1}, {-1, 0}}));
        auto k = transpose(a) * j * a;
        if (rank(k) != 4) continue;
        ++seen;
        auto cf = skew_congruence_normal_form(k);
        EXPECT_EQ(cf.blocks, 2u);
        EXPECT_EQ(cf.diagonal, 0u);
        EXPECT_EQ(cf.c * cf.d * transpose(cf.c), k);
    }
    EXPECT_EQ(seen, 20);
}

TEST(Congruence, SymmetricExamples) {
    auto f3 = Field::prime(3);
    auto d = symmetric_congruence_normal_form(I(f3, 2));
    EXPECT_EQ(2 * d.blocks + d.diagonal, 2u);
    EXPECT_EQ(d.c * d.d * transpose(d.c), I(f3, 2));

    auto f2 = Field::prime(2);
    auto h = Matrix::from_integers(f2, {{0, 1}, {1, 0}});
    auto ch = symmetric_congruence_normal_form(h);
    EXPECT_EQ(ch.blocks, 1u);
    EXPECT_EQ(ch.diagonal, 0u);
    EXPECT_EQ(ch.c * ch.d * transpose(ch.c), h);

    auto z = symmetric_congruence_normal_form(Matrix(f3, 2, 2));
    EXPECT_EQ(z.c, I(f3, 2));
    EXPECT_THROW(symmetric_congruence_normal_form(Matrix::from_integers(f3, {{0, 1}, {2, 0}})), WrongSymmetry);
}

class CongruenceProperties : public ::testing::TestWithParam<const char*> {};

TEST_P(CongruenceProperties, ReconstructsRandomInputs) {
    auto f = Field::parse(GetParam());
    SplitMix64 rng(8);
    for (int trial = 0; trial < 80; ++trial) {
        const std::size_t n = 1 + rng.below(7);
        const std::size_t r = rng.below(n + 1);
        auto a = random_matrix(f, r, n, rng);
        auto dg = Matrix::generate(f, r, r, [&](std::size_t i, std::size_t j) { return i == j ? random_element(f, rng) : f.zero(); });
        auto sym = transpose(a) * dg * a;
        auto m = random_matrix(f, n, n, rng);
        sym = sym + m * transpose(m);
        auto cs = symmetric_congruence_normal_form(sym);
        EXPECT_EQ(cs.c * cs.d * transpose(cs.c), sym);
        EXPECT_EQ(cs.rank(), rank(sym));

        auto alt = m - transpose(m);
        if (f.characteristic() == 2)
            alt = Matrix::generate(f, n, n, [&](std::size_t i, std::size_t j) { return i == j ? f.zero() : (i < j ? m(i, j) : m(j, i)); });
        auto ca = skew_congruence_normal_form(alt);
        EXPECT_EQ(ca.c * ca.d * transpose(ca.c), alt);
        EXPECT_EQ(2 * ca.blocks, rank(alt));
        if (n <= 3 && f.order() <= 3) {
            EXPECT_EQ(cs.rank(), brute_force_rank(sym));
        }

        if (f.involution_enabled()) {
            auto herm = m + adjoint(m);
            auto ch = hermitian_congruence_normal_form(herm);
            EXPECT_EQ(ch.c * ch.d * adjoint(ch.c), herm);
            EXPECT_EQ(ch.blocks, 0u);
            EXPECT_EQ(ch.diagonal, rank(herm));
        }
        auto anti = f.involution_enabled() ? m - adjoint(m) : m - transpose(m);
        auto cn = antihermitian_congruence_normal_form(anti);
        EXPECT_EQ(cn.c * cn.d * (f.involution_enabled() ? adjoint(cn.c) : transpose(cn.c)), anti);
        EXPECT_EQ(cn.rank(), rank(anti));
    }
}

INSTANTIATE_TEST_SUITE_P(Fields, CongruenceProperties, ::testing::Values("2", "3", "2^2", "5", "3^2", "2^3", "7"));

TEST(StandardBasis, HyperbolicPlane) {
    auto f = Field::prime(5);
    auto s = FormSpace::make(FormKind::quadratic, Matrix::from_integers(f, {{0, 1}, {0, 0}}));
    auto b = standard_basis(s);
    EXPECT_EQ(b.type, 1);
    EXPECT_EQ(b.type_tag(), "(i)");
    EXPECT_EQ(b.hyperbolic_pairs.size(), 1u);
    expect_standard_basis(s, b);
}

TEST(StandardBasis, DimThreeOverGF5) {
    auto f = Field::prime(5);
    // Hyperbolic plane plus the anisotropic line Q(z) = z^2.
    auto s = FormSpace::make(FormKind::quadratic, Matrix::from_integers(f, {{0, 1, 0}, {0, 0, 0}, {0, 0, 1}}));
    auto b = standard_basis(s);
    EXPECT_EQ(b.type, 3);
    EXPECT_EQ(b.hyperbolic_pairs.size(), 1u);
    EXPECT_EQ(b.tail.size(), 1u);
    expect_standard_basis(s, b);
}

TEST(StandardBasis, HermitianOverGF9IsOrthonormal) {
    auto f = Field::parse("3^2");
    SplitMix64 rng(4);
    auto s = random_form_space(f, FormKind::hermitian, 4, rng);
    auto b = standard_basis(s);
    EXPECT_TRUE(b.orthonormal);
    EXPECT_EQ(b.hyperbolic_pairs.size(), 2u);
    EXPECT_TRUE(b.tail.empty());
    EXPECT_EQ(s.gram_of(b.matrix(f, 4)), I(f, 4));
}

TEST(StandardBasis, WittIndexMatchesCount) {
    // Over GF(q), a non-singular quadratic space of dim 2m+tail has a number of
    // nonzero singular vectors determined by its type; compare with enumeration.
    for (const char* spec : {"2", "3", "5", "2^2"}) {
        auto f = Field::parse(spec);
        SplitMix64 rng(12);
        const std::uint64_t q = f.order();
        for (int trial = 0; trial < 12; ++trial) {
            const std::size_t n = 1 + rng.below(4);
            auto s = random_form_space(f, FormKind::quadratic, n, rng);
            auto b = standard_basis(s);
            expect_standard_basis(s, b);
            const std::size_t m = b.hyperbolic_pairs.size();
            std::uint64_t qm = 1;
            for (std::size_t i = 0; i < m; ++i) qm *= q;
            // Singular vectors in the three types: q^(2m-1)+q^m-q^(m-1)-1,
            // q^(2m+1)-q^(m+1)+q^m-1 and q^(2m)-1.
            std::uint64_t want = 0;
            if (b.type == 1) want = qm * qm / q + qm - qm / q - 1;
            if (b.type == 2) want = qm * qm * q - qm * q + qm - 1;
            if (b.type == 3) want = qm * qm - 1;
            if (b.type == 1 && m == 0) want = 0;
            EXPECT_EQ(brute_isotropic_count(s), want) << spec << " n=" << n << " type=" << b.type_tag();
        }
    }
}

TEST(StandardBasis, RejectsSingularSpaces) {
    auto f = Field::prime(3);
    EXPECT_THROW(standard_basis(FormSpace::make(FormKind::quadratic, Matrix::from_integers(f, {{1, 0}, {0, 0}}))), SingularSpace);
    EXPECT_THROW(standard_basis(FormSpace::make(FormKind::symmetric, I(f, 2))), OutOfRange);
}

TEST(SplitOff, Examples) {
    auto f = Field::prime(3);
    auto plane = FormSpace::make(FormKind::quadratic, Matrix::from_integers(f, {{0, 1}, {0, 0}}));
    EXPECT_EQ(split_off_nondegenerate(plane, I(f, 2)).rows(), 2u);
    EXPECT_EQ(split_off_nondegenerate(plane, Matrix::from_integers(f, {{1, 0}})).rows(), 0u);

    SplitMix64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        auto s = random_form_space(f, FormKind::quadratic, 6, rng);
        auto w = row_basis(random_matrix(f, 4, 6, rng));
        auto d = split_off_nondegenerate(s, w);
        EXPECT_GE(d.rows() + (6 - w.rows()), w.rows());
        EXPECT_EQ(rank(vstack(w, d)), w.rows());
        if (d.rows() > 0) {
            EXPECT_TRUE(is_invertible(s.gram_of(d)));
        }
        auto perp = Matrix::from_rows(f, left_kernel_basis(s.polar() * transpose(d)), 6);
        EXPECT_EQ(rank(vstack(d, perp)), 6u);
    }
}

TEST(WittComplete, Examples) {
    auto f = Field::prime(5);
    auto plane = FormSpace::make(FormKind::quadratic, Matrix::from_integers(f, {{0, 1}, {0, 0}}));
    EXPECT_EQ(witt_complete(plane, Matrix(f, 0, 2), Matrix(f, 0, 2)), I(f, 2));

    auto e = Matrix::from_integers(f, {{1, 0}});
    auto e2 = Matrix::from_integers(f, {{0, 3}});
    auto h = witt_complete(plane, e, e2);
    EXPECT_EQ(e * h, e2);
    expect_isometry(plane, h);

    auto swap = Matrix::from_integers(f, {{0, 1}, {1, 0}});
    EXPECT_EQ(witt_complete(plane, I(f, 2), swap), swap);

    EXPECT_THROW(witt_complete(plane, e, Matrix::from_integers(f, {{1, 1}})), NotIsometry);
    EXPECT_THROW(witt_complete(FormSpace::make(FormKind::symmetric, I(f, 2)), e, e), OutOfRange);
}

class WittProperties : public ::testing::TestWithParam<std::tuple<const char*, FormKind>> {};

TEST_P(WittProperties, ExtendsRandomPartialIsometries) {
    auto [spec, kind] = GetParam();
    auto f = Field::parse(spec);
    SplitMix64 rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 1 + rng.below(7);
        auto s = random_form_space(f, kind, n, rng);
        if (!s.polar_nondegenerate()) continue;
        auto g = random_isometry(s, 2 * n + 1, rng);
        ASSERT_TRUE(s.preserves(g));
        const std::size_t k = rng.below(n + 1);
        auto u = row_basis(random_matrix(f, k, n, rng));
        auto h = witt_complete(s, u, u * g);
        EXPECT_EQ(u * h, u * g);
        expect_isometry(s, h);
    }
}

TEST_P(WittProperties, ExtendBoundOnOrthogonalSplits) {
    auto [spec, kind] = GetParam();
    auto f = Field::parse(spec);
    SplitMix64 rng(57);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.below(9);
        const std::size_t sd = rng.below(3);
        auto s = random_form_space(f, kind, n, rng);
        if (!s.polar_nondegenerate() || sd >= n) continue;
        if (kind == FormKind::quadratic && f.characteristic() == 2 && sd % 2) continue;
        auto [l, sb] = random_orthogonal_split(s, sd, rng);
        auto g = random_isometry(s, 2 * n, rng);
        auto r = witt_extend(s, l, sb, g);
        EXPECT_LE(r.defect, 3 * sd);
        EXPECT_EQ(r.defect, rank(l * g - r.h * l));
        expect_isometry(s.restrict(l), r.h);
        for (std::size_t i = 0; i < r.u.rows(); ++i) {
            auto c = coordinates(l, r.u.row(i));
            EXPECT_EQ(c * r.h, coordinates(l, r.u.row(i) * g));
        }
        if (sd == 0) {
            EXPECT_EQ(r.h, l * g * inverse(l));
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Kinds, WittProperties,
                         ::testing::Values(std::make_tuple("3", FormKind::quadratic), std::make_tuple("5", FormKind::quadratic),
                                           std::make_tuple("2", FormKind::quadratic), std::make_tuple("2^2", FormKind::quadratic),
                                           std::make_tuple("2^2", FormKind::hermitian), std::make_tuple("3^2", FormKind::hermitian)));

TEST(WittExtend, DimTenOverGF3) {
    auto f = Field::prime(3);
    SplitMix64 rng(10);
    auto s = random_form_space(f, FormKind::quadratic, 10, rng);
    for (int trial = 0; trial < 10; ++trial) {
        auto [l, sb] = random_orthogonal_split(s, 2, rng);
        auto g = random_isometry(s, 25, rng);
        auto r = witt_extend(s, l, sb, g);
        EXPECT_LE(r.defect, 6u);
        expect_isometry(s.restrict(l), r.h);
    }
    auto [l, sb] = random_orthogonal_split(s, 2, rng);
    EXPECT_EQ(witt_extend(s, l, sb, I(f, 10)).h, I(f, 8));
    // -1 is an isometry over GF(3); a shear is not.
    auto shear = Matrix::generate(f, 10, 10, [&](std::size_t i, std::size_t j) { return i == j || (i == 0 && j == 1) ? f.one() : f.zero(); });
    ASSERT_FALSE(s.preserves(shear));
    EXPECT_THROW(witt_extend(s, l, sb, shear), NotIsometry);
}

TEST(WittExtend, DefectiveCharacteristicTwo) {
    auto f = Field::prime(2);
    SplitMix64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + 2 * rng.below(3);
        FormSpace s = random_form_space(f, FormKind::quadratic, n, rng);
        if (s.polar_nondegenerate()) continue;
        auto [l, sb] = random_orthogonal_split(s, 1, rng);
        auto g = random_isometry(s, 2 * n, rng);
        auto r = witt_extend(s, l, sb, g);
        EXPECT_LE(r.defect, 3u);
        expect_isometry(s.restrict(l), r.h);
    }
}

TEST(Reflections, AreIsometriesOfOrderTwo) {
    for (auto [spec, kind] : {std::pair{"5", FormKind::quadratic}, std::pair{"2^2", FormKind::quadratic},
                              std::pair{"3^2", FormKind::hermitian}}) {
        auto f = Field::parse(spec);
        SplitMix64 rng(6);
        auto s = random_form_space(f, kind, 4, rng);
        for (int i = 0; i < 10; ++i) {
            auto v = random_matrix(f, 1, 4, rng).row(0);
            if (s.quad(v).code == 0) continue;
            auto r = reflection(s, v);
            expect_isometry(s, r);
            EXPECT_EQ(rank(r - I(f, 4)), 1u);
            if (kind == FormKind::quadratic) {
                EXPECT_EQ(r * r, I(f, 4));
            }
        }
    }
}
