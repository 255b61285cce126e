#include <ultrageo/linear_split.hpp>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace ultrageo;
using namespace ultrageo::testing;

namespace {

Matrix jordan_unipotent(const Field& f, std::size_t n) {
    return Matrix::generate(f, n, n, [&](std::size_t i, std::size_t j) {
        return (i == j || j == i + 1) ? f.one() : f.zero();
    });
}

std::size_t rk_minus(const Matrix& g, FieldElement lambda) {
    return rank(g - Matrix::scalar(g.field(), g.rows(), lambda));
}

// A random element with a large eigenvalue-1 space and several Jordan blocks,
// conjugated to hide the structure. Exercises the multi-summand recursion.
Matrix structured_sl(const Field& f, std::size_t n, SplitMix64& rng) {
    std::vector<FieldElement> data(n * n, f.zero());
    std::size_t i = 0;
    while (i < n) {
        const std::size_t len = std::min<std::size_t>(n - i, 1 + rng.below(4));
        const FieldElement ev = rng.below(3) == 0 ? random_nonzero(f, rng) : f.one();
        for (std::size_t a = 0; a < len; ++a) {
            data[(i + a) * n + i + a] = ev;
            if (a + 1 < len) data[(i + a) * n + i + a + 1] = f.one();
        }
        i += len;
    }
    Matrix core(f, n, n, data);
    const FieldElement d = det(core);
    std::vector<FieldElement> fix(n, f.one());
    fix[0] = f.inv(d);
    core = Matrix::diagonal(f, fix) * core;
    const auto c = random_invertible(f, n, rng);
    return inverse(c) * core * c;
}

void expect_summands_valid(const Matrix& g, const std::vector<CyclicSummand>& parts) {
    const auto& f = g.field();
    const std::size_t n = g.rows();
    std::vector<Vector> all;
    const Matrix gm1 = g - Matrix::identity(f, n);
    for (const auto& s : parts) {
        ASSERT_GE(s.dim(), 1u);
        for (std::size_t i = 0; i + 1 < s.dim(); ++i) EXPECT_EQ(s.basis[i] * gm1, s.basis[i + 1]);
        const Matrix sm = Matrix::from_rows(f, s.basis, n);
        // Invariant: adding the images does not grow the span.
        const Matrix img = Matrix::from_rows(f, {s.basis.back() * g}, n);
        EXPECT_EQ(rank(vstack(sm, img)), s.dim());
        EXPECT_EQ(rank(sm), s.dim());
        all.insert(all.end(), s.basis.begin(), s.basis.end());
    }
    ASSERT_EQ(all.size(), n);
    EXPECT_TRUE(is_invertible(Matrix::from_rows(f, all, n)));
}

void expect_gl_contract(const Matrix& g, FieldElement lambda, const Rational& phi1) {
    const auto& f = g.field();
    const auto r = static_cast<std::int64_t>(rk_minus(g, lambda));
    auto s = split_gl(g, lambda, phi1);
    EXPECT_EQ(s.h * s.k, g);
    EXPECT_LE(abs(Rational(static_cast<std::int64_t>(rk_minus(s.h, lambda))) - phi1), Rational(2));
    EXPECT_LE(abs(Rational(static_cast<std::int64_t>(rk_minus(s.k, f.one()))) - (r - phi1)), Rational(2));
}

void expect_sl_contract(const Matrix& g, FieldElement lambda, const Rational& phi1) {
    const auto& f = g.field();
    const auto r = static_cast<std::int64_t>(rk_minus(g, lambda));
    auto s = split_sl(g, lambda, phi1);
    EXPECT_EQ(s.h * s.k, g);
    EXPECT_EQ(det(s.h), f.one());
    EXPECT_EQ(det(s.k), f.one());
    EXPECT_LE(abs(Rational(static_cast<std::int64_t>(rk_minus(s.h, lambda))) - phi1), Rational(3));
    EXPECT_LE(abs(Rational(static_cast<std::int64_t>(rk_minus(s.k, f.one()))) - (r - phi1)), Rational(3));
}

}  // namespace

TEST(RankDistance, Examples) {
    auto f3 = Field::prime(3);
    auto one = Matrix::identity(f3, 4);
    EXPECT_EQ(rank_distance(one, one), Rational(0));
    EXPECT_EQ(rank_distance(one, -one), Rational(1));

    auto f5 = Field::prime(5);
    auto d = Matrix::from_integers(f5, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 1}});
    EXPECT_EQ(rank_distance(Matrix::identity(f5, 4), d), Rational(1, 4));
    EXPECT_THROW(rank_distance(Matrix::identity(f5, 2), Matrix::identity(f5, 3)), ShapeMismatch);
}

TEST(RankDistance, ConjugationInvariance) {
    auto f = Field::prime(5);
    SplitMix64 rng(8);
    for (int i = 0; i < 50; ++i) {
        const std::size_t n = 2 + rng.below(8);
        auto g = random_invertible(f, n, rng), c = random_invertible(f, n, rng);
        auto one = Matrix::identity(f, n);
        EXPECT_EQ(rank_distance(one, g), rank_distance(one, inverse(c) * g * c));
    }
}

TEST(ProjectiveRankDistance, Examples) {
    auto f5 = Field::prime(5);
    auto one = Matrix::identity(f5, 4);
    auto y = Matrix::diagonal(f5, std::vector<FieldElement>{FieldElement{2}, FieldElement{2}, FieldElement{2}, FieldElement{1}});
    // Oracle: scan every scalar by hand.
    std::size_t best = 4;
    for (std::uint32_t c = 1; c < 5; ++c) best = std::min(best, brute_force_rank(one - scale(FieldElement{c}, y)));
    EXPECT_EQ(Rational(static_cast<std::int64_t>(best), 4), Rational(1, 4));
    EXPECT_EQ(projective_rank_distance(one, y), Rational(1, 4));
    EXPECT_EQ(projective_rank_distance(y, scale(FieldElement{3}, y)), Rational(0));
}

TEST(ProjectiveRankDistance, SymmetryTriangleAndScaling) {
    for (const char* spec : {"2", "3", "2^2", "5", "3^2"}) {
        auto f = Field::parse(spec);
        SplitMix64 rng(21);
        for (int i = 0; i < 40; ++i) {
            const std::size_t n = 2 + rng.below(7);
            auto x = random_invertible(f, n, rng), y = random_invertible(f, n, rng), z = random_invertible(f, n, rng);
            auto dxy = projective_rank_distance(x, y);
            EXPECT_EQ(dxy, projective_rank_distance(y, x));
            EXPECT_LE(dxy, projective_rank_distance(x, z) + projective_rank_distance(z, y));
            auto mu = random_nonzero(f, rng);
            EXPECT_EQ(projective_rank_distance(scale(mu, x), y), dxy);
        }
    }
}

TEST(CyclicDecomposition, Examples) {
    auto f3 = Field::prime(3);
    auto j = jordan_unipotent(f3, 4);
    auto one = cyclic_decomposition(j);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].dim(), 4u);

    auto id = cyclic_decomposition(Matrix::identity(f3, 3));
    ASSERT_EQ(id.size(), 3u);
    for (const auto& s : id) EXPECT_EQ(s.dim(), 1u);

    auto f2 = Field::prime(2);
    auto g = Matrix::from_integers(f2, {{1, 1, 0}, {0, 1, 0}, {0, 0, 1}});
    auto parts = cyclic_decomposition(g);
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[0].dim() + parts[1].dim(), 3u);
    EXPECT_EQ(std::max(parts[0].dim(), parts[1].dim()), 2u);
    expect_summands_valid(g, parts);
}

TEST(CyclicDecomposition, RandomAndStructured) {
    for (const char* spec : {"2", "3", "2^2", "5", "3^2"}) {
        auto f = Field::parse(spec);
        SplitMix64 rng(4);
        for (int i = 0; i < 40; ++i) {
            const std::size_t n = 1 + rng.below(14);
            auto g = i % 2 ? random_invertible(f, n, rng) : structured_sl(f, n, rng);
            expect_summands_valid(g, cyclic_decomposition(g));
        }
    }
}

TEST(SplitGL, ScalarAndEndpoints) {
    auto f = Field::prime(5);
    auto lam = FieldElement{3};
    auto g = Matrix::scalar(f, 4, lam);
    auto s = split_gl(g, lam, Rational(0));
    EXPECT_EQ(s.h, g);
    EXPECT_EQ(s.k, Matrix::identity(f, 4));
    EXPECT_EQ(s.slack, Rational(0));

    SplitMix64 rng(1);
    auto x = random_invertible(f, 5, rng);
    const auto r = static_cast<std::int64_t>(rk_minus(x, f.one()));
    auto full = split_gl(x, f.one(), Rational(r));
    EXPECT_EQ(full.h * full.k, x);
    EXPECT_LE(full.slack, Rational(2));

    EXPECT_THROW(split_gl(x, f.zero(), Rational(0)), OutOfRange);
    EXPECT_THROW(split_gl(x, f.one(), Rational(r + 1)), OutOfRange);
    EXPECT_THROW(split_gl(x, f.one(), Rational(-1)), OutOfRange);
}

TEST(SplitGL, JordanBlockBaseCase) {
    auto f = Field::prime(3);
    auto j = jordan_unipotent(f, 4);
    ASSERT_EQ(rk_minus(j, f.one()), 3u);
    auto s = split_gl(j, f.one(), Rational(3, 2));
    EXPECT_EQ(s.h * s.k, j);
    EXPECT_EQ(rk_minus(s.h, f.one()), 3u);
    EXPECT_LE(abs(Rational(static_cast<std::int64_t>(rk_minus(s.k, f.one()))) - Rational(3, 2)), Rational(2));
    ASSERT_FALSE(s.trace.empty());
    EXPECT_EQ(s.trace.back().branch, 'b');
}

TEST(SplitSL, Examples) {
    auto f = Field::prime(5);
    auto one = Matrix::identity(f, 3);
    auto s = split_sl(one, f.one(), Rational(0));
    EXPECT_EQ(s.h, one);
    EXPECT_EQ(s.k, one);

    auto g = Matrix::from_integers(f, {{2, 0}, {0, 3}});
    expect_sl_contract(g, f.one(), Rational(1));
    EXPECT_THROW(split_sl(Matrix::from_integers(f, {{2, 0}, {0, 1}}), f.one(), Rational(0)), NotSpecialLinear);
}

TEST(SplitSL, RandomSL10OverGF9) {
    auto f = Field::parse("3^2");
    SplitMix64 rng(10);
    for (int i = 0; i < 20; ++i) {
        auto g = random_sl(f, 10, rng);
        auto lam = best_scalar(g);
        expect_sl_contract(g, lam, Rational(static_cast<std::int64_t>(rk_minus(g, lam)), 2));
    }
}

class SplitProperties : public ::testing::TestWithParam<const char*> {};

TEST_P(SplitProperties, RandomizedContracts) {
    auto f = Field::parse(GetParam());
    SplitMix64 rng(77);
    for (int trial = 0; trial < 80; ++trial) {
        const std::size_t n = 2 + rng.below(24);
        const Matrix g = trial % 3 == 0 ? structured_sl(f, n, rng) : random_sl(f, n, rng);
        const auto lam = random_nonzero(f, rng);
        const auto r = static_cast<std::int64_t>(rk_minus(g, lam));
        const Rational phi1(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(4 * r + 1))), 4);
        expect_gl_contract(g, lam, phi1);
        expect_sl_contract(g, lam, phi1);
    }
}

INSTANTIATE_TEST_SUITE_P(Fields, SplitProperties, ::testing::Values("2", "3", "2^2", "5", "3^2"));

TEST(SplitSL, ExhaustiveSL2OverTinyFields) {
    for (const char* spec : {"2", "3"}) {
        auto f = Field::parse(spec);
        const auto q = f.order();
        std::size_t count = 0;
        for (std::uint32_t a = 0; a < q; ++a)
            for (std::uint32_t b = 0; b < q; ++b)
                for (std::uint32_t c = 0; c < q; ++c)
                    for (std::uint32_t d = 0; d < q; ++d) {
                        Matrix g(f, 2, 2, {FieldElement{a}, FieldElement{b}, FieldElement{c}, FieldElement{d}});
                        if (leibniz_det(g) != f.one()) continue;
                        ++count;
                        for (auto lam : nonzero_elements(f)) {
                            const auto r = static_cast<std::int64_t>(brute_force_rank(g - Matrix::scalar(f, 2, lam)));
                            for (std::int64_t num = 0; num <= 2 * r; ++num) expect_sl_contract(g, lam, Rational(num, 2));
                        }
                    }
        EXPECT_EQ(count, q == 2 ? 6u : 24u);
    }
}

TEST(NormalizeByE, Examples) {
    auto f = Field::prime(7);
    auto one = Matrix::identity(f, 4);
    auto e = normalize_by_E(one);
    EXPECT_EQ(e.m.lambda, f.one());
    EXPECT_EQ(e.x, one);

    auto mu = FieldElement{3};
    auto a = Matrix::scalar(f, 5, mu);
    auto s = normalize_by_E(a);
    EXPECT_EQ(s.m.matrix(f) * s.x, a);
    EXPECT_GE(5 - rk_minus(s.x, f.one()), 4u);
    for (std::uint32_t c = 1; c < 7; ++c)
        EXPECT_LE(5 - brute_force_rank(s.x - Matrix::scalar(f, 5, FieldElement{c})), 5 - rk_minus(s.x, f.one()) + 2);
    EXPECT_EQ(det(s.m.matrix(f)), f.one());
}

TEST(NormalizeByE, RandomGF7Dimension6) {
    auto f = Field::prime(7);
    SplitMix64 rng(6);
    for (int i = 0; i < 50; ++i) {
        auto a = random_invertible(f, 6, rng);
        auto s = normalize_by_E(a);
        EXPECT_EQ(s.m.matrix(f) * s.x, a);
        const auto k1 = 6 - rk_minus(s.x, f.one());
        for (std::uint32_t c = 1; c < 7; ++c) EXPECT_LE(6 - rk_minus(s.x, FieldElement{c}), k1 + 2);
    }
}

TEST(MidpointPSL, Examples) {
    auto f = Field::parse("2^2");
    SplitMix64 rng(12);
    auto x = random_sl(f, 6, rng);
    EXPECT_EQ(midpoint_psl(x, x), x);

    auto one = Matrix::identity(f, 8);
    auto y = structured_sl(f, 8, rng);
    auto z = midpoint_psl(one, y);
    EXPECT_EQ(det(z), f.one());
    const auto half = projective_rank_distance(one, y) / 2;
    EXPECT_LE(projective_rank_distance(one, z), half + Rational(3, 8));
    EXPECT_LE(projective_rank_distance(z, y), half + Rational(3, 8));
}

TEST(MidpointPSL, RandomSL20OverGF4) {
    auto f = Field::parse("2^2");
    SplitMix64 rng(13);
    for (int i = 0; i < 10; ++i) {
        auto x = random_sl(f, 20, rng), y = i % 2 ? random_sl(f, 20, rng) : x * structured_sl(f, 20, rng);
        auto z = midpoint_psl(x, y);
        const auto half = projective_rank_distance(x, y) / 2;
        EXPECT_LE(projective_rank_distance(x, z), half + Rational(3, 20));
        EXPECT_LE(projective_rank_distance(z, y), half + Rational(3, 20));
    }
}
