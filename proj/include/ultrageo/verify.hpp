#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "classical.hpp"
#include "error.hpp"
#include "forms.hpp"
#include "geodesic.hpp"
#include "linear_split.hpp"
#include "perm_split.hpp"
#include "rational.hpp"
#include "sampling.hpp"

namespace ultrageo {

/// Outcome of one property suite. Every check is recomputed from ranks,
/// determinants, supports and products; nothing is taken from the
/// constructors' own certificates.
struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::size_t checks = 0;
    std::size_t violations = 0;
    Rational worst{0};  // headline slack, documented per suite
    std::string first_failure;
    std::uint64_t digest = 0xcbf29ce484222325ULL;

    SuiteReport(std::string name, std::uint64_t s, std::size_t n) : suite(std::move(name)), seed(s), trials(n) {}

    bool ok() const noexcept { return violations == 0; }

    void absorb(std::string_view text) {
        for (unsigned char c : text) {
            digest ^= c;
            digest *= 0x100000001b3ULL;
        }
        digest ^= 0xff;
        digest *= 0x100000001b3ULL;
    }
    void check(bool cond, std::string_view what) {
        ++checks;
        if (cond) return;
        if (violations++ == 0) first_failure = std::string(what);
    }
    void note(const Rational& r) { worst = std::max(worst, r); }
};

inline std::string format_record(const SuiteReport& r) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(r.digest));
    std::string s = "suite=" + r.suite + " seed=" + std::to_string(r.seed) + " trials=" + std::to_string(r.trials) +
                    " checks=" + std::to_string(r.checks) + " violations=" + std::to_string(r.violations) +
                    " worst=" + format(r.worst) + " digest=" + hex;
    if (!r.ok()) s += " first_failure=\"" + r.first_failure + "\"";
    return s;
}

namespace detail {

inline const std::vector<std::string>& suite_fields() {
    static const std::vector<std::string> specs{"2", "3", "2^2", "5", "3^2"};
    return specs;
}

inline Field pick_field(SplitMix64& rng) { return Field::parse(suite_fields()[rng.below(suite_fields().size())]); }

inline Rational rank_rational(const Matrix& m) { return Rational(static_cast<std::int64_t>(rank(m))); }

inline Matrix minus_scalar(const Matrix& m, FieldElement lambda) {
    return m - Matrix::scalar(m.field(), m.rows(), lambda);
}

inline Rational mu(const Permutation& g) {
    std::int64_t moved = 0;
    for (std::size_t i = 0; i < g.size(); ++i) moved += g[i] != i;
    return Rational(moved);
}

inline bool parity_even(const Permutation& g) {
    std::vector<bool> seen(g.size(), false);
    std::size_t even_cycles = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (seen[i]) continue;
        std::size_t len = 0;
        for (std::size_t j = i; !seen[j]; j = g[j]) {
            seen[j] = true;
            ++len;
        }
        even_cycles += len % 2 == 0;
    }
    return even_cycles % 2 == 0;
}

/// Block-equation membership: g J g^* = J and det g = 1.
inline bool block_member(const Matrix& g, BlockGroup group) {
    const auto& f = g.field();
    if (!g.is_square() || g.rows() % 2) return false;
    const std::size_t n = g.rows() / 2;
    const Matrix one = Matrix::identity(f, n), z(f, n, n);
    const Matrix j = block(z, one, group == BlockGroup::Sp ? -one : one, z);
    const Matrix gs = group == BlockGroup::SU ? adjoint(g) : transpose(g);
    return g * j * gs == j && det(g) == f.one();
}

inline bool zero_block(const Matrix& m, std::size_t r, std::size_t c, std::size_t n) {
    return submatrix(m, r, c, n, n).is_zero();
}

inline bool identity_block(const Matrix& m, std::size_t r, std::size_t c, std::size_t n) {
    return submatrix(m, r, c, n, n) == Matrix::identity(m.field(), n);
}

/// The factor's matrix has the block shape of its tag.
inline bool factor_shape(const SubgroupFactor& s) {
    const Matrix m = s.matrix();
    const std::size_t n = s.n;
    switch (s.tag) {
        case FactorTag::U:
        case FactorTag::V: return identity_block(m, 0, 0, n) && identity_block(m, n, n, n) && zero_block(m, n, 0, n);
        case FactorTag::U_T:
        case FactorTag::V_T: return identity_block(m, 0, 0, n) && identity_block(m, n, n, n) && zero_block(m, 0, n, n);
        default: return zero_block(m, 0, n, n) && zero_block(m, n, 0, n);
    }
}

/// M + M^T = 0 with zero diagonal.
inline bool alternating(const Matrix& m) {
    if (!(m == -transpose(m))) return false;
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (m(i, i).code != 0) return false;
    return true;
}

inline Rational random_t(SplitMix64& rng, std::int64_t den) { return Rational(rng.between(0, den), den); }

}  // namespace detail

/// split_even on random even permutations; worst = max |mu_h - t mu_g|, |mu_k - (1-t) mu_g|.
inline SuiteReport suite_split_an(std::size_t trials, std::uint64_t seed) {
    SuiteReport r("splitAn", seed, trials);
    SplitMix64 rng(seed);
    static const std::size_t degrees[] = {6, 10, 50, 500};
    for (std::size_t i = 0; i < trials; ++i) {
        const std::size_t n = degrees[rng.below(4)];
        const auto g = random_even_permutation(n, rng);
        const Rational t = detail::random_t(rng, 64);
        try {
            const auto s = split_even(g, t);
            r.absorb(format(s.h));
            r.absorb(format(s.k));
            r.check(detail::parity_even(s.h) && detail::parity_even(s.k), "h or k is odd");
            r.check(s.h * s.k == g, "h k != g");
            const Rational e1 = abs(detail::mu(s.h) - t * detail::mu(g));
            const Rational e2 = abs(detail::mu(s.k) - (1 - t) * detail::mu(g));
            r.note(std::max(e1, e2));
            r.check(e1 <= Rational(3, 2) && e2 <= Rational(3, 2), "support bound exceeded");
        } catch (const Error& e) {
            r.check(false, e.code());
        }
    }
    return r;
}

/// split_gl and split_sl on random matrices; worst = max rank slack.
inline SuiteReport suite_split_sln(std::size_t trials, std::uint64_t seed) {
    SuiteReport r("splitSLn", seed, trials);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < trials; ++i) {
        const Field f = detail::pick_field(rng);
        const std::size_t n = 1 + rng.below(16);
        const bool special = rng.below(2) == 1;
        const Matrix g = special ? random_sl(f, n, rng) : random_invertible(f, n, rng);
        const FieldElement lambda = random_nonzero(f, rng);
        const auto rk = static_cast<std::int64_t>(rank(detail::minus_scalar(g, lambda)));
        const Rational phi1(rng.between(0, 2 * rk), 2);
        try {
            const auto s = special ? split_sl(g, lambda, phi1) : split_gl(g, lambda, phi1);
            r.absorb(format(s.h));
            r.absorb(format(s.k));
            r.check(s.h * s.k == g, "h k != g");
            const Rational slack = std::max(abs(detail::rank_rational(detail::minus_scalar(s.h, lambda)) - phi1),
                                            abs(detail::rank_rational(detail::minus_scalar(s.k, f.one())) - (rk - phi1)));
            r.note(slack);
            r.check(slack <= (special ? 3 : 2), "rank slack exceeded");
            if (special) r.check(det(s.h) == f.one() && det(s.k) == f.one(), "det != 1");
        } catch (const Error& e) {
            r.check(false, e.code());
        }
    }
    return r;
}

/// normalize_by_E with the eigen-balance condition rescanned over every lambda;
/// worst = max over lambda of dim ker(x - lambda) - dim ker(x - 1).
inline SuiteReport suite_ultimate_patch(std::size_t trials, std::uint64_t seed) {
    SuiteReport r("ultimatepatch", seed, trials);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < trials; ++i) {
        const Field f = detail::pick_field(rng);
        const std::size_t n = 2 + rng.below(11);
        // Bias towards large eigenspaces, where the condition bites.
        Matrix a = random_invertible(f, n, rng);
        if (rng.below(2)) {
            std::vector<FieldElement> diag(n, random_nonzero(f, rng));
            for (std::size_t j = 0; j < n / 3; ++j) diag[rng.below(n)] = random_nonzero(f, rng);
            const Matrix c = random_invertible(f, n, rng);
            a = inverse(c) * Matrix::diagonal(f, diag) * c;
        }
        try {
            const auto e = normalize_by_E(a);
            r.absorb(format(e.x));
            const Matrix m = e.m.matrix(f);
            r.check(m * e.x == a, "m x != a");
            r.check(det(m) == f.one(), "det m != 1");
            const auto fixed = static_cast<std::int64_t>(n - rank(detail::minus_scalar(e.x, f.one())));
            for (std::uint32_t c = 1; c < f.order(); ++c) {
                const auto dim = static_cast<std::int64_t>(n - rank(detail::minus_scalar(e.x, FieldElement{c})));
                r.note(Rational(dim - fixed));
                r.check(dim <= fixed + 2, "eigen-balance violated");
            }
        } catch (const Error& e) {
            r.check(false, e.code());
        }
    }
    return r;
}

/// Dyadic paths in A_n and SL_n(F) under the projective rank metric;
/// worst = max deviation / epsilon.
inline SuiteReport suite_spaces(std::size_t trials, std::uint64_t seed) {
    SuiteReport r("spaces", seed, trials);
    SplitMix64 rng(seed);
    auto scan = [&](const auto& ctx, const auto& path, auto&& dist) {
        const std::size_t depth = path.depth;
        const std::size_t count = path.size();
        r.check(count == (std::size_t{1} << depth) + 1, "wrong number of points");
        const Rational ell = dist(path.points.front(), path.points.back());
        auto level = [&](std::size_t i) {
            if (i == 0 || i + 1 == count) return std::size_t{0};
            std::size_t k = depth;
            for (; i % 2 == 0; i /= 2) --k;
            return k;
        };
        for (std::size_t i = 0; i < count; ++i) {
            r.absorb(format(path.points[i]));
            for (std::size_t j = i + 1; j < count; ++j) {
                const Rational gap(static_cast<std::int64_t>(j - i), std::int64_t{1} << depth);
                const Rational dev = abs(dist(path.points[i], path.points[j]) - gap * ell);
                r.note(dev / ctx.epsilon);
                r.check(dev <= Rational(static_cast<std::int64_t>(level(i) + level(j))) * ctx.epsilon, "pair deviation");
            }
        }
    };
    for (std::size_t i = 0; i < trials; ++i) {
        try {
            if (rng.below(2) == 0) {
                const std::size_t n = 100 + rng.below(400);
                const auto ctx = MetricGroupContext::hamming(n);
                const auto x = random_even_permutation(n, rng), y = random_even_permutation(n, rng);
                const auto path = dyadic_path(ctx, x, y, 4);
                r.check(path.points.front() == x && path.points.back() == y, "endpoints moved");
                scan(ctx, path, [](const Permutation& a, const Permutation& b) {
                    std::int64_t moved = 0;
                    for (std::size_t p = 0; p < a.size(); ++p) moved += a[p] != b[p];
                    return Rational(moved, static_cast<std::int64_t>(a.size()));
                });
            } else {
                const Field f = detail::pick_field(rng);
                const std::size_t n = 6 + rng.below(7);
                const auto ctx = MetricGroupContext::projective_rank(n);
                const auto x = random_sl(f, n, rng), y = random_sl(f, n, rng);
                const auto path = dyadic_path(ctx, x, y, 3);
                r.check(path.points.front() == x && path.points.back() == y, "endpoints moved");
                for (const auto& p : path.points) r.check(det(p) == f.one(), "path left SL_n");
                scan(ctx, path, [&](const Matrix& a, const Matrix& b) {
                    const Matrix g = inverse(a) * b;
                    std::size_t best = n;
                    for (std::uint32_t c = 1; c < f.order(); ++c)
                        best = std::min(best, rank(detail::minus_scalar(g, FieldElement{c})));
                    return Rational(static_cast<std::int64_t>(best), static_cast<std::int64_t>(n));
                });
            }
        } catch (const Error& e) {
            r.check(false, e.code());
        }
    }
    return r;
}

namespace detail {

inline void check_factor(SuiteReport& r, const SubgroupFactor& s, FactorTag want) {
    r.absorb(format(s));
    r.check(s.tag == want, "factor tag out of order");
    r.check(factor_shape(s), "factor has the wrong block shape");
    r.check(block_member(s.matrix(), s.group), "factor is not in the group");
}

}  // namespace detail

/// Sp factorization U^T U U^T H of random words; worst = 0.
inline SuiteReport suite_symplectic_product(std::size_t trials, std::uint64_t seed) {
    SuiteReport r("symplecticproduct", seed, trials);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < trials; ++i) {
        const Field f = detail::pick_field(rng);
        const std::size_t n = 1 + rng.below(8);
        const auto g = random_block_element(BlockGroup::Sp, f, n, rng);
        try {
            const auto fs = factor_symplectic(g);
            detail::check_factor(r, fs.u1, FactorTag::U_T);
            detail::check_factor(r, fs.u2, FactorTag::U);
            detail::check_factor(r, fs.u3, FactorTag::U_T);
            detail::check_factor(r, fs.h, FactorTag::H);
            r.check(fs.u1.matrix() * fs.u2.matrix() * fs.u3.matrix() * fs.h.matrix() == g.m, "product != g");
        } catch (const Error& e) {
            r.check(false, e.code());
        }
    }
    return r;
}

/// V V^T V H for the unitary and orthogonal block shapes, plus the rank of
/// build_k1; worst = 0.
inline SuiteReport suite_unitary_product(std::size_t trials, std::uint64_t seed) {
    SuiteReport r("unitaryproduct", seed, trials);
    SplitMix64 rng(seed);
    static const char* su_fields[] = {"2^2", "3^2"};
    for (std::size_t i = 0; i < trials; ++i) {
        const bool unitary = rng.below(2) == 0;
        const Field f = unitary ? Field::parse(su_fields[rng.below(2)]) : detail::pick_field(rng);
        const BlockGroup group = unitary ? BlockGroup::SU : BlockGroup::OmegaPlusShape;
        const std::size_t n = 3 + rng.below(6);
        const auto g = random_block_element(group, f, n, rng);
        try {
            const auto fs = factor_isometry_block(g);
            detail::check_factor(r, fs.v1, FactorTag::V);
            detail::check_factor(r, fs.v2, FactorTag::V_T);
            detail::check_factor(r, fs.v3, FactorTag::V);
            detail::check_factor(r, fs.h, FactorTag::H);
            r.check(fs.v1.matrix() * fs.v2.matrix() * fs.v3.matrix() * fs.h.matrix() == g.m, "product != g");
        } catch (const Error& e) {
            r.check(false, e.code());
        }
        const std::size_t m = 1 + rng.below(9);
        const bool sesq = unitary;
        const Matrix k1 = build_k1(m, f, sesq);
        r.absorb(format(k1));
        r.check(k1 == -detail::star(k1, sesq), "k1 is not anti-hermitian");
        const bool short_case = m % 2 == 1 && f.characteristic() != 2 && !sesq;
        r.check(rank(k1) == (short_case ? m - 1 : m), "build_k1 rank");
    }
    return r;
}

/// Unipotent paths on a 64-point grid; worst = max |rk(p(t) - 1) - t rk(u - 1)|.
inline SuiteReport suite_unipotent_path(std::size_t trials, std::uint64_t seed) {
    SuiteReport r("unipotentpath", seed, trials);
    SplitMix64 rng(seed);
    static const FactorTag tags[] = {FactorTag::U, FactorTag::U_T, FactorTag::V, FactorTag::V_T};
    for (std::size_t i = 0; i < trials; ++i) {
        const FactorTag tag = tags[rng.below(4)];
        const bool sym = tag == FactorTag::U || tag == FactorTag::U_T;
        BlockGroup group = BlockGroup::Sp;
        Field f = detail::pick_field(rng);
        if (!sym) {
            group = f.involution_enabled() && rng.below(2) ? BlockGroup::SU : BlockGroup::OmegaPlusShape;
        }
        const std::size_t n = 1 + rng.below(6);
        const Matrix k = sym ? detail::random_symmetric(f, n, rng)
                             : detail::random_antihermitian(f, n, uses_involution(group), rng);
        const auto u = make_factor(tag, sym ? BlockGroup::Sp : group, k);
        const Matrix one = Matrix::identity(f, 2 * n);
        const std::size_t ru = rank(u.matrix() - one);
        try {
            std::size_t prev = 0;
            for (std::int64_t step = 0; step <= 64; ++step) {
                const Rational t(step, 64);
                const auto p = unipotent_geodesic_point(u, t);
                r.absorb(format(p.m));
                const std::size_t rp = rank(p.m - one);
                const Rational dev = abs(Rational(static_cast<std::int64_t>(rp)) - t * static_cast<std::int64_t>(ru));
                r.note(dev);
                r.check(dev <= 2, "rank bound exceeded");
                r.check(rp >= prev, "rank not monotone");
                prev = rp;
                r.check(detail::block_member(p.m, p.group), "path point left the group");
                if (step == 0) r.check(p.m == one, "path does not start at 1");
                if (step == 64) r.check(p.m == u.matrix(), "path does not end at u");
                if (step % 16 == 0)
                    for (std::uint32_t c = 2; c < f.order(); ++c)
                        r.check(rank(detail::minus_scalar(p.m, FieldElement{c})) == 2 * n, "p(t) - lambda is singular");
            }
        } catch (const Error& e) {
            r.check(false, e.code());
        }
    }
    return r;
}

/// witt_extend on random isometries; worst = max rk(g|_L - h) / dim S (0 when S = 0).
inline SuiteReport suite_enough(std::size_t trials, std::uint64_t seed) {
    SuiteReport r("enough", seed, trials);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < trials; ++i) {
        const bool herm = rng.below(2) == 0;
        const Field f = herm ? Field::parse(rng.below(2) ? "3^2" : "2^2") : detail::pick_field(rng);
        const FormKind kind = herm ? FormKind::hermitian : FormKind::quadratic;
        const std::size_t n = 1 + rng.below(10);
        const auto space = random_form_space(f, kind, n, rng);
        std::vector<std::size_t> dims;
        if (!space.polar_nondegenerate()) {
            dims = {1};
        } else {
            for (std::size_t s = 0; s <= std::min<std::size_t>(2, n); ++s)
                if (herm || f.characteristic() != 2 || s % 2 == 0) dims.push_back(s);
        }
        const std::size_t sdim = dims[rng.below(dims.size())];
        try {
            const auto [l, s] = random_orthogonal_split(space, sdim, rng);
            const Matrix g = random_isometry(space, 2 * n + 2, rng);
            const auto w = witt_extend(space, l, s, g);
            r.absorb(format(w.h));
            const bool sesq = space.sesquilinear();
            const Matrix gl = l * space.polar() * detail::star(l, sesq);
            r.check(w.h * gl * detail::star(w.h, sesq) == gl, "h does not preserve the polar form on L");
            if (kind == FormKind::quadratic) {
                const Matrix bl = l * space.gram() * transpose(l);
                r.check(detail::alternating(w.h * bl * transpose(w.h) - bl), "h does not preserve Q on L");
            }
            const std::size_t defect = rank(l * g - w.h * l);
            if (sdim > 0) r.note(Rational(static_cast<std::int64_t>(defect), static_cast<std::int64_t>(sdim)));
            r.check(defect <= 3 * sdim, "rk(g|_L - h) exceeds 3 dim S");
        } catch (const Error& e) {
            r.check(false, e.code());
        }
    }
    return r;
}

/// Exhaustive split_even over A_5, A_6 and split_sl over SL_2(2), SL_2(3);
/// ignores the trial count. worst = max slack seen.
inline SuiteReport suite_tiny(std::size_t, std::uint64_t seed) {
    SuiteReport r("tiny", seed, 0);
    for (std::size_t n : {5, 6}) {
        std::vector<std::uint32_t> img(n);
        for (std::uint32_t j = 0; j < n; ++j) img[j] = j;
        do {
            const Permutation g(img);
            if (!detail::parity_even(g)) continue;
            for (std::int64_t q = 0; q <= 4; ++q) {
                const Rational t(q, 4);
                ++r.trials;
                try {
                    const auto s = split_even(g, t);
                    r.absorb(format(s.h));
                    r.check(detail::parity_even(s.h) && detail::parity_even(s.k) && s.h * s.k == g, "split_even contract");
                    const Rational e = std::max(abs(detail::mu(s.h) - t * detail::mu(g)),
                                                abs(detail::mu(s.k) - (1 - t) * detail::mu(g)));
                    r.note(e);
                    r.check(e <= Rational(3, 2), "split_even bound");
                } catch (const Error& e) {
                    r.check(false, e.code());
                }
            }
        } while (std::next_permutation(img.begin(), img.end()));
    }
    for (std::uint32_t p : {2u, 3u}) {
        const Field f = Field::prime(p);
        for (std::uint32_t code = 0; code < p * p * p * p; ++code) {
            std::uint32_t x = code;
            std::vector<FieldElement> e(4);
            for (auto& v : e) {
                v = FieldElement{x % p};
                x /= p;
            }
            const Matrix g(f, 2, 2, e);
            if (det(g) != f.one()) continue;
            for (std::uint32_t c = 1; c < p; ++c) {
                const FieldElement lambda{c};
                const auto rk = static_cast<std::int64_t>(rank(detail::minus_scalar(g, lambda)));
                for (std::int64_t twice = 0; twice <= 2 * rk; ++twice) {
                    const Rational phi1(twice, 2);
                    ++r.trials;
                    try {
                        const auto s = split_sl(g, lambda, phi1);
                        r.absorb(format(s.h));
                        r.check(s.h * s.k == g && det(s.h) == f.one() && det(s.k) == f.one(), "split_sl contract");
                        const Rational slack = std::max(abs(detail::rank_rational(detail::minus_scalar(s.h, lambda)) - phi1),
                                                        abs(detail::rank_rational(detail::minus_scalar(s.k, f.one())) - (rk - phi1)));
                        r.note(slack);
                        r.check(slack <= 3, "split_sl bound");
                    } catch (const Error& e) {
                        r.check(false, e.code());
                    }
                }
            }
        }
    }
    return r;
}

struct SuiteEntry {
    std::string_view name;
    SuiteReport (*run)(std::size_t, std::uint64_t);
};

inline const std::vector<SuiteEntry>& suites() {
    static const std::vector<SuiteEntry> all{
        {"splitAn", suite_split_an},
        {"splitSLn", suite_split_sln},
        {"ultimatepatch", suite_ultimate_patch},
        {"spaces", suite_spaces},
        {"symplecticproduct", suite_symplectic_product},
        {"unitaryproduct", suite_unitary_product},
        {"unipotentpath", suite_unipotent_path},
        {"enough", suite_enough},
        {"tiny", suite_tiny},
    };
    return all;
}

/// Runs one named suite, or every suite for "all". Each suite draws from a
/// stream derived from the seed and its position in the list, so a suite's
/// output does not depend on which other suites run.
inline std::vector<SuiteReport> run_suites(std::string_view name, std::size_t trials, std::uint64_t seed) {
    std::vector<SuiteReport> out;
    for (std::size_t i = 0; i < suites().size(); ++i) {
        const auto& s = suites()[i];
        if (name != "all" && name != s.name) continue;
        SplitMix64 mix(seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
        auto rep = s.run(trials, mix.next());
        rep.seed = seed;
        out.push_back(std::move(rep));
    }
    if (out.empty()) throw ParseError("unknown suite '" + std::string(name) + "'");
    return out;
}

}  // namespace ultrageo
