#pragma once

#include <ultrageo/ultrageo.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ultrageo::cli {

/// Records are written as they are produced; `fail` turns the run into
/// ok=false without an error code.
class Output {
public:
    explicit Output(std::ostream& os) : os_(os) {}

    void put(std::string_view key, std::string_view value) { os_ << key << '=' << value << '\n'; }
    void put(std::string_view key, const Rational& r) { put(key, format(r)); }
    void put(std::string_view key, std::size_t v) { put(key, format(Rational(static_cast<std::int64_t>(v)))); }
    void line(std::string_view text) { os_ << text << '\n'; }
    void require(bool cond, std::string_view what) {
        if (!cond) {
            put("violation", what);
            ok_ = false;
        }
    }
    void fail() { ok_ = false; }
    bool ok() const noexcept { return ok_; }

private:
    std::ostream& os_;
    bool ok_ = true;
};

namespace detail {

inline Rational rk(const Matrix& m) { return Rational(static_cast<std::int64_t>(rank(m))); }

inline Permutation read_perm(const std::string& text, std::size_t n) {
    if (text == "id" || text == "identity") return Permutation(n);
    auto g = parse_permutation(text, n);
    if (g.size() != n) throw ShapeMismatch("permutation degree does not match --n");
    return g;
}

inline Matrix read_square(const Field& f, const std::string& text) {
    auto m = parse_matrix(f, text);
    if (!m.is_square() || m.rows() == 0) throw ShapeMismatch("expected a nonempty square matrix");
    return m;
}

inline void put_factor(Output& out, std::string_view key, const SubgroupFactor& s) {
    out.put(key, format(s));
    out.require(ultrageo::detail::factor_shape(s), "factor block shape");
    out.require(ultrageo::detail::block_member(s.matrix(), s.group), "factor membership");
}

/// Splits on blanks; single or double quotes group words and are dropped.
inline std::optional<std::vector<std::string>> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    bool in_word = false;
    char quote = 0;
    for (char c : text) {
        if (quote) {
            if (c == quote) quote = 0;
            else cur += c;
        } else if (c == '"' || c == '\'') {
            quote = c;
            in_word = true;
        } else if (c == ' ' || c == '\t') {
            if (in_word) out.push_back(std::move(cur));
            cur.clear();
            in_word = false;
        } else {
            cur += c;
            in_word = true;
        }
    }
    if (quote) return std::nullopt;
    if (in_word) out.push_back(std::move(cur));
    return out;
}

}  // namespace detail

struct Options {
    std::size_t n = 0, depth = 0, trials = 100;
    std::uint64_t seed = 1;
    std::string field = "2", g, t = "1/2", lambda = "1", phi1, a, shape = "su", kind, gram, l, s, x, y, suite = "all", file;
    bool gl = false;
};

inline void cmd_split_perm(const Options& o, Output& out) {
    if (o.n == 0) throw OutOfRange("--n must be positive");
    const auto g = detail::read_perm(o.g, o.n);
    const Rational t = parse_rational(o.t);
    const auto s = split_even(g, t);
    const Rational mg = Rational(static_cast<std::int64_t>(support_count(g)));
    const Rational mh = ultrageo::detail::mu(s.h), mk = ultrageo::detail::mu(s.k);
    out.put("h", format_cycles(s.h));
    out.put("k", format_cycles(s.k));
    out.put("mu_g", mg);
    out.put("mu_h", mh);
    out.put("mu_k", mk);
    out.put("slack_h", abs(mh - t * mg));
    out.put("slack_k", abs(mk - (1 - t) * mg));
    out.require(s.h * s.k == g, "h k != g");
    out.require(ultrageo::detail::parity_even(s.h) && ultrageo::detail::parity_even(s.k), "h, k even");
    out.require(abs(mh - t * mg) <= Rational(3, 2) && abs(mk - (1 - t) * mg) <= Rational(3, 2), "support bound");
}

inline void cmd_split_sl(const Options& o, Output& out) {
    const Field f = Field::parse(o.field);
    const Matrix g = detail::read_square(f, o.g);
    const FieldElement lambda = f.parse_element(o.lambda);
    const Matrix sub = g - Matrix::scalar(f, g.rows(), lambda);
    const Rational r = detail::rk(sub);
    const Rational phi1 = o.phi1.empty() ? r / 2 : parse_rational(o.phi1);
    const auto s = o.gl ? split_gl(g, lambda, phi1) : split_sl(g, lambda, phi1);
    const Matrix one = Matrix::identity(f, g.rows());
    const Rational rh = detail::rk(s.h - Matrix::scalar(f, g.rows(), lambda)), rkk = detail::rk(s.k - one);
    const Rational slack = std::max(abs(rh - phi1), abs(rkk - (r - phi1)));
    out.put("h", format(s.h));
    out.put("k", format(s.k));
    out.put("phi1", phi1);
    out.put("phi2", r - phi1);
    out.put("rank_h", rh);
    out.put("rank_k", rkk);
    out.put("slack", slack);
    out.require(s.h * s.k == g, "h k != g");
    out.require(slack <= (o.gl ? 2 : 3), "rank slack");
    if (!o.gl) out.require(det(s.h) == f.one() && det(s.k) == f.one(), "det h = det k = 1");
}

inline void cmd_normalize_e(const Options& o, Output& out) {
    const Field f = Field::parse(o.field);
    const Matrix a = detail::read_square(f, o.a);
    const auto e = normalize_by_E(a);
    const Matrix m = e.m.matrix(f);
    out.put("lambda", f.format(e.m.lambda));
    out.put("m", format(m));
    out.put("x", format(e.x));
    out.require(m * e.x == a, "m x != a");
    const std::size_t n = a.rows();
    const std::size_t fixed = n - rank(e.x - Matrix::identity(f, n));
    for (std::uint32_t c = 1; c < f.order(); ++c)
        out.require(n - rank(e.x - Matrix::scalar(f, n, FieldElement{c})) <= fixed + 2, "eigen-balance");
}

inline BlockElement read_block(const Options& o, BlockGroup group, const Field& f) {
    if (o.g.empty()) {
        if (o.n == 0) throw OutOfRange("give --g or --n for a random element");
        SplitMix64 rng(o.seed);
        return random_block_element(group, f, o.n, rng);
    }
    BlockElement g{detail::read_square(f, o.g), group};
    if (g.m.rows() % 2) throw ShapeMismatch("block element must be 2n x 2n");
    return g;
}

inline void cmd_factor_sp(const Options& o, Output& out) {
    const Field f = Field::parse(o.field);
    const auto g = read_block(o, BlockGroup::Sp, f);
    const auto fs = factor_symplectic(g);
    out.put("g", format(g));
    detail::put_factor(out, "u1", fs.u1);
    detail::put_factor(out, "u2", fs.u2);
    detail::put_factor(out, "u3", fs.u3);
    detail::put_factor(out, "h", fs.h);
    out.require(fs.u1.matrix() * fs.u2.matrix() * fs.u3.matrix() * fs.h.matrix() == g.m, "product != g");
}

inline void cmd_factor_iso(const Options& o, Output& out) {
    const Field f = Field::parse(o.field);
    BlockGroup group;
    if (o.shape == "su") group = BlockGroup::SU;
    else if (o.shape == "omega") group = BlockGroup::OmegaPlusShape;
    else throw ParseError("--shape must be su or omega");
    const auto g = read_block(o, group, f);
    const auto fs = factor_isometry_block(g);
    out.put("g", format(g));
    detail::put_factor(out, "v1", fs.v1);
    detail::put_factor(out, "v2", fs.v2);
    detail::put_factor(out, "v3", fs.v3);
    detail::put_factor(out, "h", fs.h);
    out.require(fs.v1.matrix() * fs.v2.matrix() * fs.v3.matrix() * fs.h.matrix() == g.m, "product != g");
}

inline void cmd_witt_extend(const Options& o, Output& out) {
    const Field f = Field::parse(o.field);
    const auto space = FormSpace::make(parse_kind(o.kind.empty() ? "quadratic" : o.kind), detail::read_square(f, o.gram));
    const std::size_t n = space.dim();
    const Matrix l = parse_matrix(f, o.l);
    const Matrix s = o.s.empty() ? Matrix(f, 0, n) : parse_matrix(f, o.s);
    const Matrix g = detail::read_square(f, o.g);
    const auto w = witt_extend(space, l, s, g);
    const bool sesq = space.sesquilinear();
    const Matrix gl = l * space.polar() * ultrageo::detail::star(l, sesq);
    const Rational defect = detail::rk(l * g - w.h * l);
    out.put("h", format(w.h));
    out.put("u", format(w.u));
    out.put("defect", defect);
    out.put("bound", 3 * s.rows());
    out.require(w.h * gl * ultrageo::detail::star(w.h, sesq) == gl, "h preserves the polar form on L");
    if (space.kind() == FormKind::quadratic) {
        const Matrix bl = l * space.gram() * transpose(l);
        out.require(ultrageo::detail::alternating(w.h * bl * transpose(w.h) - bl), "h preserves Q on L");
    }
    out.require(defect <= static_cast<std::int64_t>(3 * s.rows()), "rk(g|_L - h) <= 3 dim S");
}

template <class Element, class Text>
void write_path(const MetricGroupContext& ctx, const DyadicPath<Element>& path, Output& out, Text&& text) {
    for (std::size_t i = 0; i < path.size(); ++i)
        out.line("lambda=" + format(path.lambda(i)) + " point=" + text(path.points[i]));
    const auto rep = deviation_report(ctx, path);
    const Rational bound = Rational(static_cast<std::int64_t>(2 * path.depth)) * ctx.epsilon;
    out.put("distance", ctx.distance(path.points.front(), path.points.back()));
    out.put("epsilon", ctx.epsilon);
    out.put("deviation", rep.max_deviation);
    out.put("bound", bound);
    out.put("pair_violations", rep.pair_violations);
    out.require(rep.max_deviation <= bound && rep.pair_violations == 0, "deviation bound");
}

inline void cmd_geodesic(const Options& o, Output& out) {
    if (o.n == 0) throw OutOfRange("--n must be positive");
    const MetricKind kind = parse_metric(o.kind.empty() ? "hamming" : o.kind);
    SplitMix64 rng(o.seed);
    if (kind == MetricKind::hamming) {
        const auto ctx = MetricGroupContext::hamming(o.n);
        const auto x = o.x.empty() ? random_even_permutation(o.n, rng) : detail::read_perm(o.x, o.n);
        const auto y = o.y.empty() ? random_even_permutation(o.n, rng) : detail::read_perm(o.y, o.n);
        if (!is_even(x) || !is_even(y)) throw ParityError("endpoints must be even permutations");
        write_path(ctx, dyadic_path(ctx, x, y, o.depth), out, [](const Permutation& p) { return format_cycles(p); });
        return;
    }
    const Field f = Field::parse(o.field);
    const auto ctx = kind == MetricKind::rank ? MetricGroupContext::rank(o.n) : MetricGroupContext::projective_rank(o.n);
    auto read = [&](const std::string& text) {
        if (text.empty()) return random_sl(f, o.n, rng);
        if (text == "id" || text == "identity") return Matrix::identity(f, o.n);
        return detail::read_square(f, text);
    };
    const Matrix x = read(o.x), y = read(o.y);
    write_path(ctx, dyadic_path(ctx, x, y, o.depth), out, [](const Matrix& m) { return format(m); });
}

inline void cmd_verify(const Options& o, Output& out) {
    for (const auto& r : run_suites(o.suite, o.trials, o.seed)) {
        out.line(format_record(r));
        if (!r.ok()) out.fail();
    }
}

inline int run(std::vector<std::string> args, std::ostream& os);

/// One job per line, in the same syntax as the command line; blank lines
/// and lines starting with '#' are skipped. Outputs are tagged job=<index>
/// in input order; the status is the worst job status.
inline int cmd_batch(const Options& o, Output& out, std::ostream& os) {
    std::ifstream in(o.file);
    if (!in) throw ParseError("cannot open batch file '" + o.file + "'");
    std::string text;
    int worst = 0;
    std::size_t index = 0;
    while (std::getline(in, text)) {
        auto trimmed = ultrageo::detail::trim(text);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        out.put("job", std::to_string(index++));
        const auto args = detail::tokenize(trimmed);
        if (!args || (!args->empty() && args->front() == "batch")) {
            out.put("error", "ParseError");
            out.put("ok", "false");
            worst = 2;
            continue;
        }
        worst = std::max(worst, run(*args, os));
    }
    out.put("jobs", index);
    if (worst) out.fail();
    return worst;
}

inline int run(std::vector<std::string> args, std::ostream& os) {
    Output out(os);
    Options o;
    CLI::App app{"ultrageo"};
    app.require_subcommand(1);
    auto* sp = app.add_subcommand("split-perm", "split an even permutation g = h k");
    sp->add_option("--n", o.n)->required();
    sp->add_option("--g", o.g)->required();
    sp->add_option("--t", o.t);
    auto* ss = app.add_subcommand("split-sl", "split a matrix g = h k by rank");
    ss->add_option("--field", o.field);
    ss->add_option("--g", o.g)->required();
    ss->add_option("--lambda", o.lambda);
    ss->add_option("--phi1", o.phi1);
    ss->add_flag("--gl", o.gl, "allow det != 1 (GL bound)");
    auto* ne = app.add_subcommand("normalize-e", "write a = m x with x eigen-balanced");
    ne->add_option("--field", o.field);
    ne->add_option("--a", o.a)->required();
    auto* fsp = app.add_subcommand("factor-sp", "factor g in Sp_2n as U^T U U^T H");
    auto* fiso = app.add_subcommand("factor-iso", "factor g as V V^T V H");
    for (auto* c : {fsp, fiso}) {
        c->add_option("--field", o.field);
        c->add_option("--g", o.g);
        c->add_option("--n", o.n, "random element of this half-size from --seed");
        c->add_option("--seed", o.seed);
    }
    fiso->add_option("--shape", o.shape, "su or omega");
    auto* we = app.add_subcommand("witt-extend", "isometry of L agreeing with g on a large subspace");
    we->add_option("--field", o.field);
    we->add_option("--kind", o.kind, "quadratic or hermitian");
    we->add_option("--gram", o.gram)->required();
    we->add_option("--l", o.l)->required();
    we->add_option("--s", o.s);
    we->add_option("--g", o.g)->required();
    auto* geo = app.add_subcommand("geodesic", "dyadic midpoint path and its deviation");
    geo->add_option("--kind", o.kind, "hamming, rank or projective-rank");
    geo->add_option("--field", o.field);
    geo->add_option("--n", o.n)->required();
    geo->add_option("--depth", o.depth)->required();
    geo->add_option("--x", o.x);
    geo->add_option("--y", o.y);
    geo->add_option("--seed", o.seed);
    auto* ver = app.add_subcommand("verify", "run property suites");
    ver->add_option("--suite", o.suite);
    ver->add_option("--trials", o.trials);
    ver->add_option("--seed", o.seed);
    auto* bat = app.add_subcommand("batch", "run one job per line of a file");
    bat->add_option("file,--file", o.file)->required();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        os << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        os << app.help();
        return 0;
    } catch (const CLI::Error& e) {
        out.put("error", "ParseError");
        out.put("message", e.what());
        out.put("ok", "false");
        return 2;
    }

    int status = 0;
    try {
        if (*sp) cmd_split_perm(o, out);
        else if (*ss) cmd_split_sl(o, out);
        else if (*ne) cmd_normalize_e(o, out);
        else if (*fsp) cmd_factor_sp(o, out);
        else if (*fiso) cmd_factor_iso(o, out);
        else if (*we) cmd_witt_extend(o, out);
        else if (*geo) cmd_geodesic(o, out);
        else if (*ver) cmd_verify(o, out);
        else if (*bat) status = cmd_batch(o, out, os);
    } catch (const Error& e) {
        out.put("error", e.code());
        out.put("message", e.what());
        out.put("ok", "false");
        return e.is_input_error() ? 2 : 1;
    }
    out.put("ok", out.ok() ? "true" : "false");
    if (status) return status;
    return out.ok() ? 0 : 1;
}

}  // namespace ultrageo::cli
