#include <cmath>
#include <map>
#include <set>
#include <string>

#include "doctest.h"

#include "aperiodic/substitution.hpp"

using namespace aperiodic;

namespace {

const char* kFibonacci = "a -> ab; b -> a";
const char* kAabb = "a -> aabb; b -> ab";
const char* kAabBa = "a -> aab; b -> ba";
const char* kTriboB = "a -> abc; b -> ab; c -> b";
const char* kTriboA = "a -> abc; b -> ab; c -> a";

QuadraticElement tau() { return {Rational(1, 2), Rational(1, 2), 5}; }

// Determinant by cofactor expansion, used to cross-check the characteristic polynomial.
Rational det(const std::vector<std::vector<Rational>>& a) {
    const std::size_t n = a.size();
    if (n == 1) {
        return a[0][0];
    }
    Rational acc(0);
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<std::vector<Rational>> minor;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<Rational> row;
            for (std::size_t k = 0; k < n; ++k) {
                if (k != c) {
                    row.push_back(a[r][k]);
                }
            }
            minor.push_back(row);
        }
        Rational term = a[0][c] * det(minor);
        acc += (c % 2 == 0) ? term : Rational(-term);
    }
    return acc;
}

// Plain string rewriting.
std::string iterate(const Substitution& s, std::string w, int k) {
    for (int i = 0; i < k; ++i) {
        std::string next;
        for (char c : w) {
            next += s.word(s.image(s.index_of(c)));
        }
        w = next;
    }
    return w;
}

// Direct scan of one supertile against the grid j*a.
double scan_epsilon(const Substitution& s, const PerronData& pd, int letter, int k) {
    std::string w = iterate(s, std::string(1, s.letter(letter)), k);
    long double x = 0;
    long double a = pd.mean_spacing.to_long_double();
    long double best = 0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        x += pd.left_eigvec[static_cast<std::size_t>(s.index_of(w[j]))].to_long_double();
        best = std::max(best, std::abs(x - static_cast<long double>(j + 1) * a));
    }
    return static_cast<double>(best);
}

double newton_root(double x, double (*f)(double), double (*df)(double)) {
    for (int i = 0; i < 100; ++i) {
        x -= f(x) / df(x);
    }
    return x;
}

} // namespace

TEST_SUITE("substitution") {

TEST_CASE("parse and format") {
    Substitution f = parse_substitution(kFibonacci);
    CHECK(f.size() == 2);
    CHECK(f.alphabet() == std::vector<char>{'a', 'b'});
    CHECK(format_substitution(f) == kFibonacci);
    CHECK(parse_substitution(format_substitution(f)) == f);
    CHECK(parse_substitution("a->ab\nb->a") == f);
    CHECK(parse_substitution("a -> a").size() == 1);

    try {
        parse_substitution("a -> ab; b -> ac");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("unknown letter 'c'") != std::string::npos);
        CHECK(e.line() == 1);
        CHECK(e.column() == 16);
    }
    CHECK_THROWS_AS(parse_substitution(""), ParseError);
    CHECK_THROWS_AS(parse_substitution("  ;  "), ParseError);
    CHECK_THROWS_AS(parse_substitution("a -> ; b -> a"), ParseError);
    CHECK_THROWS_AS(parse_substitution("a -> b; a -> a; b -> a"), ParseError);
    CHECK_THROWS_AS(parse_substitution("a = ab"), ParseError);
    try {
        parse_substitution("a -> ab\nb -> x");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 6);
    }
}

TEST_CASE("substitution matrices") {
    CHECK(format_matrix(substitution_matrix(parse_substitution(kFibonacci))) == "[[1,1],[1,0]]");
    CHECK(format_matrix(substitution_matrix(parse_substitution(kAabb))) == "[[2,1],[2,1]]");
    CHECK(format_matrix(substitution_matrix(parse_substitution(kTriboA))) == "[[1,1,1],[1,1,0],[1,0,0]]");
    for (const char* rules : {kFibonacci, kAabb, kAabBa, kTriboB, kTriboA}) {
        Substitution s = parse_substitution(rules);
        IntMatrix m = substitution_matrix(s);
        for (int j = 0; j < s.size(); ++j) {
            BigInt col(0);
            for (int i = 0; i < s.size(); ++i) {
                CHECK(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] >= 0);
                col += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
            CHECK(col == static_cast<long>(s.image(j).size()));
        }
    }
}

TEST_CASE("characteristic polynomial matches determinant") {
    for (const char* rules : {kFibonacci, kAabb, kAabBa, kTriboB, kTriboA, "a -> abcd; b -> ca; c -> db; d -> a"}) {
        Substitution s = parse_substitution(rules);
        IntMatrix m = substitution_matrix(s);
        Polynomial cp = characteristic_polynomial(m);
        for (long x = -3; x <= 3; ++x) {
            std::vector<std::vector<Rational>> a(m.size(), std::vector<Rational>(m.size()));
            for (std::size_t i = 0; i < m.size(); ++i) {
                for (std::size_t j = 0; j < m.size(); ++j) {
                    a[i][j] = (i == j ? Rational(x) : Rational(0)) - Rational(m[i][j]);
                }
            }
            CHECK(poly_eval(cp, Rational(x)) == det(a));
        }
    }
    CHECK(format_polynomial(characteristic_polynomial(substitution_matrix(parse_substitution(kTriboB)))) ==
          "x^3-2*x^2-1");
    CHECK(format_polynomial(characteristic_polynomial(substitution_matrix(parse_substitution(kTriboA)))) ==
          "x^3-2*x^2-x+1");
}

TEST_CASE("classify fibonacci") {
    PerronData pd = classify(parse_substitution(kFibonacci));
    REQUIRE(pd.lambda.is_quadratic());
    CHECK(pd.lambda.quadratic() == tau());
    CHECK(pd.is_primitive);
    CHECK(pd.is_pisot);
    REQUIRE(pd.conjugates.size() == 1);
    CHECK(pd.conjugates[0].real() == doctest::Approx((1 - std::sqrt(5.0)) / 2).epsilon(1e-14));
    CHECK(pd.c_sigma == doctest::Approx(tau().to_double() - 1).epsilon(1e-14));
    RealValue t(tau());
    RealValue one(Rational(1));
    CHECK(pd.right_eigvec_normalized[0] == t / (one + t));
    CHECK(pd.right_eigvec_normalized[1] == one / (one + t));
    CHECK(pd.left_eigvec[0] == one);
    CHECK(pd.left_eigvec[1] == one / t);
    CHECK(pd.diagonalizable_power == 1);

    PerronData scaled = with_first_tile_length(pd, t);
    CHECK(scaled.left_eigvec[0] == t);
    CHECK(scaled.left_eigvec[1] == one);
    CHECK(scaled.mean_spacing == (RealValue(Rational(2)) + t) / (one + t));
    CHECK(scaled.density == (one + t) / (RealValue(Rational(2)) + t));
}

TEST_CASE("classify aabb/ab") {
    Substitution s = parse_substitution(kAabb);
    PerronData pd = classify(s);
    REQUIRE(pd.lambda.is_rational());
    CHECK(pd.lambda.rational() == 3);
    REQUIRE(pd.conjugates.size() == 1);
    CHECK(std::abs(pd.conjugates[0]) < 1e-12);
    CHECK(pd.c_sigma < 1e-12);
    CHECK(pd.is_pisot);
    CHECK(pd.right_eigvec_normalized[0] == RealValue(Rational(1, 2)));
    CHECK(pd.right_eigvec_normalized[1] == RealValue(Rational(1, 2)));
    PerronData scaled = with_first_tile_length(pd, RealValue(Rational(2)));
    CHECK(scaled.left_eigvec[1] == RealValue(Rational(1)));
    CHECK(scaled.density == RealValue(Rational(2, 3)));
    CHECK(pd.diagonalizable_power == 1);
}

TEST_CASE("classify cubic examples") {
    PerronData b = classify(parse_substitution(kTriboB));
    CHECK_FALSE(b.lambda.is_exact());
    double oracle = newton_root(
        2.0, [](double x) { return x * x * x - 2 * x * x - 1; }, [](double x) { return 3 * x * x - 4 * x; });
    CHECK(std::abs(b.lambda.to_double() - oracle) <= 1e-12);
    CHECK(b.lambda.approx_value().err <= 1e-12);
    CHECK(b.is_pisot);
    REQUIRE(b.conjugates.size() == 2);
    CHECK(b.conjugates[0] == std::conj(b.conjugates[1]));
    CHECK(std::abs(b.conjugates[0].imag()) > 0.5);

    PerronData a = classify(parse_substitution(kTriboA));
    CHECK(a.is_pisot);
    REQUIRE(a.conjugates.size() == 2);
    CHECK(std::trunc(a.conjugates[0].real() * 1e4) / 1e4 == doctest::Approx(-0.8019));
    CHECK(std::trunc(a.conjugates[1].real() * 1e4) / 1e4 == doctest::Approx(0.5549));

    for (const PerronData* pd : {&a, &b}) {
        // M v = lambda v and l^T M = lambda l^T within tolerance.
        Substitution s = parse_substitution(pd == &a ? kTriboA : kTriboB);
        IntMatrix m = substitution_matrix(s);
        double lam = pd->lambda.to_double();
        double sum = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            double mv = 0, lm = 0;
            for (std::size_t j = 0; j < 3; ++j) {
                mv += m[i][j].get_d() * pd->right_eigvec_normalized[j].to_double();
                lm += pd->left_eigvec[j].to_double() * m[j][i].get_d();
            }
            CHECK(mv == doctest::Approx(lam * pd->right_eigvec_normalized[i].to_double()).epsilon(1e-12));
            CHECK(lm == doctest::Approx(lam * pd->left_eigvec[i].to_double()).epsilon(1e-12));
            CHECK(pd->right_eigvec_normalized[i].to_double() > 0);
            sum += pd->right_eigvec_normalized[i].to_double();
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("primitivity and non pisot cases") {
    PerronData id = classify(parse_substitution("a -> a"));
    CHECK(id.lambda == RealValue(Rational(1)));
    CHECK_FALSE(id.is_pisot);
    PerronData red = classify(parse_substitution("a -> ab; b -> b"));
    CHECK_FALSE(red.is_primitive);
    PerronData tm = classify(parse_substitution("a -> ab; b -> ba"));
    CHECK(tm.is_primitive);
    CHECK(tm.is_pisot);
    CHECK(tm.lambda == RealValue(Rational(2)));
    PerronData np = classify(parse_substitution("a -> aaab; b -> abbb"));
    CHECK(np.lambda == RealValue(Rational(4)));
    CHECK(np.c_sigma == doctest::Approx(2.0));
    CHECK_FALSE(np.is_pisot);
    CHECK_THROWS_AS(fixed_point_seed(parse_substitution("a -> ab; b -> b")), NotPrimitive);
    CHECK_THROWS_AS(error_profile(parse_substitution("a -> aaab; b -> abbb"), np, 5), NotPisot);
}

TEST_CASE("legal words and fixed point seeds") {
    for (const char* rules : {kFibonacci, kAabb, kAabBa, kTriboB, kTriboA}) {
        Substitution s = parse_substitution(rules);
        std::set<std::string> seen;
        for (int c = 0; c < s.size(); ++c) {
            std::string w = iterate(s, std::string(1, s.letter(c)), 7);
            for (std::size_t i = 1; i < w.size(); ++i) {
                seen.insert(w.substr(i - 1, 2));
            }
        }
        std::vector<bool> legal = legal_two_letter_words(s);
        const auto m = static_cast<std::size_t>(s.size());
        for (std::size_t x = 0; x < m; ++x) {
            for (std::size_t y = 0; y < m; ++y) {
                std::string w{s.letter(static_cast<int>(x)), s.letter(static_cast<int>(y))};
                CHECK_MESSAGE(legal[x * m + y] == (seen.count(w) == 1), rules << " " << w);
            }
        }
    }
    FixedPointSeed f = fixed_point_seed(parse_substitution(kFibonacci));
    CHECK(f.power == 2);
    CHECK(f.left == 0);
    CHECK(f.right == 0);
    FixedPointSeed g = fixed_point_seed(parse_substitution(kAabb));
    CHECK(g.power == 1);
    CHECK(g.left == 1);
    CHECK(g.right == 0);
    FixedPointSeed h = fixed_point_seed(parse_substitution("a -> aa"));
    CHECK(h.power == 1);
    CHECK(h.left == 0);
    CHECK(h.right == 0);
}

TEST_CASE("supertiles") {
    Substitution f = parse_substitution(kFibonacci);
    CHECK(expand_supertile(f, 0, 3) == "abaab");
    CHECK(expand_supertile(f, 1, 0) == "b");
    // (1,1) M^10 e_1 by plain integer recursion.
    long fa = 1, fb = 0;
    for (int k = 0; k < 10; ++k) {
        long na = fa + fb;
        long nb = fa;
        fa = na;
        fb = nb;
    }
    CHECK(expand_supertile(f, 0, 10).size() == static_cast<std::size_t>(fa + fb));
    CHECK_THROWS_AS(expand_supertile(f, 0, 40, 1000), CapacityExceeded);

    SupertileStream rev(f, 0, 5, true);
    std::string back;
    int c = 0;
    while (rev.next(c)) {
        back.insert(back.begin(), f.letter(c));
    }
    CHECK(back == expand_supertile(f, 0, 5));

    for (const char* rules : {kFibonacci, kAabb, kAabBa, kTriboB, kTriboA}) {
        Substitution s = parse_substitution(rules);
        IntMatrix m = substitution_matrix(s);
        for (int i = 0; i < s.size(); ++i) {
            for (unsigned k = 0; k <= 12; ++k) {
                IntMatrix mk = matrix_power(m, k);
                SupertileStream st(s, i, k);
                std::vector<long> counts(static_cast<std::size_t>(s.size()), 0);
                while (st.next(c)) {
                    ++counts[static_cast<std::size_t>(c)];
                }
                for (std::size_t r = 0; r < counts.size(); ++r) {
                    CHECK(mk[r][static_cast<std::size_t>(i)] == counts[r]);
                }
            }
        }
    }
}

TEST_CASE("frequency convergence") {
    for (const char* rules : {kFibonacci, kAabBa, kTriboB, kTriboA}) {
        Substitution s = parse_substitution(rules);
        PerronData pd = classify(s);
        auto err_at = [&](unsigned k) {
            IntMatrix mk = matrix_power(substitution_matrix(s), k);
            BigInt total(0);
            for (const auto& row : mk) {
                total += row[0];
            }
            double e = 0;
            for (std::size_t i = 0; i < mk.size(); ++i) {
                double f = Rational(mk[i][0], total).get_d();
                e = std::max(e, std::abs(f - pd.right_eigvec_normalized[i].to_double()));
            }
            return e;
        };
        double fit = 0;
        for (unsigned k = 6; k <= 10; ++k) {
            fit = std::max(fit, err_at(k) / std::pow(pd.c_sigma, k));
        }
        for (unsigned k = 11; k <= 18; ++k) {
            CHECK_MESSAGE(err_at(k) <= 5 * fit * std::pow(pd.c_sigma, k), rules << " k=" << k);
        }
    }
}

TEST_CASE("point sets") {
    Substitution f = parse_substitution(kFibonacci);
    PerronData pd = with_first_tile_length(classify(f), RealValue(tau()));
    PointSet ps = generate_point_set(f, pd, fixed_point_seed(f), 4);
    REQUIRE(ps.size() == 9);
    CHECK(ps.anchor_index() == 4);
    CHECK(ps[4] == 0.0);
    RealValue t(tau());
    RealValue one(Rational(1));
    // Word abaab...: gaps tau, 1, tau, tau.
    CHECK(ps.exact_value(5) == t);
    CHECK(ps.exact_value(6) == t + one);
    CHECK(ps.exact_value(7) == t + t + one);
    CHECK(ps.exact_value(8) == t + t + t + one);
    // Left side: ...aba|, so x_-1 = -tau, x_-2 = -tau-1.
    CHECK(ps.exact_value(3) == -t);
    CHECK(ps.exact_value(2) == -t - one);

    Substitution g = parse_substitution(kAabb);
    PerronData pg = with_first_tile_length(classify(g), RealValue(Rational(2)));
    PointSet pa = generate_point_set(g, pg, fixed_point_seed(g), 3);
    CHECK(pa.exact_value(4) == RealValue(Rational(2)));
    CHECK(pa.exact_value(5) == RealValue(Rational(4)));
    CHECK(pa.exact_value(6) == RealValue(Rational(5)));

    PointSet one_each = generate_point_set(f, 1);
    CHECK(one_each.size() == 3);
    CHECK(one_each[one_each.anchor_index()] == 0.0);
}

TEST_CASE("density convergence") {
    for (const char* rules : {kFibonacci, kAabb, kAabBa, kTriboB, kTriboA}) {
        Substitution s = parse_substitution(rules);
        PerronData pd = classify(s);
        PointSet ps = generate_point_set(s, pd, fixed_point_seed(s), 200000);
        const double T = 1e5;
        REQUIRE(ps.back() > T);
        std::size_t count = 0;
        for (double x : ps.values()) {
            if (x >= 0 && x <= T) {
                ++count;
            }
        }
        CHECK_MESSAGE(std::abs(static_cast<double>(count) / T - pd.density.to_double()) < 1e-3, rules);
    }
}

TEST_CASE("error profile") {
    Substitution f = parse_substitution(kFibonacci);
    PerronData pd = with_first_tile_length(classify(f), RealValue(tau()));
    ErrorProfile ep = error_profile(f, pd, 20);
    double t = tau().to_double();
    CHECK(ep.epsilon[0][0] == doctest::Approx(std::abs(t - (2 + t) / (1 + t))).epsilon(1e-12));
    CHECK(ep.epsilon[0][0] == doctest::Approx(0.2361).epsilon(1e-3));

    // Supertile endpoint: sum of the letter counts times lengths equals lambda^k l_a exactly.
    IntMatrix m = substitution_matrix(f);
    RealValue lk(Rational(1));
    for (unsigned k = 0; k <= 20; ++k) {
        IntMatrix mk = matrix_power(m, k);
        RealValue end = RealValue(Rational(mk[0][0])) * pd.left_eigvec[0] + RealValue(Rational(mk[1][0])) * pd.left_eigvec[1];
        CHECK(end == lk * pd.left_eigvec[0]);
        lk = lk * pd.lambda;
    }

    for (const char* rules : {kFibonacci, kAabb, kAabBa, kTriboB, kTriboA}) {
        Substitution s = parse_substitution(rules);
        PerronData p = classify(s);
        ErrorProfile e = error_profile(s, p, 20);
        CHECK(std::isfinite(e.theoretical_bound));
        for (int i = 0; i < s.size(); ++i) {
            for (int k = 0; k <= 20; ++k) {
                CHECK(e.epsilon[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] >= 0);
                CHECK(e.epsilon[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] <= e.theoretical_bound);
            }
            for (int k = 0; k <= 9; ++k) {
                CHECK_MESSAGE(e.epsilon[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] ==
                                  doctest::Approx(scan_epsilon(s, p, i, k)).epsilon(1e-9),
                              rules << " letter " << i << " level " << k);
            }
        }
    }

    Substitution g = parse_substitution(kAabb);
    PerronData pg = with_first_tile_length(classify(g), RealValue(Rational(2)));
    CHECK(pg.density == RealValue(Rational(2, 3)));
    ErrorProfile eg = error_profile(g, pg, 20);
    for (int k = 0; k <= 20; ++k) {
        CHECK(eg.epsilon[0][static_cast<std::size_t>(k)] <= eg.theoretical_bound);
        CHECK(eg.epsilon[1][static_cast<std::size_t>(k)] <= eg.theoretical_bound);
    }
}

TEST_CASE("points stay within the theoretical bound") {
    for (const char* rules : {kFibonacci, kAabb, kAabBa, kTriboB, kTriboA}) {
        Substitution s = parse_substitution(rules);
        PerronData pd = classify(s);
        ErrorProfile ep = error_profile(s, pd, 20);
        PointSet ps = generate_point_set(s, pd, fixed_point_seed(s), 500000);
        const long double a = pd.mean_spacing.to_long_double();
        double worst = 0;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            long double m = static_cast<long double>(ps.index_of(i));
            worst = std::max(worst, static_cast<double>(std::abs(ps[i] - m * a)));
        }
        CHECK_MESSAGE(worst <= ep.theoretical_bound, rules << " worst " << worst << " bound " << ep.theoretical_bound);
    }
}

}
