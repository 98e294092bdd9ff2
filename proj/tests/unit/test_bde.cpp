#include <random>
#include <sstream>

#include "doctest.h"

#include "aperiodic/bde.hpp"
#include "aperiodic/registry.hpp"
#include "support/oracles.hpp"

using namespace aperiodic;

namespace {

PointSet example_points(const std::string& name, std::size_t each_side, PerronData* pd_out = nullptr) {
    Example ex = get_example(name);
    PerronData pd = example_perron(ex);
    if (pd_out) {
        *pd_out = pd;
    }
    return generate_point_set(*ex.substitution, pd, fixed_point_seed(*ex.substitution), each_side);
}

PointSet from_values(std::vector<double> v, std::optional<RealValue> density = std::nullopt) {
    std::sort(v.begin(), v.end());
    return PointSet(v, default_anchor(v), std::move(density));
}

PointSet jittered_lattice(std::mt19937_64& rng, int n, double jitter) {
    std::uniform_real_distribution<double> d(-jitter, jitter);
    std::vector<double> v;
    for (int i = -n; i <= n; ++i) {
        v.push_back(i + (i == 0 ? 0.0 : d(rng)));
    }
    return from_values(v);
}

} // namespace

TEST_SUITE("bde") {

TEST_CASE("deviation from an exact lattice") {
    RealValue a(Rational(3, 2));
    DeviationReport r = lattice_deviation(PointSet::lattice(a, -3000, 3000), a);
    CHECK(r.max_dev == 0.0);
    CHECK(r.verdict == Verdict::bounded);
    CHECK(r.count == 4000);
    CHECK_THROWS_AS(lattice_deviation(PointSet::lattice(a, 0, 10), RealValue()), std::invalid_argument);
}

TEST_CASE("deviation of substitution point sets") {
    for (const std::string name : {"fibonacci", "aabb_ab", "aab_ba"}) {
        PerronData pd;
        PointSet ps = example_points(name, 100000, &pd);
        DeviationReport r = lattice_deviation(ps, pd.mean_spacing);
        ErrorProfile ep = error_profile(*get_example(name).substitution, pd, 20);
        CAPTURE(name);
        CHECK(r.verdict == Verdict::bounded);
        CHECK(r.max_dev <= ep.theoretical_bound);
        CHECK(r.max_dev == doctest::Approx(oracle::max_deviation(ps, pd.mean_spacing.to_double())).epsilon(1e-9));
        for (std::size_t j = 1; j < r.dev_series.size(); ++j) {
            CHECK(r.dev_series[j] >= r.dev_series[j - 1]);
        }
    }
    PerronData pd;
    PointSet aabb = example_points("aabb_ab", 1000, &pd);
    CHECK(pd.mean_spacing == RealValue(Rational(3, 2)));
    CHECK(lattice_deviation(aabb, RealValue(Rational(3, 2))).verdict == Verdict::bounded);
}

TEST_CASE("deviation is translation invariant") {
    PerronData pd;
    PointSet ps = example_points("fibonacci", 20000, &pd);
    DeviationReport base = lattice_deviation(ps, pd.mean_spacing);
    for (long k : {-7L, 3L, 1000L}) {
        DeviationReport moved = lattice_deviation(ps.translated(k * pd.mean_spacing), pd.mean_spacing);
        CHECK(moved.max_dev == doctest::Approx(base.max_dev).epsilon(1e-9));
        CHECK(moved.verdict == base.verdict);
    }
}

TEST_CASE("half fibonacci deviation grows") {
    const CutProjectScheme f1 = *get_example("half_fibonacci_1").scheme;
    RealValue a = RealValue(Rational(1)) / cps_density(f1);
    DeviationReport small = lattice_deviation(cps_points(f1, -1e4, 1e4), a);
    DeviationReport large = lattice_deviation(cps_points(f1, -2e5, 2e5), a);
    CHECK(large.max_dev > small.max_dev);
    CHECK(large.verdict == Verdict::growing);
}

TEST_CASE("laczkovich interval check") {
    RealValue a(Rational(7, 5));
    LaczkovichReport lat = laczkovich_interval_check(PointSet::lattice(a, -1e4, 1e4), a, 500);
    CHECK(lat.C_estimate <= 1.0);
    CHECK(lat.seed == 0x1ac2024);

    PerronData pd;
    PointSet fib = example_points("fibonacci", 80000, &pd);
    LaczkovichReport c4 = laczkovich_interval_check(fib.slice(-1e4, 1e4), pd.mean_spacing, 2000);
    LaczkovichReport c5 = laczkovich_interval_check(fib.slice(-1e5, 1e5), pd.mean_spacing, 2000);
    CHECK(c4.C_estimate < 2.5);
    CHECK(c5.C_estimate < 2.5);
    CHECK(c5.verdict != Verdict::growing);

    // Deterministic for a fixed seed.
    LaczkovichReport again = laczkovich_interval_check(fib.slice(-1e4, 1e4), pd.mean_spacing, 2000);
    CHECK(again.C_estimate == c4.C_estimate);

    const CutProjectScheme f1 = *get_example("half_fibonacci_1").scheme;
    LaczkovichReport h = laczkovich_interval_check(cps_points(f1, -1e5, 1e5), RealValue(Rational(1)) / cps_density(f1), 2000);
    CHECK(h.C_estimate > c5.C_estimate + 1);
    CHECK(h.verdict != Verdict::bounded);

    CHECK_THROWS_AS(laczkovich_interval_check(fib, pd.mean_spacing, 0), std::invalid_argument);
}

TEST_CASE("matching identical sets") {
    PointSet A = example_points("fibonacci", 500);
    for (double r : {1e-9, 0.5, 3.0}) {
        MatchingCertificate c = bottleneck_matching(A, A, r);
        REQUIRE(c.pairs.size() == A.size());
        for (const auto& [i, j] : c.pairs) {
            CHECK(i == j);
        }
        CHECK(c.unmatched_boundary == 0);
    }
    CHECK_THROWS_AS(bottleneck_matching(A, A, 0.0), std::invalid_argument);
}

TEST_CASE("matching certificates are valid") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        PointSet A = jittered_lattice(rng, 300, 0.45);
        PointSet B = jittered_lattice(rng, 300, 0.45);
        const double lo = std::min(A.front(), B.front()), hi = std::max(A.back(), B.back());
        for (double r : {0.2, 0.6, 1.0}) {
            try {
                MatchingCertificate c = bottleneck_matching(A, B, r);
                std::vector<bool> used_a(A.size()), used_b(B.size());
                for (const auto& [i, j] : c.pairs) {
                    CHECK(std::abs(A[i] - B[j]) <= r);
                    CHECK_FALSE(used_a[i]);
                    CHECK_FALSE(used_b[j]);
                    used_a[i] = used_b[j] = true;
                }
                for (std::size_t i = 0; i < A.size(); ++i) {
                    if (!used_a[i]) {
                        CHECK((A[i] - lo <= r || hi - A[i] <= r));
                    }
                }
                for (std::size_t j = 0; j < B.size(); ++j) {
                    if (!used_b[j]) {
                        CHECK((B[j] - lo <= r || hi - B[j] <= r));
                    }
                }
                CHECK(r >= 0.2);
            } catch (const NoMatching& e) {
                CHECK(oracle::is_hall_violation(A, B, r, e.witness(), lo, hi));
            }
        }
        // Index-aligned pairs are within 0.9, so 1.0 must succeed.
        CHECK_NOTHROW(bottleneck_matching(A, B, 1.0));
    }
}

TEST_CASE("matching failure carries a hall witness") {
    // Three points of A squeezed where B has one.
    PointSet A = from_values({0, 1, 2, 3, 4.9, 5, 5.1, 7, 8, 9, 10});
    PointSet B = from_values({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    try {
        bottleneck_matching(A, B, 0.3);
        FAIL("expected NoMatching");
    } catch (const NoMatching& e) {
        CHECK(e.witness().X.size() > e.witness().neighbours.size());
        CHECK(oracle::is_hall_violation(A, B, 0.3, e.witness(), 0, 10));
    }
    CHECK_NOTHROW(bottleneck_matching(A, B, 1.0));

    // A gap in A: the witness comes from B.
    PointSet C = from_values({0, 1, 2, 3, 7, 8, 9, 10});
    PointSet D = from_values({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    try {
        bottleneck_matching(C, D, 0.5);
        FAIL("expected NoMatching");
    } catch (const NoMatching& e) {
        CHECK(e.witness().side == 'B');
        CHECK(oracle::is_hall_violation(C, D, 0.5, e.witness(), 0, 10));
    }
}

TEST_CASE("minimal radius search is monotone") {
    std::mt19937_64 rng(5);
    PointSet A = jittered_lattice(rng, 400, 0.4);
    PointSet B = jittered_lattice(rng, 400, 0.4);
    RadiusSearch s = minimal_matching_radius(A, B);
    CHECK(s.radius - s.infeasible_below <= 1e-6);
    CHECK(s.radius <= 0.8 + 1e-6);
    CHECK_THROWS_AS(bottleneck_matching(A, B, s.infeasible_below), NoMatching);
    for (double f : {1.0, 1.01, 1.5, 3.0}) {
        CHECK_NOTHROW(bottleneck_matching(A, B, s.radius * f));
    }
}

TEST_CASE("matching agrees with lattice deviation") {
    for (const std::string name : {"fibonacci", "aabb_ab", "aab_ba"}) {
        PerronData pd;
        PointSet ps = example_points(name, 20000, &pd);
        DeviationReport r = lattice_deviation(ps, pd.mean_spacing);
        REQUIRE(r.verdict == Verdict::bounded);
        PointSet L = PointSet::lattice(pd.mean_spacing, ps.front(), ps.back() + 1e-9);
        CAPTURE(name);
        CHECK_NOTHROW(bottleneck_matching(ps, L, r.max_dev + pd.mean_spacing.to_double()));
        RadiusSearch s = minimal_matching_radius(ps.slice(-2000, 2000), L.slice(-2000, 2000));
        CHECK(s.radius <= r.max_dev + 1e-6);
    }
}

TEST_CASE("half fibonacci matching radius grows with range") {
    const CutProjectScheme f1 = *get_example("half_fibonacci_1").scheme;
    const CutProjectScheme f2 = *get_example("half_fibonacci_2").scheme;
    RadiusSearch small = minimal_matching_radius(cps_points(f1, 0, 1e3), cps_points(f2, 0, 1e3), 1e-6, 1e6, std::make_pair(0.0, 1e3));
    RadiusSearch large = minimal_matching_radius(cps_points(f1, 0, 1e5), cps_points(f2, 0, 1e5), 1e-6, 1e6, std::make_pair(0.0, 1e5));
    CHECK(large.radius > small.radius);
}

TEST_CASE("divide experiment") {
    RealValue one(Rational(1));
    PointSet Z = PointSet::lattice(one, -1000, 1000);
    std::vector<double> even, odd;
    for (double v : Z.values()) {
        (static_cast<long>(v) % 2 == 0 ? even : odd).push_back(v);
    }
    DivideReport r = divide_experiment(Z, {from_values(even), from_values(odd)}, one);
    CHECK(r.n == 2);
    for (const auto& p : r.parts) {
        CHECK(p.predicted.verdict == Verdict::bounded);
        CHECK(p.predicted.max_dev <= 1.0);
    }

    // Fibonacci split by the letter of the tile starting at each point.
    PerronData pd;
    PointSet fib = example_points("fibonacci", 50000, &pd);
    const double tau = golden_ratio().to_double();
    std::vector<double> at_a, at_b;
    for (std::size_t i = 0; i + 1 < fib.size(); ++i) {
        (std::abs(fib[i + 1] - fib[i] - tau) < 1e-6 ? at_a : at_b).push_back(fib[i]);
    }
    PointSet body = from_values(std::vector<double>(fib.values().begin(), fib.values().end() - 1));
    const RealValue dens_a = pd.density * pd.right_eigvec_normalized[0];
    const RealValue dens_b = pd.density * pd.right_eigvec_normalized[1];
    DivideReport f = divide_experiment(body, {from_values(at_a, dens_a), from_values(at_b, dens_b)}, pd.mean_spacing);
    REQUIRE(f.parts[0].own);
    CHECK(f.parts[0].own->verdict == Verdict::bounded);
    CHECK(f.parts[1].own->verdict == Verdict::bounded);
    // Frequencies differ from 1/2, so n*a is the wrong spacing.
    CHECK(f.parts[0].predicted.verdict == Verdict::growing);

    CHECK_THROWS_AS(divide_experiment(Z, {from_values(even), from_values(even)}, one), NotAPartition);
    CHECK_THROWS_AS(divide_experiment(Z, {from_values(even)}, one), NotAPartition);
    CHECK_THROWS_AS(divide_experiment(Z, {from_values(even), from_values({0.5})}, one), NotAPartition);
}

TEST_CASE("half fibonacci divide") {
    const CutProjectScheme f = fibonacci_scheme();
    const CutProjectScheme f1 = *get_example("half_fibonacci_1").scheme;
    const CutProjectScheme f2 = *get_example("half_fibonacci_2").scheme;
    PointSet all = cps_points(f, -2e5, 2e5);
    DivideReport r = divide_experiment(all, {cps_points(f1, -2e5, 2e5), cps_points(f2, -2e5, 2e5)},
                                       RealValue(Rational(1)) / cps_density(f));
    CHECK(r.parts[0].predicted.verdict == Verdict::growing);
    CHECK(r.parts[1].predicted.verdict == Verdict::growing);
}

TEST_CASE("serialisation") {
    PointSet A = from_values({0, 1, 2});
    PointSet B = from_values({0.1, 1.1, 2.1});
    MatchingCertificate c = bottleneck_matching(A, B, 0.2);
    std::ostringstream os;
    write_matching_csv(os, A, B, c);
    CHECK(os.str() == "a_index,b_index,a,b\n0,0,0,0.1\n1,1,1,1.1\n2,2,2,2.1\n");
    const std::string j = summary_json(c);
    CHECK(j.find('\n') == std::string::npos);
    CHECK(j.find("\"pairs\":3") != std::string::npos);

    DeviationReport d = lattice_deviation(PointSet::lattice(RealValue(Rational(1)), -4, 4), RealValue(Rational(1)));
    std::ostringstream dv;
    write_deviation_csv(dv, d);
    CHECK(dv.str().rfind("level,max_dev\n0,0\n", 0) == 0);
    CHECK(summary_json(d).find("\"verdict\":\"bounded\"") != std::string::npos);
}

}
