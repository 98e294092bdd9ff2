#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "aperiodic/fractal.hpp"
#include "aperiodic/registry.hpp"

using namespace aperiodic;

namespace {

RealValue q(long n, long d = 1) { return RealValue(Rational(n, d)); }

Window interval(RealValue lo, RealValue hi) { return IntervalUnion({{std::move(lo), std::move(hi)}}); }

CoupledIFS one_set(std::vector<std::pair<RealValue, RealValue>> maps) {
    CoupledIFS ifs;
    ifs.set_names = {"X"};
    ifs.maps.emplace_back();
    for (auto& [r, t] : maps) {
        ifs.maps[0].push_back({0, r, {t}});
    }
    return ifs;
}

CoupledIFS cantor() { return one_set({{q(1, 3), q(0)}, {q(1, 3), q(2, 3)}}); }

std::string golden_path(const std::string& name) { return std::string(APERIODIC_TEST_DATA_DIR) + "/golden/" + name; }

} // namespace

TEST_SUITE("fractal") {

TEST_CASE("single halving map shrinks to a point") {
    auto at = ifs_attractor(one_set({{q(1, 2), q(0)}}), 12, {interval(q(0), q(1))});
    REQUIRE(at.gap_history.size() == 12);
    for (std::size_t k = 1; k < at.gap_history.size(); ++k) {
        CHECK(at.gap_history[k] / at.gap_history[k - 1] == doctest::Approx(0.5).epsilon(1e-9));
    }
    CHECK(at.total_measure() == doctest::Approx(std::ldexp(1.0, -12)));
    CHECK(at.exact_endpoints);
}

TEST_CASE("two halves of the unit interval are invariant") {
    auto at = ifs_attractor(one_set({{q(1, 2), q(0)}, {q(1, 2), q(1, 2)}}), 6, {interval(q(0), q(1))});
    for (double g : at.gap_history) {
        CHECK(g == 0.0);
    }
    for (double m : at.measure_history) {
        CHECK(m == doctest::Approx(1.0));
    }
    const auto& parts = std::get<IntervalUnion>(at.sets[0]).parts();
    REQUIRE(parts.size() == 1);
    CHECK(exact_compare(parts[0].lo, q(0)) == 0);
    CHECK(exact_compare(parts[0].hi, q(1)) == 0);
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(one_set({{q(1), q(0)}}).validate(), NotContractive);
    CHECK_THROWS_AS(one_set({{q(-3, 2), q(0)}}).validate(), NotContractive);
    CHECK_THROWS_AS(ifs_attractor(one_set({{q(1), q(1)}}), 3, {interval(q(0), q(1))}), NotContractive);
    CoupledIFS bad = cantor();
    bad.maps[0][0].source = 4;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(ifs_attractor(cantor(), 3, {}), std::invalid_argument);
    CHECK(cantor().max_ratio() == doctest::Approx(1.0 / 3));
}

TEST_CASE("Cantor set") {
    auto at = ifs_attractor(cantor(), 8, ifs_hull_seed(cantor()));
    CHECK(at.exact_endpoints);
    CHECK(std::get<IntervalUnion>(at.sets[0]).parts().size() == 256);
    CHECK(at.total_measure() == doctest::Approx(std::pow(2.0 / 3, 8)).epsilon(1e-6));
    for (std::size_t k = 1; k < at.gap_history.size(); ++k) {
        CHECK(at.gap_history[k] / at.gap_history[k - 1] == doctest::Approx(1.0 / 3).epsilon(1e-6));
    }
    BoxCloud cloud = rasterize(at.sets[0], 1e-4);
    auto d = box_dimension(cloud, false, default_box_scales(cloud));
    CHECK(d.estimate == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(0.05));
}

TEST_CASE("hull seed contains the attractor") {
    for (const auto& ifs : {cantor(), one_set({{q(-1, 2), q(3)}, {q(1, 4), q(-5)}})}) {
        auto seed = ifs_hull_seed(ifs);
        auto at = ifs_attractor(ifs, 10, seed);
        auto sb = window_bounds(seed[0])[0], ab = window_bounds(at.sets[0])[0];
        CHECK(sb.first <= ab.first);
        CHECK(ab.second <= sb.second);
    }
}

TEST_CASE("substitution IFS of a -> aab, b -> ba") {
    Example ex = get_example("aab_ba");
    CoupledIFS ifs = substitution_ifs(*ex.substitution, example_perron(ex));
    CHECK(ifs.dim == 1);
    CHECK(ifs.set_names.size() == 2);
    CHECK(ifs.max_ratio() == doctest::Approx(0.3819660113));
    IfsOptions opts;
    opts.merge_resolution = 1e-6;
    auto at = ifs_attractor(ifs, 10, ifs_hull_seed(ifs), opts);
    CHECK(at.exact_endpoints);
    for (std::size_t k = 4; k < at.gap_history.size(); ++k) {
        CHECK(at.gap_history[k] / at.gap_history[k - 1] == doctest::Approx(0.3819660113).epsilon(1e-3));
    }
    for (std::size_t k = 1; k < at.measure_history.size(); ++k) {
        CHECK(at.measure_history[k] <= at.measure_history[k - 1] + 1e-12);
    }
    CHECK(at.total_measure() > 1.9);
}

TEST_CASE("substitution IFS rejects non-Pisot input") {
    Substitution s = parse_substitution("a -> abbb; b -> a");
    CHECK_THROWS_AS(substitution_ifs(s, classify(s)), NotPisot);
    CHECK_THROWS_AS(rauzy_window_cloud(s, 100), NotPisot);
}

TEST_CASE("box dimension of simple shapes") {
    BoxCloud square = rasterize(Polygon{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}, 1e-3);
    auto ds = box_dimension(square, false, default_box_scales(square));
    CHECK(ds.estimate == doctest::Approx(2.0).epsilon(0.025));
    auto db = box_dimension(square, true, default_box_scales(square));
    CHECK(db.estimate == doctest::Approx(1.0).epsilon(0.05));
    BoxCloud segment = rasterize(interval(q(0), q(1)), 1e-4);
    auto dl = box_dimension(segment, false, default_box_scales(segment));
    CHECK(dl.estimate == doctest::Approx(1.0).epsilon(0.05));
    CHECK(dl.r2 > 0.99);
    CHECK_THROWS_AS(box_dimension(segment, false, {0.5}), std::invalid_argument);
    BoxCloud dot(1, 1e-3, {0, 0}, {{0, 0}});
    CHECK_THROWS_AS(box_dimension(dot, false, {0.1, 0.05, 0.025, 0.0125}), DegenerateFit);
}

TEST_CASE("Rauzy clouds") {
    Example fib = get_example("fibonacci");
    BoxCloud one = rauzy_window_cloud(*fib.substitution, 1, 0.01);
    REQUIRE(one.size() == 1);
    CHECK(one.cells()[0] == BoxCloud::Cell{0, 0});

    BoxCloud small = rauzy_window_cloud(*fib.substitution, 1000, 0.01);
    BoxCloud big = rauzy_window_cloud(*fib.substitution, 10000, 0.01);
    CHECK(small.size() <= big.size());
    for (const auto& c : small.cells()) {
        CHECK(big.has_cell(c));
    }
    auto pts = rauzy_points(*fib.substitution, 100000);
    CHECK(pts.size() == 100000);
    double lo = 0, hi = 0;
    for (const auto& p : pts) {
        lo = std::min(lo, p[0]);
        hi = std::max(hi, p[0]);
    }
    CHECK(hi - lo == doctest::Approx(1 + golden_ratio().to_double()).epsilon(1e-3));

    Example tri = get_example("tribo_abc_ab_b");
    BoxCloud cloud = rauzy_window_cloud(*tri.substitution, 100000);
    CHECK(cloud.dim() == 2);
    auto d = box_dimension(cloud, true, default_box_scales(cloud, 4));
    CHECK(d.estimate > 1.0);
    CHECK(d.estimate < 2.0);
}

TEST_CASE("two-dimensional IFS") {
    CoupledIFS ifs;
    ifs.dim = 2;
    ifs.set_names = {"S"};
    ifs.maps.emplace_back();
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            ifs.maps[0].push_back({0, q(1, 2), {q(i, 2), q(j, 2)}});
        }
    }
    IfsOptions opts;
    opts.box_h = 1.0 / 64;
    auto at = ifs_attractor(ifs, 4, ifs_hull_seed(ifs), opts);
    CHECK(std::holds_alternative<BoxCloud>(at.sets[0]));
    CHECK(at.total_measure() == doctest::Approx(1.0).epsilon(0.1));
    auto b = window_bounds(at.sets[0]);
    CHECK(b[0].first <= 1e-9);
    CHECK(b[0].second >= 1 - 1e-9);
}

TEST_CASE("render") {
    CHECK(parse_image_format("svg") == ImageFormat::svg);
    CHECK(parse_image_format("pgm") == ImageFormat::pgm);
    CHECK_THROWS_AS(parse_image_format("png"), UnsupportedFormat);
    CHECK_THROWS_AS(render(interval(q(0), q(1)), ImageFormat::pgm, 10), std::invalid_argument);

    std::string img = render(Window(IntervalUnion()), ImageFormat::pgm, 64);
    std::string header = "P5\n64 64\n255\n";
    REQUIRE(img.size() == header.size() + 64 * 64);
    CHECK(img.substr(0, header.size()) == header);
    CHECK(img.find('\0', header.size()) == std::string::npos);

    std::string bar = render(interval(q(0), q(1)), ImageFormat::pgm, 64);
    const unsigned char* px = reinterpret_cast<const unsigned char*>(bar.data() + header.size());
    CHECK(px[32 * 64 + 32] == 0);
    CHECK(px[2 * 64 + 32] == 255);
    CHECK(px[32 * 64 + 0] == 255);

    std::string svg = render(interval(q(0), q(1)), ImageFormat::svg, 128);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("golden Rauzy image") {
    Example ex = get_example("tribo_abc_ab_a");
    BoxCloud cloud = rauzy_window_cloud(*ex.substitution, 100000);
    std::string img = render(cloud, ImageFormat::pgm, 256);
    std::ifstream in(golden_path("rauzy_tribo_abc_ab_a.pgm"), std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(img == ss.str());
}

}
