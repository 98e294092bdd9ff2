#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"

#include "aperiodic/registry.hpp"
#include "cli.hpp"
#include "scheme_file.hpp"

using namespace aperiodic;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// key = value lines of a report.
std::map<std::string, std::string> report(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find(" = ");
        if (eq != std::string::npos && line[0] != '#') {
            kv.emplace(line.substr(0, eq), line.substr(eq + 3));
        }
    }
    return kv;
}

// "sym [dec]" -> sym
RealValue value_of(const std::string& shown) {
    if (!shown.empty() && shown[0] == '~') {
        return RealValue::approx(std::stod(shown.substr(1)), 0.0);
    }
    auto br = shown.find(" [");
    return parse_real(br == std::string::npos ? shown : shown.substr(0, br));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t at = 0;
    for (;;) {
        auto c = s.find(", ", at);
        out.push_back(s.substr(at, c == std::string::npos ? std::string::npos : c - at));
        if (c == std::string::npos) {
            return out;
        }
        at = c + 2;
    }
}

bool same_value(const RealValue& parsed, const RealValue& stored) {
    if (stored.is_exact()) {
        return exact_compare(parsed, stored) == 0;
    }
    return parsed.to_double() == stored.to_double();
}

std::string read_all(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch_dir() {
    auto d = std::filesystem::temp_directory_path() / "aperiodic_cli_tests";
    std::filesystem::create_directories(d);
    return d;
}

const char* kFibScheme = "# Fibonacci model set\n"
                         "column = 1, -1\n"
                         "column = tau, 1/tau\n"
                         "window = [-1/tau, 1)\n";

} // namespace

TEST_SUITE("cli") {

TEST_CASE("examples list") {
    Result r = run_cli({"examples", "list"});
    CHECK(r.code == 0);
    for (const auto& name : example_names()) {
        CHECK(r.out.find(name + "\t") != std::string::npos);
    }
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 7);
}

TEST_CASE("subst analyze fibonacci") {
    Result r = run_cli({"subst", "analyze", "@fibonacci"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("# aperiodic subst analyze seed=", 0) == 0);
    auto kv = report(r.out);
    CHECK(kv["matrix"] == "[[1,1],[1,0]]");
    CHECK(kv["lambda"] == "(1+sqrt(5))/2 [1.61803398875]");
    RealValue tau = golden_ratio(), one(Rational(1)), two(Rational(2));
    CHECK(exact_compare(value_of(kv["density"]), (one + tau) / (two + tau)) == 0);
    CHECK(kv["pisot"] == "true");
    CHECK(kv["primitive"] == "true");
}

TEST_CASE("analyze output round-trips for every substitution example") {
    for (const auto& name : example_names()) {
        Example ex = get_example(name);
        if (!ex.substitution) {
            CHECK(run_cli({"subst", "analyze", "@" + name}).code == 2);
            continue;
        }
        CAPTURE(name);
        Result r = run_cli({"subst", "analyze", "@" + name});
        REQUIRE(r.code == 0);
        auto kv = report(r.out);
        PerronData pd = example_perron(ex);
        CHECK(parse_substitution(kv["rules"]) == *ex.substitution);
        CHECK(kv["matrix"] == format_matrix(substitution_matrix(*ex.substitution)));
        CHECK(same_value(value_of(kv["lambda"]), pd.lambda));
        CHECK(same_value(value_of(kv["density"]), pd.density));
        CHECK(same_value(value_of(kv["mean_spacing"]), pd.mean_spacing));
        auto lengths = split_list(kv["tile_lengths"]), freqs = split_list(kv["frequencies"]);
        REQUIRE(lengths.size() == pd.left_eigvec.size());
        REQUIRE(freqs.size() == pd.right_eigvec_normalized.size());
        for (std::size_t i = 0; i < lengths.size(); ++i) {
            CHECK(same_value(value_of(lengths[i]), pd.left_eigvec[i]));
            CHECK(same_value(value_of(freqs[i]), pd.right_eigvec_normalized[i]));
        }
        CHECK((kv["pisot"] == "true") == pd.is_pisot);
    }
}

TEST_CASE("half-Fibonacci deviation is growing") {
    Result r = run_cli({"bde", "deviation", "@half_fibonacci_1", "--range", "1e6"});
    CHECK(r.code == 0);
    CHECK(report(r.out)["verdict"] == "growing");
}

TEST_CASE("fibonacci deviation is bounded and matches at max_dev + a") {
    Result r = run_cli({"bde", "deviation", "@fibonacci", "--range", "1e4"});
    REQUIRE(r.code == 0);
    auto kv = report(r.out);
    CHECK(kv["verdict"] == "bounded");
    const double radius = std::stod(kv["max_dev"]) + value_of(kv["a"]).to_double();
    Result m = run_cli({"bde", "match", "@fibonacci", "lattice:(5-sqrt(5))/2", "--range", "1e4", "--radius",
                        std::to_string(radius)});
    CHECK(m.code == 0);
    CHECK(report(m.out)["matching"] == "found");
    Result fail = run_cli({"bde", "match", "@fibonacci", "lattice:(5-sqrt(5))/2", "--range", "100", "--radius", "0.01"});
    CHECK(fail.code == 1);
    CHECK(report(fail.out)["matching"] == "none");
}

TEST_CASE("reports are deterministic") {
    auto dir = scratch_dir();
    for (int i = 0; i < 2; ++i) {
        auto tag = std::to_string(i);
        REQUIRE(run_cli({"bde", "deviation", "@half_fibonacci_2", "--range", "1e4", "--trials", "200", "--seed", "7",
                         "--out", (dir / ("dev" + tag + ".csv")).string()})
                    .code == 0);
        REQUIRE(run_cli({"window", "rauzy", "@tribo_abc_ab_a", "--count", "20000", "--out",
                         (dir / ("r" + tag + ".pgm")).string()})
                    .code == 0);
        REQUIRE(run_cli({"brs", "profile", "@half_fibonacci_1", "--levels", "10", "--out",
                         (dir / ("p" + tag + ".csv")).string()})
                    .code == 0);
    }
    for (const char* f : {"dev", "r", "p"}) {
        std::string ext = std::string(f) == "r" ? ".pgm" : ".csv";
        auto a = read_all(dir / (f + std::string("0") + ext)), b = read_all(dir / (f + std::string("1") + ext));
        CHECK(!a.empty());
        CHECK(a == b);
    }
    Result x = run_cli({"bde", "deviation", "@half_fibonacci_2", "--range", "1e4", "--trials", "200", "--seed", "7"});
    Result y = run_cli({"bde", "deviation", "@half_fibonacci_2", "--range", "1e4", "--trials", "200", "--seed", "7"});
    CHECK(x.out == y.out);
    CHECK(x.out.find("seed=7") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"subst"}).code == 2);
    CHECK(run_cli({"subst", "analyze"}).code == 2);
    CHECK(run_cli({"subst", "analyze", "@nope"}).code == 2);
    Result bad = run_cli({"subst", "analyze", "a -> ac"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("unknown letter 'c'") != std::string::npos);
    CHECK(run_cli({"subst", "analyze", "not-a-source"}).code == 2);
    CHECK(run_cli({"window", "rauzy", "@fibonacci", "--out", "x.png", "--count", "10"}).code == 2);
    CHECK(run_cli({"window", "render", "@aab_ba", "--count", "10"}).code == 2);
    CHECK(run_cli({"cps", "density", "@aab_ba"}).code == 2);
    CHECK(run_cli({"kesten", "0", "1/2"}).code == 2);
    CHECK(run_cli({"bde", "deviation", "@fibonacci", "--range", "abc"}).code == 2);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("computation errors exit 1") {
    Result r = run_cli({"window", "rauzy", "a -> abbb; b -> a", "--count", "100"});
    CHECK(r.code == 1);
    CHECK(r.err.find("Pisot") != std::string::npos);
    CHECK(run_cli({"window", "ifs", "@aab_ba", "--levels", "40", "--resolution", "1e-15"}).code == 1);
    CHECK(run_cli({"window", "dimension", "@fibonacci", "--count", "3"}).code == 1);
}

TEST_CASE("kesten reports both tests") {
    Result r = run_cli({"kesten", "0", "1/tau", "tau-1", "--levels", "14"});
    REQUIRE(r.code == 0);
    auto kv = report(r.out);
    CHECK(kv["kesten"] == "true");
    CHECK(kv["verdict"] == "bounded");
    CHECK(kv["agree"] == "true");
    Result g = run_cli({"kesten", "0", "1/2", "tau-1", "--levels", "20"});
    REQUIRE(g.code == 0);
    CHECK(report(g.out)["kesten"] == "false");
}

TEST_CASE("scheme files") {
    CutProjectScheme s = parse_scheme_file(kFibScheme);
    CHECK(same_points(cps_points(s, -100, 100), cps_points(fibonacci_scheme(), -100, 100)));

    auto path = scratch_dir() / "fib.scheme";
    std::ofstream(path) << kFibScheme;
    Result r = run_cli({"cps", "density", path.string()});
    REQUIRE(r.code == 0);
    CHECK(exact_compare(value_of(report(r.out)["density"]), cps_density(fibonacci_scheme())) == 0);
    Result p = run_cli({"cps", "points", path.string(), "--range", "20"});
    Result q = run_cli({"cps", "points", "@fibonacci", "--range", "20"});
    CHECK(p.out.substr(p.out.find("index,x")) == q.out.substr(q.out.find("index,x")));

    CutProjectScheme two = parse_scheme_file("column = 1, 0, 0\ncolumn = 0, 1, 0\ncolumn = sqrt(2), 0, 1\n"
                                             "polygon = (0, 0) (1, 0) (1, 1) (0, 1)\noffset = 0, 1/2, 0\n");
    CHECK(two.dim_internal() == 2);

    auto line_of = [](const char* text) {
        try {
            parse_scheme_file(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("column = 1, -1\ncolumn = tau, 1/tau\nwindw = [0, 1)\n") == 3);
    CHECK(line_of("column = 1, -1\ncolumn = tau, 1/tu\nwindow = [0, 1)\n") == 2);
    CHECK(line_of("column = 1, -1\ncolumn = tau, 1/tau\nwindow = [0, 1\n") == 3);
    CHECK(line_of("column = 1, -1\ncolumn = tau, 1/tau\n") > 0);
    CHECK(line_of("column = 1, -1\ncolumn = tau, 1/tau\nwindow = [1, 0)\n") == 3);
    CHECK_THROWS_AS(parse_scheme_file("column = 1, -1, 2\ncolumn = tau, 1/tau\nwindow = [0, 1)\n"), ParseError);
}

}
