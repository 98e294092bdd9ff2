#include "aperiodic/registry.hpp"

#include "aperiodic/errors.hpp"

namespace aperiodic {

RealValue golden_ratio() { return RealValue(QuadraticElement(Rational(1, 2), Rational(1, 2), 5)); }

namespace {

RealValue one() { return RealValue(Rational(1)); }

CutProjectScheme fibonacci_with(const RealValue& lo, const RealValue& hi) {
    RealValue t = golden_ratio();
    RealMatrix basis{{one(), t}, {-one(), one() / t}};
    return CutProjectScheme(basis, IntervalUnion({{lo, hi}}));
}

RealValue half_point() { return (one() - one() / golden_ratio()) / RealValue(Rational(2)); }

} // namespace

CutProjectScheme fibonacci_scheme() { return fibonacci_with(-one() / golden_ratio(), one()); }

const std::vector<std::string>& example_names() {
    static const std::vector<std::string> names{"fibonacci", "half_fibonacci_1", "half_fibonacci_2", "aabb_ab",
                                                "aab_ba",    "tribo_abc_ab_b",   "tribo_abc_ab_a"};
    return names;
}

Example get_example(const std::string& name) {
    const RealValue t = golden_ratio();
    if (name == "fibonacci") {
        return {name, "a -> ab, b -> a; tiles (tau, 1); window [-1/tau, 1)", parse_substitution("a -> ab; b -> a"),
                fibonacci_scheme(), t};
    }
    if (name == "half_fibonacci_1") {
        return {name, "Fibonacci lattice, window [-1/tau, (1-1/tau)/2)", std::nullopt,
                fibonacci_with(-one() / t, half_point()), std::nullopt};
    }
    if (name == "half_fibonacci_2") {
        return {name, "Fibonacci lattice, window [(1-1/tau)/2, 1)", std::nullopt, fibonacci_with(half_point(), one()),
                std::nullopt};
    }
    if (name == "aabb_ab") {
        return {name, "a -> aabb, b -> ab; eigenvalues 3, 0; tiles (2, 1); density 2/3",
                parse_substitution("a -> aabb; b -> ab"), std::nullopt, RealValue(Rational(2))};
    }
    if (name == "aab_ba") {
        return {name, "a -> aab, b -> ba; lambda = tau^2; tiles (tau, 1)", parse_substitution("a -> aab; b -> ba"),
                std::nullopt, t};
    }
    if (name == "tribo_abc_ab_b") {
        return {name, "a -> abc, b -> ab, c -> b; x^3-2x^2-1, complex contracting pair",
                parse_substitution("a -> abc; b -> ab; c -> b"), std::nullopt, std::nullopt};
    }
    if (name == "tribo_abc_ab_a") {
        return {name, "a -> abc, b -> ab, c -> a; x^3-2x^2-x+1, roots -0.8019 and 0.5549",
                parse_substitution("a -> abc; b -> ab; c -> a"), std::nullopt, std::nullopt};
    }
    throw UnknownExample("unknown example '" + name + "'");
}

PerronData example_perron(const Example& ex) {
    if (!ex.substitution) {
        throw std::invalid_argument("example '" + ex.name + "' has no substitution");
    }
    PerronData pd = classify(*ex.substitution);
    if (ex.first_tile_length) {
        pd = with_first_tile_length(pd, *ex.first_tile_length);
    }
    return pd;
}

} // namespace aperiodic
