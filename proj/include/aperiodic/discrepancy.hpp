#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "aperiodic/cutproject.hpp"
#include "aperiodic/numerics.hpp"
#include "aperiodic/verdict.hpp"
#include "aperiodic/window.hpp"

namespace aperiodic {

using TorusPoint = std::vector<RealValue>;

// Rotation by alpha on [0,1)^d with a window W inside the unit cube.
struct RotationSystem {
    std::vector<RealValue> alpha;
    Window window;
    std::vector<TorusPoint> start_points;

    // Checks window inside [0,1]^d, alpha in [0,1)^d and start points in [0,1)^d.
    void validate() const;
};

// {0, 1/7, tau - 1, three fixed pseudo-random dyadic rationals} in each coordinate.
std::vector<TorusPoint> default_start_points(int d);

// Hits of (x + k alpha) mod 1 in W for k < n, minus n mu(W). The orbit is exact
// when alpha, x and the window endpoints lie in one quadratic field.
double discrepancy_value(const RotationSystem& sys, const TorusPoint& x, std::uint64_t n);

struct DiscrepancyProfile {
    std::vector<std::uint64_t> horizons;
    // max over start points of max_{n' <= n} |D_n'|
    std::vector<double> max_abs_D;
    // per_start[s][j]
    std::vector<std::vector<double>> per_start;
    std::vector<std::string> start_labels;
    Verdict verdict = Verdict::inconclusive;
    double growth_ratio = 0.0;
    VerdictPolicy policy;
    bool exact_orbit = false;
};

constexpr int kMaxProfileExponent = 26;

DiscrepancyProfile discrepancy_profile(const RotationSystem& sys, int K, const VerdictPolicy& policy = {});

struct KestenCertificate {
    bool holds = false;
    // b - a = k alpha + l
    std::optional<std::pair<std::int64_t, std::int64_t>> witness;
    std::int64_t search_bound = 0;
    // A negative answer only means no witness with |k| <= search_bound.
    bool exhaustive_only = true;
    std::string reason;
};

KestenCertificate kesten_test(const RealValue& a, const RealValue& b, const RealValue& alpha,
                              std::int64_t search_bound = 1000);

// Profile of the rotation system read off the canonical form of the scheme.
// The orbit of the scheme's own internal offset comes first, then the defaults.
DiscrepancyProfile brs_verdict_for_cps(const CutProjectScheme& scheme, int K, const VerdictPolicy& policy = {});
RotationSystem rotation_system_for_cps(const CutProjectScheme& scheme);

// horizon,max_abs_D,<one column per start point>
void write_profile_csv(std::ostream& os, const DiscrepancyProfile& p);

} // namespace aperiodic
