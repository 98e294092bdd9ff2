#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "aperiodic/errors.hpp"
#include "aperiodic/numerics.hpp"
#include "aperiodic/point_set.hpp"
#include "aperiodic/verdict.hpp"

namespace aperiodic {

struct DeviationReport {
    RealValue a;
    double max_dev = 0.0;
    // dev_series[j] = max |x_m - x_0 - m a| over |m| < 2^j (running max).
    std::vector<double> dev_series;
    Verdict verdict = Verdict::inconclusive;
    double growth_ratio = 0.0;
    VerdictPolicy policy;
    std::size_t count = 0;
};

// Index-aligned deviation of the points from the lattice a*Z, measured from
// the anchor point. The verdict compares dev_series at |m| < 2^(K/2) and 2^K.
DeviationReport lattice_deviation(const PointSet& points, const RealValue& a, const VerdictPolicy& policy = {});

struct LaczkovichReport {
    double C_estimate = 0.0;
    // Same statistic with intervals drawn from the middle half of the range.
    double C_half = 0.0;
    Verdict verdict = Verdict::inconclusive;
    int trials = 0;
    std::uint64_t seed = 0;
};

// Growing when C at full range is at least twice C at half range and at least 5.
inline VerdictPolicy laczkovich_policy() { return VerdictPolicy{1.1, 2.0, 5.0, 1e-9}; }

// max over random [u,v) in the enumerated range of | #(points in [u,v)) - (v-u)/a |.
LaczkovichReport laczkovich_interval_check(const PointSet& points, const RealValue& a, int trials,
                                           std::uint64_t seed = 0x1ac2024, const VerdictPolicy& policy = laczkovich_policy());

struct MatchingCertificate {
    double radius = 0.0;
    // (index in A, index in B), sorted by the A index
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::size_t unmatched_boundary = 0;
    double range_lo = 0.0;
    double range_hi = 0.0;
};

struct HallWitness {
    // 'A' when X is a subset of A, 'B' otherwise.
    char side = 'A';
    std::vector<std::size_t> X;
    std::vector<std::size_t> neighbours;
};

class NoMatching : public Error {
public:
    NoMatching(const std::string& what, HallWitness w) : Error(what), witness_(std::move(w)) {}
    const HallWitness& witness() const { return witness_; }

private:
    HallWitness witness_;
};

// Matching on the graph joining points at distance <= radius. Every point
// farther than radius from the truncation range must be matched. The range
// defaults to the hull of both sets.
MatchingCertificate bottleneck_matching(const PointSet& A, const PointSet& B, double radius,
                                        std::optional<std::pair<double, double>> range = std::nullopt);

struct RadiusSearch {
    double radius = 0.0;
    // Largest probed radius that failed, 0 if none.
    double infeasible_below = 0.0;
    int probes = 0;
    MatchingCertificate certificate;
};

// Smallest feasible radius up to `resolution`, starting from an upper guess
// that is doubled until feasible (at most max_radius).
RadiusSearch minimal_matching_radius(const PointSet& A, const PointSet& B, double resolution = 1e-6,
                                     double max_radius = 1e6,
                                     std::optional<std::pair<double, double>> range = std::nullopt);

struct DividePart {
    std::size_t count = 0;
    // Against n * a, the spacing predicted when the parts are mutually bd-equivalent.
    DeviationReport predicted;
    // Against the part's own mean spacing, when it has a density hint.
    std::optional<DeviationReport> own;
};

struct DivideReport {
    std::size_t n = 0;
    RealValue a;
    std::vector<DividePart> parts;
};

// Checks that the parts partition A, then runs lattice_deviation per part.
DivideReport divide_experiment(const PointSet& A, const std::vector<PointSet>& parts, const RealValue& a,
                               const VerdictPolicy& policy = {});

// a_index,b_index,a,b
void write_matching_csv(std::ostream& os, const PointSet& A, const PointSet& B, const MatchingCertificate& c);
// level,max_dev
void write_deviation_csv(std::ostream& os, const DeviationReport& r);
std::string summary_json(const MatchingCertificate& c);
std::string summary_json(const DeviationReport& r);
std::string summary_json(const DivideReport& r);

} // namespace aperiodic
