#pragma once

#include <string>

namespace aperiodic {

enum class Verdict { bounded, growing, inconclusive };

const char* to_string(Verdict v);

// Growth call on a running maximum observed at an early and a late horizon
// (2^(K/2) and 2^K). These are calibration constants; describe() is printed
// next to every verdict.
struct VerdictPolicy {
    double bounded_ratio = 1.1;
    double growing_ratio = 1.15;
    double growing_floor = 3.0;
    double zero_tol = 1e-9;

    Verdict decide(double early, double late) const;
    std::string describe() const;
};

} // namespace aperiodic
