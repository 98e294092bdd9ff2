#include "aperiodic/verdict.hpp"

#include <cmath>

#include "aperiodic/numerics.hpp"

namespace aperiodic {

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::bounded:
        return "bounded";
    case Verdict::growing:
        return "growing";
    case Verdict::inconclusive:
        break;
    }
    return "inconclusive";
}

Verdict VerdictPolicy::decide(double early, double late) const {
    if (late <= zero_tol) {
        return Verdict::bounded;
    }
    double ratio = early > zero_tol ? late / early : INFINITY;
    if (ratio < bounded_ratio) {
        return Verdict::bounded;
    }
    if (ratio >= growing_ratio && late >= growing_floor) {
        return Verdict::growing;
    }
    return Verdict::inconclusive;
}

std::string VerdictPolicy::describe() const {
    return "policy: r = max at 2^K / max at 2^(K/2); bounded if r < " + format_decimal(bounded_ratio) +
           " or max = 0; growing if r >= " + format_decimal(growing_ratio) + " and max >= " +
           format_decimal(growing_floor) + "; else inconclusive";
}

} // namespace aperiodic
