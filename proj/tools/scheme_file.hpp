#pragma once

#include <string_view>

#include "aperiodic/cutproject.hpp"

namespace aperiodic {

// key = value lines; '#' starts a comment.
//   column  = <phys>, <int1>[, <int2>]     one line per lattice generator, in order
//   window  = [lo, hi) [lo, hi) ...       d = 1
//   polygon = (x, y) (x, y) ...            d = 2
//   offset  = <phys>, <int1>[, <int2>]     optional
// Values are exact expressions: rationals, decimals, sqrt(n), tau.
// Throws ParseError with the line and column of the offending text.
CutProjectScheme parse_scheme_file(std::string_view text);

} // namespace aperiodic
