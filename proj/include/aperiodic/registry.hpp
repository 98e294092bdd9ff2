#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aperiodic/cutproject.hpp"
#include "aperiodic/substitution.hpp"

namespace aperiodic {

struct Example {
    std::string name;
    std::string description;
    std::optional<Substitution> substitution;
    std::optional<CutProjectScheme> scheme;
    // Overrides the default normalisation l_1 = 1 of the tile lengths.
    std::optional<RealValue> first_tile_length;
};

const std::vector<std::string>& example_names();
// Throws UnknownExample.
Example get_example(const std::string& name);
// classify() with the example's tile lengths applied.
PerronData example_perron(const Example& ex);

// tau = (1+sqrt(5))/2
RealValue golden_ratio();
// Fibonacci lattice <(1,-1),(tau,1/tau)> with window [-1/tau, 1).
CutProjectScheme fibonacci_scheme();

} // namespace aperiodic
