#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aperiodic/numerics.hpp"
#include "aperiodic/substitution.hpp"
#include "aperiodic/window.hpp"

namespace aperiodic {

// x -> ratio * x + translation, reading from set `source`.
struct IfsMap {
    std::size_t source = 0;
    RealValue ratio;
    std::vector<RealValue> translation;
};

struct CoupledIFS {
    int dim = 1;
    std::vector<std::string> set_names;
    // maps[target]
    std::vector<std::vector<IfsMap>> maps;

    // Throws invalid_argument on malformed input, NotContractive if some |r| >= 1.
    void validate() const;
    double max_ratio() const;
};

struct IfsOptions {
    // d = 1: gaps narrower than this are closed when merging.
    double merge_resolution = 1e-9;
    std::size_t max_intervals = std::size_t{1} << 22;
    // d = 2: box size of the cloud representation.
    double box_h = 1e-3;
    // Slack on the gap ratio before NotContractive.
    double ratio_tol = 0.02;
};

struct AttractorApprox {
    // IntervalUnion per set for d = 1, BoxCloud for d = 2.
    std::vector<Window> sets;
    int iteration_count = 0;
    // Hausdorff distance between the last two iterates (max over sets).
    double hausdorff_gap = 0.0;
    // gap_history[k - 1] compares iterate k with iterate k - 1.
    std::vector<double> gap_history;
    // Measure of the union of all sets; entry 0 is the seed.
    std::vector<double> measure_history;
    // d = 1 endpoints are exact when every ratio, translation and seed
    // endpoint lies in one quadratic field and the integers fit.
    bool exact_endpoints = false;

    double total_measure() const { return measure_history.empty() ? 0.0 : measure_history.back(); }
};

AttractorApprox ifs_attractor(const CoupledIFS& ifs, int iterations, const std::vector<Window>& seed,
                              const IfsOptions& opts = {});

// One interval (d = 1) or square (d = 2) per set containing its attractor,
// with dyadic rational endpoints.
std::vector<Window> ifs_hull_seed(const CoupledIFS& ifs);

// Two-letter Pisot substitution: X_i is the union over occurrences of i in
// sigma(j), after the prefix p, of lambda' X_j + phi(p), with phi the Galois
// conjugate of the tile lengths.
CoupledIFS substitution_ifs(const Substitution& s, const PerronData& pd);

// a -> aab, b -> ba with ratio tau^-2 and translations 0, 1, 2.
CoupledIFS fibonacci_square_ifs_integer();

// Projections of the abelianised prefixes of the fixed point onto the
// contracting eigenspace, as boxes of size h on a grid anchored at 0.
// Default h = max(1e-3, spread / 2^10).
BoxCloud rauzy_window_cloud(const Substitution& s, std::size_t prefix_count, std::optional<double> h = std::nullopt);

// Projected prefix points, one row per prefix.
std::vector<std::vector<double>> rauzy_points(const Substitution& s, std::size_t prefix_count);

// Boxes of size h covering the window.
BoxCloud rasterize(const Window& w, double h);

struct DimensionEstimate {
    double estimate = 0.0;
    double r2 = 0.0;
    std::vector<double> scales;
    std::vector<std::size_t> counts;
};

// Least-squares slope of log N(h) against log(1/h). Throws DegenerateFit if r^2 < 0.9.
DimensionEstimate box_dimension(const BoxCloud& cloud, bool boundary_only, const std::vector<double>& scales);
// spread / 2^j for `count` consecutive j, all at least twice the cloud's box size.
std::vector<double> default_box_scales(const BoxCloud& cloud, int count = 5);

enum class ImageFormat { svg, pgm };

// "svg" or "pgm"; throws UnsupportedFormat.
ImageFormat parse_image_format(std::string_view name);
// pixels x pixels image; pixels in [64, 4096].
std::string render(const Window& w, ImageFormat format, int pixels);

} // namespace aperiodic
