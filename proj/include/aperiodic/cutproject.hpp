#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aperiodic/numerics.hpp"
#include "aperiodic/point_set.hpp"
#include "aperiodic/window.hpp"

namespace aperiodic {

using RealMatrix = std::vector<std::vector<RealValue>>;
using IntVector = std::vector<std::int64_t>;

// Lattice Gamma in R x R^d (d = 1 or 2), given by the columns of `basis`,
// optionally translated by `offset`. The first coordinate is physical space,
// the remaining d are internal space.
class CutProjectScheme {
public:
    CutProjectScheme(RealMatrix basis, Window window, std::vector<RealValue> offset = {});

    int dim_internal() const { return d_; }
    int rank() const { return d_ + 1; }
    const RealMatrix& basis() const { return basis_; }
    const Window& window() const { return window_; }
    const std::vector<RealValue>& offset() const { return offset_; }
    // Set by split_scheme: the lattice is modulus * Gamma0 + (Gamma0 point with
    // coefficients `residue`) for the unsplit lattice Gamma0.
    std::int64_t modulus() const { return modulus_; }
    const IntVector& residue() const { return residue_; }
    // pi_2(Gamma) dense in W is assumed, never checked.
    bool density_assumed() const { return true; }

    CutProjectScheme with_window(Window w) const;

    // Physical and internal coordinates of offset + basis * c.
    RealValue physical(const IntVector& c) const;
    std::vector<RealValue> internal(const IntVector& c) const;
    RealValue determinant() const;

private:
    friend std::vector<CutProjectScheme> split_scheme(const CutProjectScheme&, int);

    int d_ = 1;
    RealMatrix basis_;
    Window window_;
    std::vector<RealValue> offset_;
    std::int64_t modulus_ = 1;
    IntVector residue_;
};

// Points pi_1(x) for lattice points x with pi_1(x) in [lo, hi) and pi_2(x) in W.
// Exact coordinates of the result are the lattice coefficients.
PointSet cps_points(const CutProjectScheme& scheme, double lo, double hi);
// Same enumeration, also returning the coefficient vector of each point.
std::vector<IntVector> cps_lattice_points(const CutProjectScheme& scheme, double lo, double hi);
bool cps_contains(const CutProjectScheme& scheme, const IntVector& c);

RealValue cps_density(const CutProjectScheme& scheme);

// The k^(1+d) schemes on k*Gamma + t, t over Gamma / k*Gamma. Requires k >= 2.
std::vector<CutProjectScheme> split_scheme(const CutProjectScheme& scheme, int k);

struct CanonicalForm {
    CutProjectScheme scheme;
    std::vector<std::string> log;
    // Sublattice generators (coefficients in the input basis) and the completing vector.
    std::vector<IntVector> sublattice;
    IntVector complement;
    // Shear functional on internal space and the physical rescaling.
    std::vector<RealValue> shear;
    RealValue scale = RealValue(Rational(1));
    // alpha: internal coordinates of the first canonical generator.
    std::vector<RealValue> alpha;
    // sup over W of |shear(y)|; input points sit within this of scale * output points.
    RealValue displacement_bound;
    bool identity = false;

    // Physical coordinate in the canonical scheme of the input lattice point c.
    RealValue map_point(const CutProjectScheme& input, const IntVector& c) const;
};

bool is_canonical(const CutProjectScheme& scheme);
// Sublattice choice: d coefficient vectors in the input basis. Tried first, then
// the span of the last d basis columns, then (d = 1) a search over short
// primitive vectors.
CanonicalForm to_canonical(const CutProjectScheme& scheme,
                           const std::optional<std::vector<IntVector>>& sublattice = std::nullopt);

struct TranslationPiece {
    Window part;
    IntVector vector;
};

class PiecewiseTranslation {
public:
    // Checks that the parts are disjoint and that the translated parts are disjoint.
    PiecewiseTranslation(const CutProjectScheme& scheme, std::vector<TranslationPiece> pieces);

    const std::vector<TranslationPiece>& pieces() const { return pieces_; }
    const RealValue& displacement_bound() const { return bound_; }
    // Union of the translated parts (interval windows only).
    Window target_window() const;

private:
    std::vector<TranslationPiece> pieces_;
    std::vector<Window> translated_;
    RealValue bound_;
};

struct Bijection {
    std::vector<std::pair<double, double>> pairs;
    double max_displacement = 0.0;
    RealValue max_displacement_exact;
    // Target points in [lo + bound, hi - bound) that no source point reached.
    std::size_t unmatched_interior = 0;
};

// f(x) = x + pi_1(x_i) on the points whose internal coordinate lies in piece i.
Bijection equidecomposition_bijection(const CutProjectScheme& source, const PiecewiseTranslation& pt, double lo,
                                      double hi, const std::optional<Window>& target = std::nullopt);

} // namespace aperiodic
