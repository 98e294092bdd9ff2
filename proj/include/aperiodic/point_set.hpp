#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "aperiodic/numerics.hpp"

namespace aperiodic {

// Each point is an integer combination of a few exact generators; the
// coefficient rows are stored flat, generators.size() entries per point.
struct ExactCoordinates {
    std::vector<RealValue> generators;
    std::vector<std::int64_t> coefficients;
};

// Sorted anchored point sequence {..., x_-1, x_0, x_1, ...}.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::vector<double> values, std::size_t anchor, std::optional<RealValue> density_hint = std::nullopt,
             std::optional<ExactCoordinates> exact = std::nullopt);

    // Truncation of the lattice a*Z to [lo, hi), anchored at 0.
    static PointSet lattice(const RealValue& a, double lo, double hi);

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    std::size_t anchor_index() const { return anchor_; }
    // Signed position relative to the anchor.
    std::int64_t index_of(std::size_t i) const { return static_cast<std::int64_t>(i) - static_cast<std::int64_t>(anchor_); }
    const std::optional<RealValue>& density_hint() const { return density_; }

    bool has_exact() const { return exact_.has_value(); }
    const std::optional<ExactCoordinates>& exact() const { return exact_; }
    // Exact value when coordinates are known, otherwise an approx value.
    RealValue exact_value(std::size_t i) const;

    // Points with values in [lo, hi); the anchor moves to the first point >= 0.
    PointSet slice(double lo, double hi) const;
    // Subset by index list (sorted ascending); anchor as in slice.
    PointSet subset(const std::vector<std::size_t>& indices) const;
    // Every point shifted by t.
    PointSet translated(const RealValue& t) const;

    double front() const { return values_.front(); }
    double back() const { return values_.back(); }

private:
    std::vector<double> values_;
    std::size_t anchor_ = 0;
    std::optional<RealValue> density_;
    std::optional<ExactCoordinates> exact_;
};

// Index of the first value >= 0, or size()-1 when every value is negative.
std::size_t default_anchor(const std::vector<double>& values);

// Exact equality of two point sets (same size, pointwise exact equality).
bool same_points(const PointSet& a, const PointSet& b);

} // namespace aperiodic
