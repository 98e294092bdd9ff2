#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "aperiodic/numerics.hpp"

namespace aperiodic {

// Half-open [lo, hi).
struct Interval {
    RealValue lo;
    RealValue hi;
};

// Finite union of pairwise disjoint half-open intervals, kept sorted.
class IntervalUnion {
public:
    IntervalUnion() = default;
    explicit IntervalUnion(std::vector<Interval> parts);

    const std::vector<Interval>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }
    bool contains(const RealValue& y) const;
    bool contains(double y) const;
    // Distance from y to the nearest endpoint.
    double boundary_distance(double y) const;
    RealValue measure() const;
    std::pair<double, double> bounds() const;

private:
    std::vector<Interval> parts_;
};

using Point2 = std::array<double, 2>;

// Simple polygon; membership uses the crossing rule, so shared edges of a
// partition belong to exactly one piece.
struct Polygon {
    std::vector<Point2> vertices;

    bool contains(const Point2& p) const;
    double area() const;
    std::pair<Point2, Point2> bounds() const;
};

// Congruent boxes origin + h*(cell + [0,1)^dim); dim is 1 or 2 and the unused
// second index is zero when dim = 1.
class BoxCloud {
public:
    using Cell = std::array<std::int64_t, 2>;

    BoxCloud(int dim, double h, std::array<double, 2> origin, std::vector<Cell> cells);

    int dim() const { return dim_; }
    double h() const { return h_; }
    const std::array<double, 2>& origin() const { return origin_; }
    const std::vector<Cell>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    bool has_cell(const Cell& c) const;
    Cell cell_of(const std::array<double, 2>& p) const;
    bool contains(const std::array<double, 2>& p) const;
    // Boxes with at least one missing neighbour (8-neighbourhood in 2-D).
    std::vector<Cell> boundary_cells() const;
    double measure() const;
    double boundary_measure() const;
    std::pair<Point2, Point2> bounds() const;

private:
    int dim_;
    double h_;
    std::array<double, 2> origin_;
    std::vector<Cell> cells_;
};

using Window = std::variant<IntervalUnion, Polygon, BoxCloud>;

int window_dim(const Window& w);
bool window_empty(const Window& w);
// Exact for intervals, approximate (with an error bound) otherwise.
RealValue window_measure(const Window& w);
// Per-coordinate [min, max] of the closure.
std::vector<std::pair<double, double>> window_bounds(const Window& w);
bool window_contains(const Window& w, const std::vector<double>& y);

} // namespace aperiodic
