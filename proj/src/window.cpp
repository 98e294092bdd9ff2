#include "aperiodic/window.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aperiodic {

IntervalUnion::IntervalUnion(std::vector<Interval> parts) : parts_(std::move(parts)) {
    // Float images are computed once; exact comparison only when they are close.
    struct Key {
        double lo, hi;
        std::size_t i;
    };
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * (std::abs(a) + std::abs(b)) + 1e-300; };
    auto cmp = [&](const RealValue& x, double dx, const RealValue& y, double dy) {
        if (!close(dx, dy)) {
            return dx < dy ? -1 : 1;
        }
        return exact_compare(x, y);
    };
    std::vector<Key> keys;
    keys.reserve(parts_.size());
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        const auto& p = parts_[i];
        Key k{p.lo.to_double(), p.hi.to_double(), i};
        if (cmp(p.lo, k.lo, p.hi, k.hi) >= 0) {
            throw std::invalid_argument("interval [" + p.lo.to_string() + ", " + p.hi.to_string() + ") is empty");
        }
        keys.push_back(k);
    }
    auto less = [&](const Key& a, const Key& b) { return cmp(parts_[a.i].lo, a.lo, parts_[b.i].lo, b.lo) < 0; };
    if (!std::is_sorted(keys.begin(), keys.end(), less)) {
        std::sort(keys.begin(), keys.end(), less);
        std::vector<Interval> sorted;
        sorted.reserve(parts_.size());
        for (auto& k : keys) {
            sorted.push_back(std::move(parts_[k.i]));
            k.i = sorted.size() - 1;
        }
        parts_ = std::move(sorted);
    }
    for (std::size_t i = 1; i < keys.size(); ++i) {
        if (cmp(parts_[keys[i - 1].i].hi, keys[i - 1].hi, parts_[keys[i].i].lo, keys[i].lo) > 0) {
            throw std::invalid_argument("window intervals overlap");
        }
    }
}

bool IntervalUnion::contains(const RealValue& y) const {
    for (const auto& p : parts_) {
        if (exact_compare(p.lo, y) <= 0 && exact_compare(y, p.hi) < 0) {
            return true;
        }
    }
    return false;
}

bool IntervalUnion::contains(double y) const {
    for (const auto& p : parts_) {
        if (p.lo.to_double() <= y && y < p.hi.to_double()) {
            return true;
        }
    }
    return false;
}

double IntervalUnion::boundary_distance(double y) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : parts_) {
        best = std::min({best, std::abs(y - p.lo.to_double()), std::abs(y - p.hi.to_double())});
    }
    return best;
}

RealValue IntervalUnion::measure() const {
    RealValue total;
    for (const auto& p : parts_) {
        total += p.hi - p.lo;
    }
    return total;
}

std::pair<double, double> IntervalUnion::bounds() const {
    if (parts_.empty()) {
        return {0.0, 0.0};
    }
    return {parts_.front().lo.to_double(), parts_.back().hi.to_double()};
}

bool Polygon::contains(const Point2& p) const {
    bool inside = false;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = vertices[i];
        const Point2& b = vertices[j];
        if ((a[1] > p[1]) != (b[1] > p[1])) {
            double x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if (p[0] < x) {
                inside = !inside;
            }
        }
    }
    return inside;
}

double Polygon::area() const {
    double s = 0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = vertices[i];
        const Point2& b = vertices[(i + 1) % n];
        s += a[0] * b[1] - b[0] * a[1];
    }
    return std::abs(s) / 2;
}

std::pair<Point2, Point2> Polygon::bounds() const {
    Point2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Point2 hi{-lo[0], -lo[1]};
    for (const auto& v : vertices) {
        for (int k = 0; k < 2; ++k) {
            lo[k] = std::min(lo[k], v[k]);
            hi[k] = std::max(hi[k], v[k]);
        }
    }
    return {lo, hi};
}

BoxCloud::BoxCloud(int dim, double h, std::array<double, 2> origin, std::vector<Cell> cells)
    : dim_(dim), h_(h), origin_(origin), cells_(std::move(cells)) {
    if (dim_ != 1 && dim_ != 2) {
        throw std::invalid_argument("box cloud dimension must be 1 or 2");
    }
    if (!(h_ > 0)) {
        throw std::invalid_argument("box size must be positive");
    }
    if (dim_ == 1) {
        for (auto& c : cells_) {
            c[1] = 0;
        }
    }
    std::sort(cells_.begin(), cells_.end());
    cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
}

bool BoxCloud::has_cell(const Cell& c) const { return std::binary_search(cells_.begin(), cells_.end(), c); }

BoxCloud::Cell BoxCloud::cell_of(const std::array<double, 2>& p) const {
    Cell c{static_cast<std::int64_t>(std::floor((p[0] - origin_[0]) / h_)), 0};
    if (dim_ == 2) {
        c[1] = static_cast<std::int64_t>(std::floor((p[1] - origin_[1]) / h_));
    }
    return c;
}

bool BoxCloud::contains(const std::array<double, 2>& p) const { return has_cell(cell_of(p)); }

std::vector<BoxCloud::Cell> BoxCloud::boundary_cells() const {
    std::vector<Cell> out;
    for (const auto& c : cells_) {
        bool edge = false;
        if (dim_ == 1) {
            edge = !has_cell({c[0] - 1, 0}) || !has_cell({c[0] + 1, 0});
        } else {
            for (int dx = -1; dx <= 1 && !edge; ++dx) {
                for (int dy = -1; dy <= 1 && !edge; ++dy) {
                    if ((dx != 0 || dy != 0) && !has_cell({c[0] + dx, c[1] + dy})) {
                        edge = true;
                    }
                }
            }
        }
        if (edge) {
            out.push_back(c);
        }
    }
    return out;
}

double BoxCloud::measure() const { return static_cast<double>(cells_.size()) * std::pow(h_, dim_); }

double BoxCloud::boundary_measure() const {
    return static_cast<double>(boundary_cells().size()) * std::pow(h_, dim_);
}

std::pair<Point2, Point2> BoxCloud::bounds() const {
    if (cells_.empty()) {
        return {origin_, origin_};
    }
    Point2 lo{std::numeric_limits<double>::infinity(), dim_ == 2 ? std::numeric_limits<double>::infinity() : 0.0};
    Point2 hi{-std::numeric_limits<double>::infinity(), dim_ == 2 ? -std::numeric_limits<double>::infinity() : 0.0};
    for (const auto& c : cells_) {
        for (int k = 0; k < dim_; ++k) {
            double v = origin_[static_cast<std::size_t>(k)] + h_ * static_cast<double>(c[static_cast<std::size_t>(k)]);
            lo[static_cast<std::size_t>(k)] = std::min(lo[static_cast<std::size_t>(k)], v);
            hi[static_cast<std::size_t>(k)] = std::max(hi[static_cast<std::size_t>(k)], v + h_);
        }
    }
    return {lo, hi};
}

int window_dim(const Window& w) {
    if (std::holds_alternative<IntervalUnion>(w)) {
        return 1;
    }
    if (std::holds_alternative<Polygon>(w)) {
        return 2;
    }
    return std::get<BoxCloud>(w).dim();
}

bool window_empty(const Window& w) {
    if (const auto* iu = std::get_if<IntervalUnion>(&w)) {
        return iu->empty();
    }
    if (const auto* pg = std::get_if<Polygon>(&w)) {
        return pg->vertices.size() < 3;
    }
    return std::get<BoxCloud>(w).size() == 0;
}

RealValue window_measure(const Window& w) {
    if (const auto* iu = std::get_if<IntervalUnion>(&w)) {
        return iu->measure();
    }
    if (const auto* pg = std::get_if<Polygon>(&w)) {
        double a = pg->area();
        return RealValue::approx(a, 1e-12 * std::max(1.0, a));
    }
    const auto& bc = std::get<BoxCloud>(w);
    return RealValue::approx(bc.measure(), bc.boundary_measure());
}

std::vector<std::pair<double, double>> window_bounds(const Window& w) {
    if (const auto* iu = std::get_if<IntervalUnion>(&w)) {
        return {iu->bounds()};
    }
    std::pair<Point2, Point2> b;
    if (const auto* pg = std::get_if<Polygon>(&w)) {
        b = pg->bounds();
    } else {
        const auto& bc = std::get<BoxCloud>(w);
        b = bc.bounds();
        if (bc.dim() == 1) {
            return {{b.first[0], b.second[0]}};
        }
    }
    return {{b.first[0], b.second[0]}, {b.first[1], b.second[1]}};
}

bool window_contains(const Window& w, const std::vector<double>& y) {
    if (const auto* iu = std::get_if<IntervalUnion>(&w)) {
        return iu->contains(y.at(0));
    }
    if (const auto* pg = std::get_if<Polygon>(&w)) {
        return pg->contains({y.at(0), y.at(1)});
    }
    const auto& bc = std::get<BoxCloud>(w);
    return bc.contains({y.at(0), bc.dim() == 2 ? y.at(1) : 0.0});
}

} // namespace aperiodic
