#include "aperiodic/point_set.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aperiodic {

std::size_t default_anchor(const std::vector<double>& values) {
    if (values.empty()) {
        return 0;
    }
    auto it = std::lower_bound(values.begin(), values.end(), 0.0);
    if (it == values.end()) {
        return values.size() - 1;
    }
    return static_cast<std::size_t>(it - values.begin());
}

PointSet::PointSet(std::vector<double> values, std::size_t anchor, std::optional<RealValue> density_hint,
                   std::optional<ExactCoordinates> exact)
    : values_(std::move(values)), anchor_(anchor), density_(std::move(density_hint)), exact_(std::move(exact)) {
    if (!values_.empty() && anchor_ >= values_.size()) {
        throw std::invalid_argument("anchor index out of range");
    }
    for (std::size_t i = 1; i < values_.size(); ++i) {
        if (!(values_[i - 1] < values_[i])) {
            throw std::invalid_argument("point values must be strictly increasing");
        }
    }
    if (exact_) {
        std::size_t g = exact_->generators.size();
        if (g == 0 || exact_->coefficients.size() != g * values_.size()) {
            throw std::invalid_argument("exact coordinate table does not match the point count");
        }
    }
}

PointSet PointSet::lattice(const RealValue& a, double lo, double hi) {
    double ad = a.to_double();
    if (!(ad > 0)) {
        throw std::invalid_argument("lattice spacing must be positive");
    }
    auto first = static_cast<std::int64_t>(std::ceil(lo / ad)) - 1;
    auto last = static_cast<std::int64_t>(std::floor(hi / ad)) + 1;
    std::vector<double> values;
    ExactCoordinates exact{{a}, {}};
    for (std::int64_t m = first; m <= last; ++m) {
        double v = static_cast<double>(m) * ad;
        if (v >= lo && v < hi) {
            values.push_back(v);
            exact.coefficients.push_back(m);
        }
    }
    std::size_t anchor = default_anchor(values);
    RealValue dens = RealValue(Rational(1)) / a;
    return PointSet(std::move(values), anchor, dens, std::move(exact));
}

RealValue PointSet::exact_value(std::size_t i) const {
    if (!exact_) {
        return RealValue::approx(values_.at(i), std::abs(values_[i]) * 1e-15);
    }
    const std::size_t g = exact_->generators.size();
    RealValue acc;
    for (std::size_t j = 0; j < g; ++j) {
        std::int64_t c = exact_->coefficients[i * g + j];
        if (c != 0) {
            acc += RealValue(Rational(BigInt(static_cast<long>(c)))) * exact_->generators[j];
        }
    }
    return acc;
}

PointSet PointSet::subset(const std::vector<std::size_t>& indices) const {
    std::vector<double> values;
    values.reserve(indices.size());
    std::optional<ExactCoordinates> exact;
    if (exact_) {
        exact = ExactCoordinates{exact_->generators, {}};
    }
    const std::size_t g = exact_ ? exact_->generators.size() : 0;
    for (std::size_t i : indices) {
        values.push_back(values_.at(i));
        if (exact) {
            exact->coefficients.insert(exact->coefficients.end(), exact_->coefficients.begin() + i * g,
                                       exact_->coefficients.begin() + (i + 1) * g);
        }
    }
    std::size_t anchor = default_anchor(values);
    return PointSet(std::move(values), anchor, std::nullopt, std::move(exact));
}

PointSet PointSet::slice(double lo, double hi) const {
    auto b = std::lower_bound(values_.begin(), values_.end(), lo);
    auto e = std::lower_bound(values_.begin(), values_.end(), hi);
    std::vector<std::size_t> idx;
    for (auto it = b; it < e; ++it) {
        idx.push_back(static_cast<std::size_t>(it - values_.begin()));
    }
    PointSet out = subset(idx);
    out.density_ = density_;
    return out;
}

PointSet PointSet::translated(const RealValue& t) const {
    std::vector<double> values = values_;
    double td = t.to_double();
    for (double& v : values) {
        v += td;
    }
    std::optional<ExactCoordinates> exact;
    if (exact_) {
        exact = *exact_;
        exact->generators.push_back(t);
        const std::size_t g = exact_->generators.size();
        exact->coefficients.clear();
        for (std::size_t i = 0; i < values_.size(); ++i) {
            exact->coefficients.insert(exact->coefficients.end(), exact_->coefficients.begin() + i * g,
                                       exact_->coefficients.begin() + (i + 1) * g);
            exact->coefficients.push_back(1);
        }
    }
    return PointSet(std::move(values), anchor_, density_, std::move(exact));
}

bool same_points(const PointSet& a, const PointSet& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > 1e-9 * std::max(1.0, std::abs(a[i]))) {
            return false;
        }
        if (a.has_exact() && b.has_exact()) {
            if (real_compare(a.exact_value(i), b.exact_value(i), 0.0) != Comparison::equal_within_tol) {
                return false;
            }
        }
    }
    return true;
}

} // namespace aperiodic
