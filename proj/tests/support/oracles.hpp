#pragma once

// Independent reference implementations shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "aperiodic/bde.hpp"
#include "aperiodic/cutproject.hpp"

namespace oracle {

using namespace aperiodic;

inline RealValue random_quadratic(std::mt19937_64& rng, long D, int span) {
    std::uniform_int_distribution<int> num(-span, span);
    std::uniform_int_distribution<int> den(1, 3);
    return RealValue(QuadraticElement(Rational(num(rng), den(rng)), Rational(num(rng), den(rng)), D));
}

inline bool in_half_open(const RealValue& lo, const RealValue& y, const RealValue& hi) {
    return real_compare(lo, y, 0.0) != Comparison::greater && real_compare(y, hi, 0.0) == Comparison::less;
}

// 2x2 quadratic basis with irrational slopes in both rows, and one or two
// random intervals with endpoints in the same field.
inline CutProjectScheme random_scheme(std::mt19937_64& rng) {
    static const long fields[] = {2, 3, 5, 7};
    const long D = fields[std::uniform_int_distribution<int>(0, 3)(rng)];
    for (;;) {
        RealMatrix b(2, std::vector<RealValue>(2));
        for (auto& row : b) {
            for (auto& v : row) {
                v = random_quadratic(rng, D, 3);
            }
        }
        if (b[0][0].is_zero() || b[0][1].is_zero() || b[1][0].is_zero() || b[1][1].is_zero()) {
            continue;
        }
        if ((b[0][0] / b[0][1]).is_rational() || (b[1][0] / b[1][1]).is_rational()) {
            continue;
        }
        if (std::abs((b[0][0] * b[1][1] - b[0][1] * b[1][0]).to_double()) < 0.2) {
            continue;
        }
        std::vector<RealValue> ends;
        const int parts = std::uniform_int_distribution<int>(1, 2)(rng);
        while (static_cast<int>(ends.size()) < 2 * parts) {
            RealValue e = random_quadratic(rng, D, 2) / RealValue(Rational(2));
            if (std::abs(e.to_double()) > 1.5) {
                continue;
            }
            bool dup = false;
            for (const auto& x : ends) {
                dup = dup || x == e;
            }
            if (!dup) {
                ends.push_back(e);
            }
        }
        std::sort(ends.begin(), ends.end(), [](const RealValue& x, const RealValue& y) { return x.to_double() < y.to_double(); });
        std::vector<Interval> iv;
        for (int i = 0; i < parts; ++i) {
            iv.push_back({ends[2 * i], ends[2 * i + 1]});
        }
        return CutProjectScheme(b, IntervalUnion(iv));
    }
}

// Double loop over coefficient pairs; membership decided exactly.
inline std::vector<RealValue> brute_force_points(const CutProjectScheme& s, double lo, double hi) {
    const auto& B = s.basis();
    const auto& parts = std::get<IntervalUnion>(s.window()).parts();
    double b00 = B[0][0].to_double(), b01 = B[0][1].to_double(), b10 = B[1][0].to_double(), b11 = B[1][1].to_double();
    double det = b00 * b11 - b01 * b10;
    double reach = std::max({std::abs(lo), std::abs(hi), std::abs(parts.front().lo.to_double()),
                             std::abs(parts.back().hi.to_double())});
    double norm = (std::abs(b00) + std::abs(b01) + std::abs(b10) + std::abs(b11)) / std::abs(det);
    const long R = static_cast<long>(std::ceil(2 * norm * reach)) + 3;
    const RealValue rlo{Rational(lo)}, rhi{Rational(hi)};
    std::vector<std::pair<double, RealValue>> pts;
    for (long m = -R; m <= R; ++m) {
        for (long n = -R; n <= R; ++n) {
            double x = m * b00 + n * b01;
            if (x < lo - 1e-6 || x > hi + 1e-6) {
                continue;
            }
            double y = m * b10 + n * b11;
            if (y < parts.front().lo.to_double() - 1e-6 || y > parts.back().hi.to_double() + 1e-6) {
                continue;
            }
            RealValue xe = m * B[0][0] + n * B[0][1];
            RealValue ye = m * B[1][0] + n * B[1][1];
            if (!in_half_open(rlo, xe, rhi)) {
                continue;
            }
            bool inside = false;
            for (const auto& p : parts) {
                inside = inside || in_half_open(p.lo, ye, p.hi);
            }
            if (inside) {
                pts.emplace_back(x, xe);
            }
        }
    }
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<RealValue> out;
    for (auto& p : pts) {
        out.push_back(p.second);
    }
    return out;
}

inline bool matches_exactly(const PointSet& ps, const std::vector<RealValue>& ref) {
    if (ps.size() != ref.size()) {
        return false;
    }
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (!(ps.exact_value(i) == ref[i])) {
            return false;
        }
    }
    return true;
}

// Re-checks a Hall witness by scanning the whole other side: X must be
// interior and |N(X)| < |X| in the radius graph.
inline bool is_hall_violation(const PointSet& A, const PointSet& B, double radius, const HallWitness& w,
                              double lo, double hi) {
    const PointSet& u = w.side == 'A' ? A : B;
    const PointSet& v = w.side == 'A' ? B : A;
    if (w.X.empty()) {
        return false;
    }
    std::vector<bool> hit(v.size(), false);
    for (std::size_t i : w.X) {
        if (i >= u.size() || !(u[i] - lo > radius && hi - u[i] > radius)) {
            return false;
        }
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (std::abs(u[i] - v[j]) <= radius) {
                hit[j] = true;
            }
        }
    }
    return static_cast<std::size_t>(std::count(hit.begin(), hit.end(), true)) < w.X.size();
}

// max |x_i - x_anchor - m a| by direct loop.
inline double max_deviation(const PointSet& p, double a) {
    double best = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        best = std::max(best, std::abs(p[i] - p[p.anchor_index()] - static_cast<double>(p.index_of(i)) * a));
    }
    return best;
}

} // namespace oracle
