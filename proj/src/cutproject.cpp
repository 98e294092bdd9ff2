#include "aperiodic/cutproject.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "aperiodic/errors.hpp"

namespace aperiodic {

namespace {

RealValue det_of(const RealMatrix& m) {
    const std::size_t n = m.size();
    if (n == 1) {
        return m[0][0];
    }
    if (n == 2) {
        return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    }
    RealValue acc;
    for (std::size_t c = 0; c < n; ++c) {
        RealMatrix minor;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<RealValue> row;
            for (std::size_t k = 0; k < n; ++k) {
                if (k != c) {
                    row.push_back(m[r][k]);
                }
            }
            minor.push_back(row);
        }
        RealValue term = m[0][c] * det_of(minor);
        acc = (c % 2 == 0) ? acc + term : acc - term;
    }
    return acc;
}

// Inverse of a 1x1 or 2x2 matrix.
RealMatrix inverse_small(const RealMatrix& m) {
    RealValue det = det_of(m);
    if (det.is_zero()) {
        throw DivisionByZero("singular matrix");
    }
    if (m.size() == 1) {
        return {{RealValue(Rational(1)) / det}};
    }
    return {{m[1][1] / det, -m[0][1] / det}, {-m[1][0] / det, m[0][0] / det}};
}

RealValue abs_value(const RealValue& v) { return exact_compare(v, RealValue()) < 0 ? -v : v; }

const RealValue& max_value(const RealValue& a, const RealValue& b) { return exact_less(a, b) ? b : a; }

std::vector<std::vector<long double>> to_ld(const RealMatrix& m) {
    std::vector<std::vector<long double>> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (const auto& v : m[i]) {
            out[i].push_back(v.to_long_double());
        }
    }
    return out;
}

std::vector<std::vector<long double>> invert_ld(std::vector<std::vector<long double>> a) {
    const std::size_t n = a.size();
    std::vector<std::vector<long double>> inv(n, std::vector<long double>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        inv[i][i] = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) {
                piv = r;
            }
        }
        std::swap(a[c], a[piv]);
        std::swap(inv[c], inv[piv]);
        long double p = a[c][c];
        for (std::size_t k = 0; k < n; ++k) {
            a[c][k] /= p;
            inv[c][k] /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r != c && a[r][c] != 0) {
                long double f = a[r][c];
                for (std::size_t k = 0; k < n; ++k) {
                    a[r][k] -= f * a[c][k];
                    inv[r][k] -= f * inv[c][k];
                }
            }
        }
    }
    return inv;
}

std::string format_vector(const IntVector& v) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << (i ? "," : "") << v[i];
    }
    os << ')';
    return os.str();
}

// Solves x . v = gcd(v) and returns (gcd, x).
std::pair<std::int64_t, IntVector> vector_gcd(const IntVector& v) {
    IntVector x(v.size(), 0);
    std::int64_t g = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        // Extended Euclid on (g, v[i]).
        std::int64_t a = g, b = v[i];
        std::int64_t s0 = 1, s1 = 0, t0 = 0, t1 = 1;
        while (b != 0) {
            std::int64_t q = a / b;
            std::tie(a, b) = std::make_pair(b, a - q * b);
            std::tie(s0, s1) = std::make_pair(s1, s0 - q * s1);
            std::tie(t0, t1) = std::make_pair(t1, t0 - q * t1);
        }
        if (a < 0) {
            a = -a;
            s0 = -s0;
            t0 = -t0;
        }
        for (std::size_t j = 0; j < i; ++j) {
            x[j] *= s0;
        }
        x[i] = t0;
        g = a;
    }
    return {g, x};
}

} // namespace

CutProjectScheme::CutProjectScheme(RealMatrix basis, Window window, std::vector<RealValue> offset)
    : basis_(std::move(basis)), window_(std::move(window)), offset_(std::move(offset)) {
    const std::size_t n = basis_.size();
    if (n != 2 && n != 3) {
        throw std::invalid_argument("lattice basis must be 2x2 or 3x3");
    }
    for (const auto& row : basis_) {
        if (row.size() != n) {
            throw std::invalid_argument("lattice basis must be square");
        }
    }
    d_ = static_cast<int>(n) - 1;
    if (!window_empty(window_) && window_dim(window_) != d_) {
        throw std::invalid_argument("window dimension does not match the internal space");
    }
    if (offset_.empty()) {
        offset_.assign(n, RealValue());
    }
    if (offset_.size() != n) {
        throw std::invalid_argument("offset has the wrong length");
    }
    if (std::abs(determinant().to_double()) <= kDefaultTol) {
        throw std::invalid_argument("lattice basis is singular");
    }
    residue_.assign(n, 0);
}

CutProjectScheme CutProjectScheme::with_window(Window w) const {
    CutProjectScheme out = *this;
    if (!window_empty(w) && window_dim(w) != d_) {
        throw std::invalid_argument("window dimension does not match the internal space");
    }
    out.window_ = std::move(w);
    return out;
}

RealValue CutProjectScheme::physical(const IntVector& c) const {
    RealValue x = offset_[0];
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (c[j] != 0) {
            x += static_cast<long>(c[j]) * basis_[0][j];
        }
    }
    return x;
}

std::vector<RealValue> CutProjectScheme::internal(const IntVector& c) const {
    std::vector<RealValue> y;
    for (std::size_t r = 1; r < basis_.size(); ++r) {
        RealValue v = offset_[r];
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (c[j] != 0) {
                v += static_cast<long>(c[j]) * basis_[r][j];
            }
        }
        y.push_back(v);
    }
    return y;
}

RealValue CutProjectScheme::determinant() const { return det_of(basis_); }

bool cps_contains(const CutProjectScheme& scheme, const IntVector& c) {
    const Window& w = scheme.window();
    if (window_empty(w)) {
        return false;
    }
    if (const auto* iu = std::get_if<IntervalUnion>(&w)) {
        return iu->contains(scheme.internal(c)[0]);
    }
    std::vector<double> y;
    for (const auto& v : scheme.internal(c)) {
        y.push_back(v.to_double());
    }
    return window_contains(w, y);
}

std::vector<IntVector> cps_lattice_points(const CutProjectScheme& scheme, double lo, double hi) {
    if (!(lo < hi)) {
        throw EmptyRange("empty range [" + format_decimal(lo) + ", " + format_decimal(hi) + ")");
    }
    const Window& w = scheme.window();
    if (window_empty(w)) {
        return {};
    }
    const std::size_t n = static_cast<std::size_t>(scheme.rank());
    const auto B = to_ld(scheme.basis());
    std::vector<long double> off;
    for (const auto& o : scheme.offset()) {
        off.push_back(o.to_long_double());
    }
    // Slab [lo, hi) x bbox(W), shifted by the offset.
    std::vector<std::pair<long double, long double>> box{{lo, hi}};
    for (const auto& b : window_bounds(w)) {
        box.emplace_back(b.first, b.second);
    }
    for (std::size_t r = 0; r < n; ++r) {
        long double pad = 1e-9L * (1 + std::abs(box[r].first) + std::abs(box[r].second));
        box[r].first -= off[r] + pad;
        box[r].second += -off[r] + pad;
    }
    const auto Binv = invert_ld(B);
    std::vector<long double> cmin(n, INFINITY), cmax(n, -INFINITY);
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        for (std::size_t j = 0; j < n; ++j) {
            long double v = 0;
            for (std::size_t r = 0; r < n; ++r) {
                v += Binv[j][r] * (((mask >> r) & 1) ? box[r].second : box[r].first);
            }
            cmin[j] = std::min(cmin[j], v);
            cmax[j] = std::max(cmax[j], v);
        }
    }
    std::size_t solve = 0;
    for (std::size_t j = 1; j < n; ++j) {
        if (cmax[j] - cmin[j] > cmax[solve] - cmin[solve]) {
            solve = j;
        }
    }
    std::vector<std::size_t> free_idx;
    for (std::size_t j = 0; j < n; ++j) {
        if (j != solve) {
            free_idx.push_back(j);
        }
    }
    std::vector<std::int64_t> lo_i(n), hi_i(n);
    for (std::size_t j = 0; j < n; ++j) {
        lo_i[j] = static_cast<std::int64_t>(std::floor(cmin[j])) - 1;
        hi_i[j] = static_cast<std::int64_t>(std::ceil(cmax[j])) + 1;
    }

    const RealValue lo_exact{Rational(lo)};
    const RealValue hi_exact{Rational(hi)};
    const auto* intervals = std::get_if<IntervalUnion>(&w);

    std::vector<std::pair<long double, IntVector>> found;
    IntVector c(n, 0);
    auto try_candidate = [&]() {
        long double x = off[0], mag = std::abs(off[0]);
        for (std::size_t j = 0; j < n; ++j) {
            x += B[0][j] * static_cast<long double>(c[j]);
            mag += std::abs(B[0][j] * static_cast<long double>(c[j]));
        }
        const long double margin = 1e-12L * (1 + mag);
        if (x < lo - margin || x >= hi + margin) {
            return;
        }
        if (std::abs(x - lo) <= margin || std::abs(x - hi) <= margin) {
            RealValue xe = scheme.physical(c);
            if (exact_compare(xe, lo_exact) < 0 || exact_compare(xe, hi_exact) >= 0) {
                return;
            }
        }
        std::vector<double> y(n - 1);
        long double ymag = 0;
        for (std::size_t r = 1; r < n; ++r) {
            long double v = off[r];
            for (std::size_t j = 0; j < n; ++j) {
                v += B[r][j] * static_cast<long double>(c[j]);
                ymag += std::abs(B[r][j] * static_cast<long double>(c[j]));
            }
            y[r - 1] = static_cast<double>(v);
        }
        bool inside;
        if (intervals && intervals->boundary_distance(y[0]) <= 1e-12 * (1 + static_cast<double>(ymag))) {
            inside = intervals->contains(scheme.internal(c)[0]);
        } else {
            inside = window_contains(w, y);
        }
        if (inside) {
            found.emplace_back(x, c);
        }
    };
    auto solve_row = [&]() {
        long double s_lo = static_cast<long double>(lo_i[solve]);
        long double s_hi = static_cast<long double>(hi_i[solve]);
        for (std::size_t r = 0; r < n; ++r) {
            long double rest = off[r];
            for (std::size_t j : free_idx) {
                rest += B[r][j] * static_cast<long double>(c[j]);
            }
            long double coef = B[r][solve];
            if (std::abs(coef) < 1e-300L) {
                if (rest < box[r].first + off[r] - 1e-9L || rest > box[r].second + off[r] + 1e-9L) {
                    return;
                }
                continue;
            }
            long double a = (box[r].first + off[r] - rest) / coef;
            long double b = (box[r].second + off[r] - rest) / coef;
            if (a > b) {
                std::swap(a, b);
            }
            s_lo = std::max(s_lo, a);
            s_hi = std::min(s_hi, b);
        }
        if (s_lo > s_hi + 2) {
            return;
        }
        for (auto k = static_cast<std::int64_t>(std::floor(s_lo)) - 1; k <= static_cast<std::int64_t>(std::ceil(s_hi)) + 1;
             ++k) {
            c[solve] = k;
            try_candidate();
        }
    };
    if (n == 2) {
        for (c[free_idx[0]] = lo_i[free_idx[0]]; c[free_idx[0]] <= hi_i[free_idx[0]]; ++c[free_idx[0]]) {
            solve_row();
        }
    } else {
        for (c[free_idx[0]] = lo_i[free_idx[0]]; c[free_idx[0]] <= hi_i[free_idx[0]]; ++c[free_idx[0]]) {
            for (c[free_idx[1]] = lo_i[free_idx[1]]; c[free_idx[1]] <= hi_i[free_idx[1]]; ++c[free_idx[1]]) {
                solve_row();
            }
        }
    }

    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<IntVector> out;
    out.reserve(found.size());
    for (std::size_t i = 0; i < found.size(); ++i) {
        if (i > 0) {
            long double gap = found[i].first - found[i - 1].first;
            if (gap <= 1e-12L * (1 + std::abs(found[i].first))) {
                if (exact_compare(scheme.physical(found[i].second), scheme.physical(found[i - 1].second)) == 0) {
                    throw ProjectionNotInjective("lattice points " + format_vector(found[i - 1].second) + " and " +
                                                 format_vector(found[i].second) + " project to the same point");
                }
                if (static_cast<double>(found[i].first) <= static_cast<double>(found[i - 1].first)) {
                    throw NumericalFailure("distinct points closer than double resolution");
                }
            }
        }
        out.push_back(found[i].second);
    }
    return out;
}

PointSet cps_points(const CutProjectScheme& scheme, double lo, double hi) {
    std::vector<IntVector> pts = cps_lattice_points(scheme, lo, hi);
    const std::size_t n = static_cast<std::size_t>(scheme.rank());
    const bool with_offset = !scheme.offset()[0].is_zero();
    ExactCoordinates ex;
    for (std::size_t j = 0; j < n; ++j) {
        ex.generators.push_back(scheme.basis()[0][j]);
    }
    if (with_offset) {
        ex.generators.push_back(scheme.offset()[0]);
    }
    const auto B = to_ld(scheme.basis());
    const long double o = scheme.offset()[0].to_long_double();
    std::vector<double> values;
    values.reserve(pts.size());
    for (const auto& c : pts) {
        long double x = o;
        for (std::size_t j = 0; j < n; ++j) {
            x += B[0][j] * static_cast<long double>(c[j]);
            ex.coefficients.push_back(c[j]);
        }
        if (with_offset) {
            ex.coefficients.push_back(1);
        }
        values.push_back(static_cast<double>(x));
    }
    std::size_t anchor = default_anchor(values);
    if (values.empty()) {
        return PointSet({}, 0, cps_density(scheme), std::nullopt);
    }
    return PointSet(std::move(values), anchor, cps_density(scheme), std::move(ex));
}

RealValue cps_density(const CutProjectScheme& scheme) {
    RealValue det = scheme.determinant();
    if (exact_compare(det, RealValue()) < 0) {
        det = -det;
    }
    if (window_empty(scheme.window())) {
        return RealValue();
    }
    return window_measure(scheme.window()) / det;
}

std::vector<CutProjectScheme> split_scheme(const CutProjectScheme& scheme, int k) {
    if (k < 2) {
        throw std::invalid_argument("split factor must be at least 2");
    }
    const std::size_t n = static_cast<std::size_t>(scheme.rank());
    RealMatrix scaled = scheme.basis();
    for (auto& row : scaled) {
        for (auto& v : row) {
            v = static_cast<long>(k) * v;
        }
    }
    std::vector<CutProjectScheme> out;
    IntVector t(n, 0);
    std::size_t total = 1;
    for (std::size_t j = 0; j < n; ++j) {
        total *= static_cast<std::size_t>(k);
    }
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rest = idx;
        for (std::size_t j = n; j-- > 0;) {
            t[j] = static_cast<std::int64_t>(rest % static_cast<std::size_t>(k));
            rest /= static_cast<std::size_t>(k);
        }
        std::vector<RealValue> off = scheme.offset();
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t j = 0; j < n; ++j) {
                if (t[j] != 0) {
                    off[r] += static_cast<long>(t[j]) * scheme.basis()[r][j];
                }
            }
        }
        CutProjectScheme sub(scaled, scheme.window(), off);
        sub.modulus_ = scheme.modulus() * k;
        sub.residue_ = scheme.residue();
        for (std::size_t j = 0; j < n; ++j) {
            sub.residue_[j] += scheme.modulus() * t[j];
        }
        out.push_back(std::move(sub));
    }
    return out;
}

bool is_canonical(const CutProjectScheme& scheme) {
    for (const auto& v : scheme.basis()[0]) {
        if (!(v == RealValue(Rational(1)))) {
            return false;
        }
    }
    if (window_empty(scheme.window())) {
        return true;
    }
    if (const auto* iu = std::get_if<IntervalUnion>(&scheme.window())) {
        return exact_compare(iu->parts().front().lo, RealValue()) >= 0 &&
               exact_compare(iu->parts().back().hi, RealValue(Rational(1))) <= 0;
    }
    for (const auto& b : window_bounds(scheme.window())) {
        if (b.first < -1e-12 || b.second > 1 + 1e-12) {
            return false;
        }
    }
    return true;
}

RealValue CanonicalForm::map_point(const CutProjectScheme& input, const IntVector& c) const {
    RealValue x = input.physical(c);
    if (identity) {
        return x;
    }
    std::vector<RealValue> y = input.internal(c);
    for (std::size_t r = 0; r < y.size(); ++r) {
        x -= shear[r] * y[r];
    }
    return x / scale;
}

namespace {

std::optional<CanonicalForm> try_sublattice(const CutProjectScheme& scheme, std::vector<IntVector> gens) {
    const std::size_t n = static_cast<std::size_t>(scheme.rank());
    const std::size_t d = n - 1;
    if (gens.size() != d) {
        return std::nullopt;
    }
    for (const auto& g : gens) {
        if (g.size() != n) {
            return std::nullopt;
        }
    }
    // h . cv = det[h, g_1, ..., g_d].
    IntVector cv(n);
    if (d == 1) {
        cv = {gens[0][1], -gens[0][0]};
    } else {
        const auto& a = gens[0];
        const auto& b = gens[1];
        cv = {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    }
    auto [g, h] = vector_gcd(cv);
    if (g != 1) {
        return std::nullopt;
    }
    const RealMatrix& B = scheme.basis();
    auto phys = [&](const IntVector& v) {
        RealValue x;
        for (std::size_t j = 0; j < n; ++j) {
            if (v[j] != 0) {
                x += static_cast<long>(v[j]) * B[0][j];
            }
        }
        return x;
    };
    auto intl = [&](const IntVector& v) {
        std::vector<RealValue> y(d);
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t j = 0; j < n; ++j) {
                if (v[j] != 0) {
                    y[r] += static_cast<long>(v[j]) * B[r + 1][j];
                }
            }
        }
        return y;
    };
    RealMatrix G(d, std::vector<RealValue>(d));
    for (std::size_t j = 0; j < d; ++j) {
        auto y = intl(gens[j]);
        for (std::size_t r = 0; r < d; ++r) {
            G[r][j] = y[r];
        }
    }
    if (std::abs(det_of(G).to_double()) < 1e-12) {
        return std::nullopt;
    }
    if (d == 1 && exact_compare(G[0][0], RealValue()) < 0) {
        for (auto& v : gens[0]) {
            v = -v;
        }
        G[0][0] = -G[0][0];
    }
    RealMatrix Ginv = inverse_small(G);
    std::vector<RealValue> l(d);
    for (std::size_t j = 0; j < d; ++j) {
        RealValue pj = phys(gens[j]);
        for (std::size_t r = 0; r < d; ++r) {
            l[r] += pj * Ginv[j][r];
        }
    }
    auto apply_l = [&](const std::vector<RealValue>& y) {
        RealValue s;
        for (std::size_t r = 0; r < d; ++r) {
            s += l[r] * y[r];
        }
        return s;
    };
    RealValue c = phys(h) - apply_l(intl(h));
    if (std::abs(c.to_double()) < 1e-12) {
        return std::nullopt;
    }
    if (exact_compare(c, RealValue()) < 0) {
        for (auto& v : h) {
            v = -v;
        }
        c = -c;
    }
    auto ginv_apply = [&](const std::vector<RealValue>& y) {
        std::vector<RealValue> out(d);
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t k = 0; k < d; ++k) {
                out[r] += Ginv[r][k] * y[k];
            }
        }
        return out;
    };
    std::vector<RealValue> alpha = ginv_apply(intl(h));

    // Window in sublattice coordinates; it must fit in a unit cube.
    Window new_window;
    std::vector<RealValue> w0(d);
    RealValue bound;
    const Window& w = scheme.window();
    if (const auto* iu = std::get_if<IntervalUnion>(&w)) {
        if (iu->empty()) {
            new_window = IntervalUnion();
        } else {
            w0[0] = Ginv[0][0] * iu->parts().front().lo;
            RealValue w1 = Ginv[0][0] * iu->parts().back().hi;
            if (exact_compare(w1 - w0[0], RealValue(Rational(1))) > 0) {
                return std::nullopt;
            }
            std::vector<Interval> parts;
            for (const auto& p : iu->parts()) {
                parts.push_back({Ginv[0][0] * p.lo - w0[0], Ginv[0][0] * p.hi - w0[0]});
                bound = max_value(bound, max_value(abs_value(l[0] * p.lo), abs_value(l[0] * p.hi)));
            }
            new_window = IntervalUnion(std::move(parts));
        }
    } else if (const auto* pg = std::get_if<Polygon>(&w)) {
        std::vector<std::vector<double>> gi(d, std::vector<double>(d));
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t k = 0; k < d; ++k) {
                gi[r][k] = Ginv[r][k].to_double();
            }
        }
        Polygon out;
        double bnd = 0;
        for (const auto& v : pg->vertices) {
            out.vertices.push_back({gi[0][0] * v[0] + gi[0][1] * v[1], gi[1][0] * v[0] + gi[1][1] * v[1]});
            bnd = std::max(bnd, std::abs(l[0].to_double() * v[0] + l[1].to_double() * v[1]));
        }
        auto [lo, hi] = out.bounds();
        if (hi[0] - lo[0] > 1 + 1e-12 || hi[1] - lo[1] > 1 + 1e-12) {
            return std::nullopt;
        }
        for (auto& v : out.vertices) {
            v[0] -= lo[0];
            v[1] -= lo[1];
        }
        w0 = {RealValue(Rational(lo[0])), RealValue(Rational(lo[1]))};
        new_window = out;
        bound = RealValue::approx(bnd, 1e-12 * (1 + bnd));
    } else {
        throw std::invalid_argument("canonical form needs an interval or polygon window");
    }

    std::vector<RealValue> o_int(scheme.offset().begin() + 1, scheme.offset().end());
    std::vector<RealValue> new_off(n);
    new_off[0] = (scheme.offset()[0] - apply_l(o_int)) / c;
    std::vector<RealValue> shifted = ginv_apply(o_int);
    for (std::size_t r = 0; r < d; ++r) {
        new_off[r + 1] = shifted[r] - w0[r];
    }
    RealMatrix nb(n, std::vector<RealValue>(n));
    for (std::size_t j = 0; j < n; ++j) {
        nb[0][j] = RealValue(Rational(1));
        for (std::size_t r = 0; r < d; ++r) {
            nb[r + 1][j] = alpha[r];
            if (j == r + 1) {
                nb[r + 1][j] -= RealValue(Rational(1));
            }
        }
    }

    CanonicalForm cf{CutProjectScheme(nb, new_window, new_off), {}, gens, h, l, c, alpha, bound, false};
    std::ostringstream os;
    os << "sublattice";
    for (const auto& gv : gens) {
        os << ' ' << format_vector(gv);
    }
    os << ", complement " << format_vector(h);
    cf.log.push_back(os.str());
    std::string shear = "shear x1 -= ";
    for (std::size_t r = 0; r < d; ++r) {
        shear += (r ? " + " : "") + format_symbolic(l[r]) + "*y" + std::to_string(r + 1);
    }
    cf.log.push_back(shear);
    cf.log.push_back("scale physical by 1/c, c = " + format_symbolic(c));
    cf.log.push_back("map internal space onto sublattice coordinates and translate the window into [0,1]^" +
                     std::to_string(d));
    std::string al = "alpha =";
    for (const auto& a : alpha) {
        al += " " + format_symbolic(a);
    }
    cf.log.push_back(al + " (first generator)");
    cf.log.push_back("displacement bound " + format_symbolic(bound));
    return cf;
}

} // namespace

CanonicalForm to_canonical(const CutProjectScheme& scheme, const std::optional<std::vector<IntVector>>& sublattice) {
    const std::size_t n = static_cast<std::size_t>(scheme.rank());
    const std::size_t d = n - 1;
    if (is_canonical(scheme)) {
        std::vector<RealValue> alpha;
        for (std::size_t r = 1; r < n; ++r) {
            alpha.push_back(scheme.basis()[r][0]);
        }
        return CanonicalForm{scheme, {}, {}, {}, std::vector<RealValue>(d), RealValue(Rational(1)), alpha, RealValue(),
                             true};
    }
    std::vector<std::vector<IntVector>> candidates;
    if (sublattice) {
        candidates.push_back(*sublattice);
    }
    std::vector<IntVector> last;
    for (std::size_t j = 1; j < n; ++j) {
        IntVector e(n, 0);
        e[j] = 1;
        last.push_back(e);
    }
    candidates.push_back(last);
    if (d == 1) {
        constexpr std::int64_t kSearch = 24;
        for (std::int64_t r = 1; r <= kSearch; ++r) {
            for (std::int64_t p = -r; p <= r; ++p) {
                for (std::int64_t q = -r; q <= r; ++q) {
                    if (std::max(std::abs(p), std::abs(q)) == r && std::gcd(p, q) == 1 &&
                        (q > 0 || (q == 0 && p > 0))) {
                        candidates.push_back({{p, q}});
                    }
                }
            }
        }
    }
    for (const auto& cand : candidates) {
        if (auto cf = try_sublattice(scheme, cand)) {
            return *cf;
        }
    }
    throw NoSuitableSublattice("no sublattice with a fundamental domain containing the window");
}

PiecewiseTranslation::PiecewiseTranslation(const CutProjectScheme& scheme, std::vector<TranslationPiece> pieces)
    : pieces_(std::move(pieces)) {
    const std::size_t n = static_cast<std::size_t>(scheme.rank());
    if (n != 2) {
        throw std::invalid_argument("piecewise translations need a one-dimensional internal space");
    }
    std::vector<Interval> src, dst;
    for (const auto& p : pieces_) {
        const auto* iu = std::get_if<IntervalUnion>(&p.part);
        if (!iu || p.vector.size() != n) {
            throw std::invalid_argument("piece must be an interval window with a lattice vector");
        }
        RealValue shift, phys;
        for (std::size_t j = 0; j < n; ++j) {
            shift += static_cast<long>(p.vector[j]) * scheme.basis()[1][j];
            phys += static_cast<long>(p.vector[j]) * scheme.basis()[0][j];
        }
        std::vector<Interval> moved;
        for (const auto& iv : iu->parts()) {
            src.push_back(iv);
            moved.push_back({iv.lo + shift, iv.hi + shift});
            dst.push_back(moved.back());
        }
        translated_.push_back(IntervalUnion(moved));
        bound_ = max_value(bound_, abs_value(phys));
    }
    try {
        IntervalUnion check_src(src);
        IntervalUnion check_dst(dst);
    } catch (const std::invalid_argument&) {
        throw NotAPartition("pieces or translated pieces overlap");
    }
}

Window PiecewiseTranslation::target_window() const {
    std::vector<Interval> all;
    for (const auto& w : translated_) {
        for (const auto& iv : std::get<IntervalUnion>(w).parts()) {
            all.push_back(iv);
        }
    }
    return IntervalUnion(all);
}

Bijection equidecomposition_bijection(const CutProjectScheme& source, const PiecewiseTranslation& pt, double lo,
                                      double hi, const std::optional<Window>& target) {
    const Window tw = target ? *target : pt.target_window();
    const CutProjectScheme target_scheme = source.with_window(tw);
    Bijection out;
    std::vector<double> images;
    for (const auto& c : cps_lattice_points(source, lo, hi)) {
        RealValue y = source.internal(c)[0];
        const TranslationPiece* piece = nullptr;
        for (const auto& p : pt.pieces()) {
            if (std::get<IntervalUnion>(p.part).contains(y)) {
                piece = &p;
                break;
            }
        }
        if (!piece) {
            throw PieceNotCovering("internal coordinate " + format_symbolic(y) + " lies in no piece");
        }
        IntVector img = c;
        for (std::size_t j = 0; j < img.size(); ++j) {
            img[j] += piece->vector[j];
        }
        if (!cps_contains(target_scheme, img)) {
            throw NotAPartition("image of " + format_vector(c) + " is not in the target window");
        }
        double x = source.physical(c).to_double();
        double fx = target_scheme.physical(img).to_double();
        out.pairs.emplace_back(x, fx);
        // fx - x is pi_1 of the piece vector; keep it exact.
        RealValue shift = source.physical(piece->vector);
        if (shift.sign() < 0) {
            shift = -shift;
        }
        if (exact_less(out.max_displacement_exact, shift)) {
            out.max_displacement_exact = shift;
            out.max_displacement = shift.to_double();
        }
        images.push_back(fx);
    }
    std::sort(images.begin(), images.end());
    if (std::adjacent_find(images.begin(), images.end()) != images.end()) {
        throw NotAPartition("two source points map to the same target point");
    }
    const double b = pt.displacement_bound().to_double();
    if (lo + b < hi - b) {
        for (double v : cps_points(target_scheme, lo + b, hi - b).values()) {
            auto it = std::lower_bound(images.begin(), images.end(), v - 1e-9 * (1 + std::abs(v)));
            if (it == images.end() || std::abs(*it - v) > 1e-9 * (1 + std::abs(v))) {
                ++out.unmatched_interior;
            }
        }
    }
    return out;
}

} // namespace aperiodic
