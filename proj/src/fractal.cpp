#include "aperiodic/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "aperiodic/errors.hpp"

namespace aperiodic {

namespace {

using i128 = __int128;
using Cell = BoxCloud::Cell;

struct Overflow {};

i128 mulc(i128 x, i128 y) {
    i128 r;
    if (__builtin_mul_overflow(x, y, &r)) {
        throw Overflow{};
    }
    return r;
}

i128 addc(i128 x, i128 y) {
    i128 r;
    if (__builtin_add_overflow(x, y, &r)) {
        throw Overflow{};
    }
    return r;
}

BigInt to_mpz(i128 v) {
    const bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
    BigInt hi(static_cast<unsigned long>(static_cast<std::uint64_t>(u >> 64)));
    BigInt lo(static_cast<unsigned long>(static_cast<std::uint64_t>(u)));
    BigInt r = (hi << 64) + lo;
    return neg ? BigInt(-r) : r;
}

i128 to_i128(const BigInt& z) {
    if (mpz_sizeinbase(z.get_mpz_t(), 2) > 120) {
        throw Overflow{};
    }
    BigInt a = abs(z);
    BigInt hi = a >> 64;
    BigInt lo = a - (hi << 64);
    i128 r = (static_cast<i128>(hi.get_ui()) << 64) | static_cast<i128>(lo.get_ui());
    return sgn(z) < 0 ? -r : r;
}

// Z[omega] with omega = (1 + sqrt D)/2 when D = 1 mod 4, sqrt D otherwise.
// D = 1 means every value is rational and b stays 0.
struct Field {
    long D = 1;
    bool half = false;
    long n = 0;

    explicit Field(long d = 1) : D(d), half(d != 1 && d % 4 == 1), n(half ? (d - 1) / 4 : 0) {}

    std::pair<Rational, Rational> coords(const RealValue& v) const {
        if (v.is_rational()) {
            return {v.rational(), Rational(0)};
        }
        const auto& q = v.quadratic();
        if (half) {
            return {q.a() - q.b(), Rational(2 * q.b())};
        }
        return {q.a(), q.b()};
    }

    RealValue value(i128 a, i128 b, i128 L) const {
        Rational A(to_mpz(a), to_mpz(L)), B(to_mpz(b), to_mpz(L));
        A.canonicalize();
        B.canonicalize();
        if (D == 1 || sgn(B) == 0) {
            return RealValue(A);
        }
        if (half) {
            Rational hb = B / 2;
            return RealValue(QuadraticElement(A + hb, hb, D));
        }
        return RealValue(QuadraticElement(A, B, D));
    }
};

struct Elem {
    i128 a = 0;
    i128 b = 0;
};

Elem mul(const Elem& x, const Elem& y, const Field& f) {
    if (f.D == 1) {
        return {mulc(x.a, y.a), 0};
    }
    const i128 bd = mulc(x.b, y.b);
    const i128 cross = addc(mulc(x.a, y.b), mulc(x.b, y.a));
    if (f.half) {
        return {addc(mulc(x.a, y.a), mulc(f.n, bd)), addc(cross, bd)};
    }
    return {addc(mulc(x.a, y.a), mulc(f.D, bd)), cross};
}

Elem add(const Elem& x, const Elem& y) { return {addc(x.a, y.a), addc(x.b, y.b)}; }

int exact_sign(const Elem& e, const Field& f) {
    if (e.b == 0 || f.D == 1) {
        return (e.a > 0) - (e.a < 0);
    }
    const i128 lim = static_cast<i128>(1) << 58;
    if (e.a > -lim && e.a < lim && e.b > -lim && e.b < lim) {
        const i128 s = f.half ? 2 * e.a + e.b : e.a, t = e.b;
        const int ss = (s > 0) - (s < 0), st = (t > 0) - (t < 0);
        if (ss == 0 || ss == st) {
            return ss == 0 ? st : ss;
        }
        const i128 lhs = s * s, rhs = t * t * f.D;
        const int c = (lhs > rhs) - (lhs < rhs);
        return ss > 0 ? c : -c;
    }
    BigInt s = to_mpz(e.a), t = to_mpz(e.b);
    if (f.half) {
        s = 2 * s + t;
    }
    const int ss = sgn(s), st = sgn(t);
    if (st == 0 || f.D == 1) {
        return ss;
    }
    if (ss == 0 || ss == st) {
        return ss == 0 ? st : ss;
    }
    BigInt lhs = s * s, rhs = t * t * f.D;
    int c = cmp(lhs, rhs);
    return ss > 0 ? c : -c;
}

// Closed interval with exact numerators over the shared denominator and a
// float copy that is propagated through the maps directly.
struct Iv {
    Elem lo, hi;
    long double dlo = 0, dhi = 0;
};

struct PreparedMap {
    std::size_t source;
    Elem r, t;
    long double rd, td;
};

class IntervalEngine {
public:
    IntervalEngine(const CoupledIFS& ifs, const std::vector<Window>& seed, const IfsOptions& opts) : opts_(opts) {
        std::vector<RealValue> vals;
        for (const auto& target : ifs.maps) {
            for (const auto& m : target) {
                vals.push_back(m.ratio);
                vals.push_back(m.translation[0]);
            }
        }
        std::vector<std::vector<std::pair<RealValue, RealValue>>> seeds;
        for (const auto& w : seed) {
            const auto* iu = std::get_if<IntervalUnion>(&w);
            if (!iu) {
                throw std::invalid_argument("one-dimensional IFS needs interval seeds");
            }
            if (iu->empty()) {
                throw std::invalid_argument("seed sets must be nonempty");
            }
            seeds.emplace_back();
            for (const auto& p : iu->parts()) {
                seeds.back().emplace_back(p.lo, p.hi);
                vals.push_back(p.lo);
                vals.push_back(p.hi);
            }
        }
        long D = 1;
        exact_ = true;
        for (const auto& v : vals) {
            if (!v.is_exact() || (v.field() != 1 && D != 1 && v.field() != D)) {
                exact_ = false;
                break;
            }
            if (v.field() != 1) {
                D = v.field();
            }
        }
        field_ = Field(D);
        BigInt Q(1), L(1);
        if (exact_) {
            for (const auto& target : ifs.maps) {
                for (const auto& m : target) {
                    for (const RealValue* v : {&m.ratio, &m.translation[0]}) {
                        auto [a, b] = field_.coords(*v);
                        mpz_lcm(Q.get_mpz_t(), Q.get_mpz_t(), a.get_den_mpz_t());
                        mpz_lcm(Q.get_mpz_t(), Q.get_mpz_t(), b.get_den_mpz_t());
                    }
                }
            }
            for (const auto& s : seeds) {
                for (const auto& [lo, hi] : s) {
                    for (const RealValue* v : {&lo, &hi}) {
                        auto [a, b] = field_.coords(*v);
                        mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), a.get_den_mpz_t());
                        mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), b.get_den_mpz_t());
                    }
                }
            }
        }
        auto scaled = [&](const RealValue& v, const BigInt& den) {
            auto [a, b] = field_.coords(v);
            return Elem{to_i128(BigInt(a.get_num() * (den / a.get_den()))), to_i128(BigInt(b.get_num() * (den / b.get_den())))};
        };
        try {
            if (exact_) {
                Q_ = to_i128(Q);
                L_ = to_i128(L);
            }
            for (const auto& target : ifs.maps) {
                maps_.emplace_back();
                for (const auto& m : target) {
                    PreparedMap pm{m.source, {}, {}, m.ratio.to_long_double(), m.translation[0].to_long_double()};
                    if (exact_) {
                        pm.r = scaled(m.ratio, Q);
                        pm.t = scaled(m.translation[0], Q);
                    }
                    maps_.back().push_back(pm);
                }
            }
            for (const auto& s : seeds) {
                sets_.emplace_back();
                for (const auto& [lo, hi] : s) {
                    Iv iv;
                    iv.dlo = lo.to_long_double();
                    iv.dhi = hi.to_long_double();
                    if (exact_) {
                        iv.lo = scaled(lo, L);
                        iv.hi = scaled(hi, L);
                    }
                    sets_.back().push_back(iv);
                }
            }
        } catch (const Overflow&) {
            exact_ = false;
        }
        for (auto& s : sets_) {
            s = merge(std::move(s));
        }
    }

    bool exact() const { return exact_; }

    void step() {
        std::vector<std::vector<Iv>> next(sets_.size());
        bool ok = exact_;
        i128 newL = 0;
        if (ok) {
            try {
                newL = mulc(Q_, L_);
            } catch (const Overflow&) {
                ok = false;
            }
        }
        for (std::size_t target = 0; target < sets_.size(); ++target) {
            auto& dst = next[target];
            for (const auto& m : maps_[target]) {
                Elem lt;
                if (ok) {
                    try {
                        lt = {mulc(L_, m.t.a), mulc(L_, m.t.b)};
                    } catch (const Overflow&) {
                        ok = false;
                    }
                }
                const std::size_t start = dst.size();
                for (const auto& iv : sets_[m.source]) {
                    Iv out;
                    out.dlo = m.rd * iv.dlo + m.td;
                    out.dhi = m.rd * iv.dhi + m.td;
                    if (ok) {
                        try {
                            out.lo = add(mul(m.r, iv.lo, field_), lt);
                            out.hi = add(mul(m.r, iv.hi, field_), lt);
                        } catch (const Overflow&) {
                            ok = false;
                        }
                    }
                    if (m.rd < 0) {
                        std::swap(out.lo, out.hi);
                        std::swap(out.dlo, out.dhi);
                    }
                    dst.push_back(out);
                }
                // Each image of a sorted list is sorted (reversed for r < 0).
                if (m.rd < 0) {
                    std::reverse(dst.begin() + static_cast<std::ptrdiff_t>(start), dst.end());
                }
                std::inplace_merge(dst.begin(), dst.begin() + static_cast<std::ptrdiff_t>(start), dst.end(),
                                   [&](const Iv& x, const Iv& y) { return compare(x.lo, x.dlo, y.lo, y.dlo) < 0; });
            }
        }
        exact_ = ok;
        if (exact_) {
            L_ = newL;
        }
        for (auto& s : next) {
            s = merge(std::move(s), true);
            if (s.size() > opts_.max_intervals) {
                throw CapacityExceeded("attractor iterate has more than " + std::to_string(opts_.max_intervals) +
                                       " intervals; raise merge_resolution");
            }
        }
        sets_ = std::move(next);
    }

    const std::vector<std::vector<Iv>>& sets() const { return sets_; }

    std::vector<Window> windows() const {
        std::vector<Window> out;
        for (const auto& s : sets_) {
            std::vector<Interval> parts;
            for (const auto& iv : s) {
                if (!(iv.dhi > iv.dlo)) {
                    continue;
                }
                if (exact_) {
                    parts.push_back({field_.value(iv.lo.a, iv.lo.b, L_), field_.value(iv.hi.a, iv.hi.b, L_)});
                } else {
                    const double err = 1e-12 * (1 + std::abs(static_cast<double>(iv.dhi)));
                    parts.push_back({RealValue::approx(static_cast<double>(iv.dlo), err),
                                     RealValue::approx(static_cast<double>(iv.dhi), err)});
                }
            }
            out.emplace_back(IntervalUnion(std::move(parts)));
        }
        return out;
    }

private:
    // -1, 0, 1 for x vs y, exact when the floats are too close to call.
    int compare(const Elem& x, long double dx, const Elem& y, long double dy) const {
        const long double scale = 1 + std::abs(dx) + std::abs(dy);
        if (std::abs(dx - dy) > 1e-15L * scale || !exact_) {
            return dx < dy ? -1 : (dx > dy ? 1 : 0);
        }
        if (x.a == y.a && x.b == y.b) {
            return 0;
        }
        return exact_sign(Elem{x.a - y.a, x.b - y.b}, field_);
    }

    std::vector<Iv> merge(std::vector<Iv> v, bool sorted = false) const {
        if (!sorted) {
            std::sort(v.begin(), v.end(), [&](const Iv& x, const Iv& y) { return compare(x.lo, x.dlo, y.lo, y.dlo) < 0; });
        }
        std::vector<Iv> out;
        for (auto& iv : v) {
            if (!out.empty()) {
                Iv& cur = out.back();
                if (compare(iv.lo, iv.dlo, cur.hi, cur.dhi) <= 0 || iv.dlo - cur.dhi <= opts_.merge_resolution) {
                    if (compare(cur.hi, cur.dhi, iv.hi, iv.dhi) < 0) {
                        cur.hi = iv.hi;
                        cur.dhi = iv.dhi;
                    }
                    continue;
                }
            }
            out.push_back(iv);
        }
        return out;
    }

    IfsOptions opts_;
    Field field_;
    bool exact_ = false;
    i128 Q_ = 1, L_ = 1;
    std::vector<std::vector<PreparedMap>> maps_;
    std::vector<std::vector<Iv>> sets_;
};

using Span = std::pair<long double, long double>;

std::vector<Span> spans(const std::vector<Iv>& s) {
    std::vector<Span> out;
    for (const auto& iv : s) {
        out.emplace_back(iv.dlo, iv.dhi);
    }
    return out;
}

// sup over x in X of dist(x, Y), both sorted disjoint closed intervals.
long double directed_distance(const std::vector<Span>& X, const std::vector<Span>& Y) {
    if (X.empty()) {
        return 0;
    }
    if (Y.empty()) {
        return std::numeric_limits<long double>::infinity();
    }
    const long double inf = std::numeric_limits<long double>::infinity();
    std::vector<Span> gaps;
    gaps.emplace_back(-inf, Y.front().first);
    for (std::size_t i = 0; i + 1 < Y.size(); ++i) {
        gaps.emplace_back(Y[i].second, Y[i + 1].first);
    }
    gaps.emplace_back(Y.back().second, inf);
    long double best = 0;
    std::size_t j = 0;
    for (const auto& [p, q] : X) {
        while (j < gaps.size() && gaps[j].second <= p) {
            ++j;
        }
        for (std::size_t k = j; k < gaps.size() && gaps[k].first < q; ++k) {
            const auto [g1, g2] = gaps[k];
            const long double a = std::max(p, g1), b = std::min(q, g2);
            if (a > b) {
                continue;
            }
            long double d;
            if (std::isinf(g1)) {
                d = g2 - a;
            } else if (std::isinf(g2)) {
                d = b - g1;
            } else {
                const long double mid = (g1 + g2) / 2;
                d = (mid >= a && mid <= b) ? (g2 - g1) / 2 : (b < mid ? b - g1 : g2 - a);
            }
            best = std::max(best, d);
        }
    }
    return best;
}

double union_measure(const std::vector<std::vector<Iv>>& sets) {
    std::vector<Span> all;
    for (const auto& s : sets) {
        for (const auto& iv : s) {
            all.emplace_back(iv.dlo, iv.dhi);
        }
    }
    std::sort(all.begin(), all.end());
    long double total = 0, lo = 0, hi = 0;
    bool open = false;
    for (const auto& [a, b] : all) {
        if (open && a <= hi) {
            hi = std::max(hi, b);
            continue;
        }
        if (open) {
            total += hi - lo;
        }
        lo = a;
        hi = b;
        open = true;
    }
    if (open) {
        total += hi - lo;
    }
    return static_cast<double>(total);
}

void add_box_cover(std::vector<Cell>& out, double x0, double x1, double y0, double y1, double h, int dim) {
    const auto i0 = static_cast<std::int64_t>(std::floor(x0 / h));
    const auto i1 = std::max(i0, static_cast<std::int64_t>(std::ceil(x1 / h)) - 1);
    if (dim == 1) {
        for (auto i = i0; i <= i1; ++i) {
            out.push_back({i, 0});
        }
        return;
    }
    const auto j0 = static_cast<std::int64_t>(std::floor(y0 / h));
    const auto j1 = std::max(j0, static_cast<std::int64_t>(std::ceil(y1 / h)) - 1);
    for (auto i = i0; i <= i1; ++i) {
        for (auto j = j0; j <= j1; ++j) {
            out.push_back({i, j});
        }
    }
}

void sort_unique(std::vector<Cell>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Chebyshev distance (in boxes) from each cell of X to the nearest cell of Y,
// maximised; both on the same grid.
double directed_cell_distance(const std::vector<Cell>& X, const std::vector<Cell>& Y) {
    if (X.empty()) {
        return 0;
    }
    if (Y.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    std::int64_t lo0 = X[0][0], hi0 = X[0][0], lo1 = X[0][1], hi1 = X[0][1];
    for (const auto* v : {&X, &Y}) {
        for (const auto& c : *v) {
            lo0 = std::min(lo0, c[0]);
            hi0 = std::max(hi0, c[0]);
            lo1 = std::min(lo1, c[1]);
            hi1 = std::max(hi1, c[1]);
        }
    }
    const std::int64_t w = hi0 - lo0 + 1, hgt = hi1 - lo1 + 1;
    if (w * hgt > 200'000'000) {
        throw CapacityExceeded("box cloud too large for the Hausdorff distance grid");
    }
    std::vector<std::int32_t> dist(static_cast<std::size_t>(w * hgt), -1);
    std::deque<std::int64_t> queue;
    for (const auto& c : Y) {
        std::int64_t k = (c[0] - lo0) * hgt + (c[1] - lo1);
        if (dist[static_cast<std::size_t>(k)] < 0) {
            dist[static_cast<std::size_t>(k)] = 0;
            queue.push_back(k);
        }
    }
    while (!queue.empty()) {
        std::int64_t k = queue.front();
        queue.pop_front();
        std::int64_t i = k / hgt, j = k % hgt;
        for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
                std::int64_t ni = i + di, nj = j + dj;
                if (ni < 0 || nj < 0 || ni >= w || nj >= hgt) {
                    continue;
                }
                auto nk = static_cast<std::size_t>(ni * hgt + nj);
                if (dist[nk] < 0) {
                    dist[nk] = dist[static_cast<std::size_t>(k)] + 1;
                    queue.push_back(static_cast<std::int64_t>(nk));
                }
            }
        }
    }
    std::int32_t best = 0;
    for (const auto& c : X) {
        best = std::max(best, dist[static_cast<std::size_t>((c[0] - lo0) * hgt + (c[1] - lo1))]);
    }
    return best;
}

AttractorApprox attractor_1d(const CoupledIFS& ifs, int iterations, const std::vector<Window>& seed, const IfsOptions& opts) {
    IntervalEngine eng(ifs, seed, opts);
    AttractorApprox out;
    out.measure_history.push_back(union_measure(eng.sets()));
    const double rmax = ifs.max_ratio();
    int strikes = 0;
    for (int k = 1; k <= iterations; ++k) {
        auto before = eng.sets();
        eng.step();
        long double gap = 0;
        for (std::size_t i = 0; i < before.size(); ++i) {
            auto X = spans(eng.sets()[i]), Y = spans(before[i]);
            gap = std::max({gap, directed_distance(X, Y), directed_distance(Y, X)});
        }
        // Below this the float copies only carry rounding noise.
        out.gap_history.push_back(gap < 1e-13L ? 0.0 : static_cast<double>(gap));
        out.measure_history.push_back(union_measure(eng.sets()));
        if (k >= 2) {
            const double prev = out.gap_history[static_cast<std::size_t>(k) - 2];
            if (prev > 1e-12 && out.gap_history.back() / prev > rmax + opts.ratio_tol) {
                if (++strikes >= 3) {
                    throw NotContractive("Hausdorff gap ratio exceeded max |r| + tol for 3 consecutive steps");
                }
            } else {
                strikes = 0;
            }
        }
    }
    out.iteration_count = iterations;
    out.hausdorff_gap = out.gap_history.empty() ? 0.0 : out.gap_history.back();
    out.exact_endpoints = eng.exact();
    out.sets = eng.windows();
    return out;
}

AttractorApprox attractor_2d(const CoupledIFS& ifs, int iterations, const std::vector<Window>& seed, const IfsOptions& opts) {
    const double h = opts.box_h;
    if (!(h > 0)) {
        throw std::invalid_argument("box_h must be positive");
    }
    std::vector<std::vector<Cell>> sets;
    for (const auto& w : seed) {
        if (std::holds_alternative<IntervalUnion>(w)) {
            throw std::invalid_argument("two-dimensional IFS needs planar seeds");
        }
        if (window_empty(w)) {
            throw std::invalid_argument("seed sets must be nonempty");
        }
        sets.push_back(rasterize(w, h).cells());
    }
    struct M2 {
        std::size_t source;
        double r, t0, t1;
    };
    std::vector<std::vector<M2>> maps;
    for (const auto& target : ifs.maps) {
        maps.emplace_back();
        for (const auto& m : target) {
            maps.back().push_back({m.source, m.ratio.to_double(), m.translation[0].to_double(), m.translation[1].to_double()});
        }
    }
    auto measure = [&](const std::vector<std::vector<Cell>>& s) {
        std::vector<Cell> all;
        for (const auto& v : s) {
            all.insert(all.end(), v.begin(), v.end());
        }
        sort_unique(all);
        return static_cast<double>(all.size()) * h * h;
    };
    AttractorApprox out;
    out.measure_history.push_back(measure(sets));
    const double rmax = ifs.max_ratio();
    int strikes = 0;
    for (int k = 1; k <= iterations; ++k) {
        std::vector<std::vector<Cell>> next(sets.size());
        for (std::size_t target = 0; target < sets.size(); ++target) {
            for (const auto& m : maps[target]) {
                for (const auto& c : sets[m.source]) {
                    double xa = m.r * c[0] * h + m.t0, xb = m.r * (c[0] + 1) * h + m.t0;
                    double ya = m.r * c[1] * h + m.t1, yb = m.r * (c[1] + 1) * h + m.t1;
                    add_box_cover(next[target], std::min(xa, xb), std::max(xa, xb), std::min(ya, yb), std::max(ya, yb), h, 2);
                }
            }
            sort_unique(next[target]);
            if (next[target].size() > opts.max_intervals) {
                throw CapacityExceeded("attractor iterate has more than " + std::to_string(opts.max_intervals) + " boxes");
            }
        }
        double gap = 0;
        for (std::size_t i = 0; i < sets.size(); ++i) {
            gap = std::max({gap, directed_cell_distance(next[i], sets[i]), directed_cell_distance(sets[i], next[i])});
        }
        out.gap_history.push_back(gap * h);
        sets = std::move(next);
        out.measure_history.push_back(measure(sets));
        if (k >= 2) {
            const double prev = out.gap_history[static_cast<std::size_t>(k) - 2];
            // Box quantisation: gaps of one box carry no ratio information.
            if (prev > 2 * h && out.gap_history.back() / prev > rmax + opts.ratio_tol) {
                if (++strikes >= 3) {
                    throw NotContractive("Hausdorff gap ratio exceeded max |r| + tol for 3 consecutive steps");
                }
            } else {
                strikes = 0;
            }
        }
    }
    out.iteration_count = iterations;
    out.hausdorff_gap = out.gap_history.empty() ? 0.0 : out.gap_history.back();
    for (auto& s : sets) {
        out.sets.emplace_back(BoxCloud(2, h, {0.0, 0.0}, std::move(s)));
    }
    return out;
}

Rational dyadic_floor(double x) {
    const double scale = std::ldexp(1.0, 32);
    return Rational(BigInt(std::floor(x * scale)), BigInt(1) << 32);
}

Rational dyadic_ceil(double x) {
    const double scale = std::ldexp(1.0, 32);
    return Rational(BigInt(std::ceil(x * scale)), BigInt(1) << 32);
}

// Coordinates of the contracting functionals: one row per coordinate of the
// projection, one column per letter.
std::vector<std::vector<double>> contracting_functionals(const Substitution& s) {
    const int m = s.size();
    const IntMatrix M = substitution_matrix(s);
    Eigen::MatrixXd Mt(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            Mt(j, i) = M[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get_d();
        }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(Mt);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("eigenvalue solver did not converge");
    }
    std::vector<int> order(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        order[static_cast<std::size_t>(i)] = i;
    }
    const auto ev = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (std::abs(std::abs(ev(a)) - std::abs(ev(b))) > 1e-12) {
            return std::abs(ev(a)) > std::abs(ev(b));
        }
        return ev(a).imag() > ev(b).imag();
    });
    auto normalised = [&](int k) {
        Eigen::VectorXcd v = es.eigenvectors().col(k);
        int pivot = 0;
        while (pivot < m && std::abs(v(pivot)) < 1e-12) {
            ++pivot;
        }
        return Eigen::VectorXcd(v / v(pivot));
    };
    std::vector<std::vector<double>> rows;
    if (m == 2) {
        Eigen::VectorXcd v = normalised(order[1]);
        rows.push_back({v(0).real(), v(1).real()});
        return rows;
    }
    const int k1 = order[1];
    if (std::abs(ev(k1).imag()) > 1e-12) {
        Eigen::VectorXcd v = normalised(k1);
        rows.push_back({v(0).real(), v(1).real(), v(2).real()});
        rows.push_back({v(0).imag(), v(1).imag(), v(2).imag()});
        return rows;
    }
    for (int k : {order[1], order[2]}) {
        Eigen::VectorXcd v = normalised(k);
        rows.push_back({v(0).real(), v(1).real(), v(2).real()});
    }
    return rows;
}

struct Frame {
    double x0, y0, scale;
};

Frame frame_for(const std::vector<std::pair<double, double>>& b, int pixels) {
    const double w = b[0].second - b[0].first;
    const double hgt = b.size() > 1 ? b[1].second - b[1].first : 0.0;
    double span = std::max({w, hgt, 1e-12});
    const double margin = 0.05 * span;
    span += 2 * margin;
    const double cx = (b[0].first + b[0].second) / 2;
    const double cy = b.size() > 1 ? (b[1].first + b[1].second) / 2 : 0.0;
    return {cx - span / 2, cy + span / 2, span / pixels};
}

std::string fmt3(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << v;
    return os.str();
}

} // namespace

void CoupledIFS::validate() const {
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("IFS dimension must be 1 or 2");
    }
    if (maps.empty() || maps.size() != set_names.size()) {
        throw std::invalid_argument("one map list per named set is required");
    }
    for (const auto& target : maps) {
        if (target.empty()) {
            throw std::invalid_argument("every set needs at least one incoming map");
        }
        for (const auto& m : target) {
            if (m.source >= maps.size()) {
                throw std::invalid_argument("map source out of range");
            }
            if (m.translation.size() != static_cast<std::size_t>(dim)) {
                throw std::invalid_argument("translation length must equal the dimension");
            }
            if (!(std::abs(m.ratio.to_double()) < 1)) {
                throw NotContractive("contraction ratio with |r| >= 1");
            }
        }
    }
}

double CoupledIFS::max_ratio() const {
    double r = 0;
    for (const auto& target : maps) {
        for (const auto& m : target) {
            r = std::max(r, std::abs(m.ratio.to_double()));
        }
    }
    return r;
}

AttractorApprox ifs_attractor(const CoupledIFS& ifs, int iterations, const std::vector<Window>& seed, const IfsOptions& opts) {
    ifs.validate();
    if (iterations < 1) {
        throw std::invalid_argument("iterations must be at least 1");
    }
    if (seed.size() != ifs.maps.size()) {
        throw std::invalid_argument("one seed window per set is required");
    }
    return ifs.dim == 1 ? attractor_1d(ifs, iterations, seed, opts) : attractor_2d(ifs, iterations, seed, opts);
}

std::vector<Window> ifs_hull_seed(const CoupledIFS& ifs) {
    ifs.validate();
    const double rmax = ifs.max_ratio();
    const std::size_t n = ifs.maps.size();
    std::vector<std::array<std::pair<double, double>, 2>> hull(n);
    for (int c = 0; c < ifs.dim; ++c) {
        double tmax = 0;
        for (const auto& target : ifs.maps) {
            for (const auto& m : target) {
                tmax = std::max(tmax, std::abs(m.translation[static_cast<std::size_t>(c)].to_double()));
            }
        }
        const double R = tmax / (1 - rmax) + 1;
        std::vector<std::pair<double, double>> cur(n, {-R, R});
        for (int it = 0; it < 4000; ++it) {
            std::vector<std::pair<double, double>> next(n, {INFINITY, -INFINITY});
            for (std::size_t i = 0; i < n; ++i) {
                for (const auto& m : ifs.maps[i]) {
                    const double r = m.ratio.to_double(), t = m.translation[static_cast<std::size_t>(c)].to_double();
                    const double a = r * cur[m.source].first + t, b = r * cur[m.source].second + t;
                    next[i].first = std::min({next[i].first, a, b});
                    next[i].second = std::max({next[i].second, a, b});
                }
            }
            double change = 0;
            for (std::size_t i = 0; i < n; ++i) {
                change = std::max({change, std::abs(next[i].first - cur[i].first), std::abs(next[i].second - cur[i].second)});
            }
            cur = next;
            if (change < 1e-15) {
                break;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            hull[i][static_cast<std::size_t>(c)] = cur[i];
        }
    }
    std::vector<Window> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto widen_lo = [](double x) { return x - 1e-9 * (1 + std::abs(x)); };
        auto widen_hi = [](double x) { return x + 1e-9 * (1 + std::abs(x)); };
        if (ifs.dim == 1) {
            out.emplace_back(IntervalUnion({{RealValue(dyadic_floor(widen_lo(hull[i][0].first))),
                                             RealValue(dyadic_ceil(widen_hi(hull[i][0].second)))}}));
        } else {
            const double x0 = widen_lo(hull[i][0].first), x1 = widen_hi(hull[i][0].second);
            const double y0 = widen_lo(hull[i][1].first), y1 = widen_hi(hull[i][1].second);
            out.emplace_back(Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}});
        }
    }
    return out;
}

CoupledIFS substitution_ifs(const Substitution& s, const PerronData& pd) {
    if (s.size() != 2) {
        throw std::invalid_argument("substitution_ifs needs a two-letter substitution");
    }
    if (!pd.is_pisot) {
        throw NotPisot("substitution_ifs needs a primitive Pisot substitution");
    }
    const IntMatrix M = substitution_matrix(s);
    const RealValue trace(Rational(M[0][0] + M[1][1]));
    const RealValue conj_lambda = trace - pd.lambda;
    std::vector<RealValue> phi;
    if (pd.lambda.is_quadratic()) {
        for (const auto& l : pd.left_eigvec) {
            phi.push_back(l.is_quadratic() ? RealValue(l.quadratic().conjugate()) : l);
        }
    } else {
        // phi M = lambda' phi with phi_0 = l_0.
        phi.push_back(pd.left_eigvec[0]);
        phi.push_back((conj_lambda - RealValue(Rational(M[0][0]))) * pd.left_eigvec[0] / RealValue(Rational(M[1][0])));
    }
    CoupledIFS ifs;
    ifs.dim = 1;
    ifs.set_names = {std::string(1, s.letter(0)), std::string(1, s.letter(1))};
    ifs.maps.resize(2);
    for (int j = 0; j < 2; ++j) {
        RealValue prefix;
        for (int letter : s.image(j)) {
            ifs.maps[static_cast<std::size_t>(letter)].push_back({static_cast<std::size_t>(j), conj_lambda, {prefix}});
            prefix += phi[static_cast<std::size_t>(letter)];
        }
    }
    return ifs;
}

CoupledIFS fibonacci_square_ifs_integer() {
    const RealValue r(QuadraticElement(Rational(3, 2), Rational(-1, 2), 5));
    auto t = [](long v) { return std::vector<RealValue>{RealValue(Rational(v))}; };
    CoupledIFS ifs;
    ifs.dim = 1;
    ifs.set_names = {"A", "B"};
    ifs.maps = {{{0, r, t(0)}, {0, r, t(1)}, {1, r, t(2)}}, {{1, r, t(0)}, {0, r, t(2)}}};
    return ifs;
}

std::vector<std::vector<double>> rauzy_points(const Substitution& s, std::size_t prefix_count) {
    if (prefix_count == 0) {
        throw std::invalid_argument("prefix_count must be at least 1");
    }
    if (s.size() < 2 || s.size() > 3) {
        throw std::invalid_argument("Rauzy clouds need two or three letters");
    }
    PerronData pd = classify(s);
    if (!pd.is_primitive) {
        throw NotPrimitive("Rauzy clouds need a primitive substitution");
    }
    if (!pd.is_pisot) {
        throw NotPisot("Rauzy clouds need a Pisot substitution");
    }
    const auto rows = contracting_functionals(s);
    const FixedPointSeed seed = fixed_point_seed(s);
    const IntMatrix M = substitution_matrix(s);
    unsigned level = static_cast<unsigned>(seed.power);
    while (supertile_length(M, seed.right, level) < BigInt(static_cast<unsigned long>(prefix_count))) {
        level += static_cast<unsigned>(seed.power);
    }
    SupertileStream stream(s, seed.right, level);
    std::vector<double> counts(static_cast<std::size_t>(s.size()), 0.0);
    std::vector<std::vector<double>> pts;
    pts.reserve(prefix_count);
    int letter = 0;
    for (std::size_t n = 0; n < prefix_count; ++n) {
        std::vector<double> p;
        for (const auto& row : rows) {
            double v = 0;
            for (std::size_t i = 0; i < counts.size(); ++i) {
                v += row[i] * counts[i];
            }
            p.push_back(v);
        }
        pts.push_back(std::move(p));
        if (n + 1 < prefix_count) {
            stream.next(letter);
            counts[static_cast<std::size_t>(letter)] += 1;
        }
    }
    return pts;
}

BoxCloud rauzy_window_cloud(const Substitution& s, std::size_t prefix_count, std::optional<double> h) {
    const auto pts = rauzy_points(s, prefix_count);
    const int dim = static_cast<int>(pts[0].size());
    double spread = 0;
    for (int c = 0; c < dim; ++c) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& p : pts) {
            lo = std::min(lo, p[static_cast<std::size_t>(c)]);
            hi = std::max(hi, p[static_cast<std::size_t>(c)]);
        }
        spread = std::max(spread, hi - lo);
    }
    const double hh = h ? *h : std::max(1e-3, spread / 1024);
    if (!(hh > 0)) {
        throw std::invalid_argument("box size must be positive");
    }
    std::vector<Cell> cells;
    cells.reserve(pts.size());
    for (const auto& p : pts) {
        cells.push_back({static_cast<std::int64_t>(std::floor(p[0] / hh)),
                         dim == 2 ? static_cast<std::int64_t>(std::floor(p[1] / hh)) : 0});
    }
    sort_unique(cells);
    return BoxCloud(dim, hh, {0.0, 0.0}, std::move(cells));
}

BoxCloud rasterize(const Window& w, double h) {
    if (!(h > 0)) {
        throw std::invalid_argument("box size must be positive");
    }
    std::vector<Cell> cells;
    if (const auto* iu = std::get_if<IntervalUnion>(&w)) {
        for (const auto& p : iu->parts()) {
            add_box_cover(cells, p.lo.to_double(), p.hi.to_double(), 0, 0, h, 1);
        }
        sort_unique(cells);
        return BoxCloud(1, h, {0.0, 0.0}, std::move(cells));
    }
    if (const auto* poly = std::get_if<Polygon>(&w)) {
        auto [lo, hi] = poly->bounds();
        const auto i0 = static_cast<std::int64_t>(std::floor(lo[0] / h)), i1 = static_cast<std::int64_t>(std::ceil(hi[0] / h));
        const auto j0 = static_cast<std::int64_t>(std::floor(lo[1] / h)), j1 = static_cast<std::int64_t>(std::ceil(hi[1] / h));
        for (auto i = i0; i <= i1; ++i) {
            for (auto j = j0; j <= j1; ++j) {
                if (poly->contains({(static_cast<double>(i) + 0.5) * h, (static_cast<double>(j) + 0.5) * h})) {
                    cells.push_back({i, j});
                }
            }
        }
        return BoxCloud(2, h, {0.0, 0.0}, std::move(cells));
    }
    const auto& bc = std::get<BoxCloud>(w);
    for (const auto& c : bc.cells()) {
        const double x0 = bc.origin()[0] + static_cast<double>(c[0]) * bc.h();
        const double y0 = bc.origin()[1] + static_cast<double>(c[1]) * bc.h();
        add_box_cover(cells, x0, x0 + bc.h(), y0, y0 + bc.h(), h, bc.dim());
    }
    sort_unique(cells);
    return BoxCloud(bc.dim(), h, {0.0, 0.0}, std::move(cells));
}

DimensionEstimate box_dimension(const BoxCloud& cloud, bool boundary_only, const std::vector<double>& scales) {
    if (scales.size() < 4) {
        throw std::invalid_argument("box_dimension needs at least 4 scales");
    }
    const auto [smin, smax] = std::minmax_element(scales.begin(), scales.end());
    if (!(*smin > 0) || *smax / *smin < 4 - 1e-9) {
        throw std::invalid_argument("scales must be positive and span at least 2 octaves");
    }
    if (*smin < cloud.h() * (1 - 1e-9)) {
        throw std::invalid_argument("scales must not be finer than the cloud");
    }
    if (cloud.size() == 0) {
        throw DegenerateFit("empty cloud");
    }
    DimensionEstimate est;
    est.scales = scales;
    std::vector<double> xs, ys;
    for (double H : scales) {
        std::vector<Cell> coarse;
        coarse.reserve(cloud.size());
        for (const auto& c : cloud.cells()) {
            const double x = cloud.origin()[0] + (static_cast<double>(c[0]) + 0.5) * cloud.h();
            const double y = cloud.origin()[1] + (static_cast<double>(c[1]) + 0.5) * cloud.h();
            coarse.push_back({static_cast<std::int64_t>(std::floor(x / H)),
                              cloud.dim() == 2 ? static_cast<std::int64_t>(std::floor(y / H)) : 0});
        }
        sort_unique(coarse);
        std::size_t count = coarse.size();
        if (boundary_only) {
            count = BoxCloud(cloud.dim(), H, {0.0, 0.0}, coarse).boundary_cells().size();
        }
        est.counts.push_back(count);
        if (count == 0) {
            throw DegenerateFit("no boxes at scale " + format_decimal(H));
        }
        xs.push_back(std::log(1 / H));
        ys.push_back(std::log(static_cast<double>(count)));
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    est.estimate = sxy / sxx;
    est.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 0.0;
    if (est.r2 < 0.9) {
        throw DegenerateFit("box counting fit has r^2 = " + format_decimal(est.r2));
    }
    return est;
}

std::vector<double> default_box_scales(const BoxCloud& cloud, int count) {
    if (count < 4) {
        throw std::invalid_argument("at least 4 scales are needed");
    }
    auto [lo, hi] = cloud.bounds();
    double spread = hi[0] - lo[0];
    if (cloud.dim() == 2) {
        spread = std::max(spread, hi[1] - lo[1]);
    }
    int jmax = static_cast<int>(std::floor(std::log2(spread / (2 * cloud.h()))));
    jmax = std::min(jmax, 3 + count);
    const int jmin = jmax - count + 1;
    if (jmin < 1) {
        throw DegenerateFit("cloud resolution too coarse for " + std::to_string(count) + " scales");
    }
    std::vector<double> out;
    for (int j = jmin; j <= jmax; ++j) {
        out.push_back(std::ldexp(spread, -j));
    }
    return out;
}

ImageFormat parse_image_format(std::string_view name) {
    if (name == "svg" || name == "SVG") {
        return ImageFormat::svg;
    }
    if (name == "pgm" || name == "PGM") {
        return ImageFormat::pgm;
    }
    throw UnsupportedFormat("unsupported image format '" + std::string(name) + "' (use svg or pgm)");
}

std::string render(const Window& w, ImageFormat format, int pixels) {
    if (pixels < 64 || pixels > 4096) {
        throw std::invalid_argument("pixels must be in [64, 4096]");
    }
    const auto P = static_cast<std::size_t>(pixels);
    const bool empty = window_empty(w);
    const int dim = empty ? 1 : window_dim(w);
    const Frame fr = empty ? Frame{0, 0, 1} : frame_for(window_bounds(w), pixels);
    // 1-D windows become bars across the middle eighth.
    const std::size_t bar0 = P * 7 / 16, bar1 = P * 9 / 16;

    if (format == ImageFormat::pgm) {
        std::vector<unsigned char> img(P * P, 255);
        if (!empty) {
            for (std::size_t py = 0; py < P; ++py) {
                if (dim == 1 && (py < bar0 || py >= bar1)) {
                    continue;
                }
                for (std::size_t px = 0; px < P; ++px) {
                    const double x = fr.x0 + (static_cast<double>(px) + 0.5) * fr.scale;
                    const double y = fr.y0 - (static_cast<double>(py) + 0.5) * fr.scale;
                    std::vector<double> q = dim == 1 ? std::vector<double>{x} : std::vector<double>{x, y};
                    if (window_contains(w, q)) {
                        img[py * P + px] = 0;
                    }
                }
            }
            if (const auto* bc = std::get_if<BoxCloud>(&w)) {
                for (const auto& c : bc->cells()) {
                    const double x = bc->origin()[0] + (static_cast<double>(c[0]) + 0.5) * bc->h();
                    const double y = bc->origin()[1] + (static_cast<double>(c[1]) + 0.5) * bc->h();
                    const auto px = static_cast<std::int64_t>(std::floor((x - fr.x0) / fr.scale));
                    if (px < 0 || px >= pixels) {
                        continue;
                    }
                    if (dim == 1) {
                        for (std::size_t py = bar0; py < bar1; ++py) {
                            img[py * P + static_cast<std::size_t>(px)] = 0;
                        }
                        continue;
                    }
                    const auto py = static_cast<std::int64_t>(std::floor((fr.y0 - y) / fr.scale));
                    if (py >= 0 && py < pixels) {
                        img[static_cast<std::size_t>(py) * P + static_cast<std::size_t>(px)] = 0;
                    }
                }
            }
        }
        std::string out = "P5\n" + std::to_string(pixels) + " " + std::to_string(pixels) + "\n255\n";
        out.append(img.begin(), img.end());
        return out;
    }

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << pixels << "\" height=\"" << pixels
       << "\" viewBox=\"0 0 " << pixels << ' ' << pixels << "\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << pixels << "\" height=\"" << pixels << "\" fill=\"white\"/>\n";
    auto sx = [&](double x) { return (x - fr.x0) / fr.scale; };
    auto sy = [&](double y) { return (fr.y0 - y) / fr.scale; };
    if (!empty) {
        if (const auto* iu = std::get_if<IntervalUnion>(&w)) {
            for (const auto& p : iu->parts()) {
                const double x0 = sx(p.lo.to_double()), x1 = sx(p.hi.to_double());
                os << "<rect x=\"" << fmt3(x0) << "\" y=\"" << bar0 << "\" width=\"" << fmt3(x1 - x0) << "\" height=\""
                   << bar1 - bar0 << "\" fill=\"black\"/>\n";
            }
        } else if (const auto* poly = std::get_if<Polygon>(&w)) {
            os << "<polygon points=\"";
            for (std::size_t i = 0; i < poly->vertices.size(); ++i) {
                os << (i ? " " : "") << fmt3(sx(poly->vertices[i][0])) << ',' << fmt3(sy(poly->vertices[i][1]));
            }
            os << "\" fill=\"black\"/>\n";
        } else {
            const auto& bc = std::get<BoxCloud>(w);
            const double side = bc.h() / fr.scale;
            // Runs of consecutive boxes along the first axis, one rect each.
            std::vector<Cell> cells = bc.cells();
            std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
                return a[1] != b[1] ? a[1] < b[1] : a[0] < b[0];
            });
            for (std::size_t i = 0; i < cells.size();) {
                std::size_t j = i + 1;
                while (j < cells.size() && cells[j][1] == cells[i][1] && cells[j][0] == cells[j - 1][0] + 1) {
                    ++j;
                }
                const double x0 = bc.origin()[0] + static_cast<double>(cells[i][0]) * bc.h();
                const double run = static_cast<double>(j - i) * side;
                if (bc.dim() == 1) {
                    os << "<rect x=\"" << fmt3(sx(x0)) << "\" y=\"" << bar0 << "\" width=\"" << fmt3(run) << "\" height=\""
                       << bar1 - bar0 << "\" fill=\"black\"/>\n";
                } else {
                    const double y1 = bc.origin()[1] + static_cast<double>(cells[i][1] + 1) * bc.h();
                    os << "<rect x=\"" << fmt3(sx(x0)) << "\" y=\"" << fmt3(sy(y1)) << "\" width=\"" << fmt3(run)
                       << "\" height=\"" << fmt3(side) << "\" fill=\"black\"/>\n";
                }
                i = j;
            }
        }
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace aperiodic
