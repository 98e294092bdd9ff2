#include "aperiodic/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

#include "aperiodic/errors.hpp"

namespace aperiodic {

namespace {

using i128 = __int128;

int sgn128(i128 v) { return (v > 0) - (v < 0); }

RealValue frac(const RealValue& x) { return x - RealValue(Rational(x.floor())); }

// Walks x, x+alpha, x+2alpha, ... mod 1 and reports window membership.
class OrbitEngine {
public:
    virtual ~OrbitEngine() = default;
    // Membership of the current point, then advance.
    virtual bool step() = 0;
    virtual bool exact() const = 0;
};

// Values (u + v sqrt(D)) / den with machine integers.
class QuadraticOrbit : public OrbitEngine {
public:
    struct Elem {
        i128 u = 0;
        i128 v = 0;
    };

    QuadraticOrbit(long D, std::int64_t den, Elem x, Elem alpha, std::vector<std::pair<Elem, Elem>> parts)
        : D_(D), sqrt_d_(std::sqrt(static_cast<long double>(D))), den_(den), x_(x), alpha_(alpha),
          parts_(std::move(parts)) {}

    bool step() override {
        bool hit = false;
        for (const auto& [lo, hi] : parts_) {
            if (sign(x_.u - lo.u, x_.v - lo.v) >= 0 && sign(x_.u - hi.u, x_.v - hi.v) < 0) {
                hit = true;
                break;
            }
        }
        x_.u += alpha_.u;
        x_.v += alpha_.v;
        if (sign(x_.u - den_, x_.v) >= 0) {
            x_.u -= den_;
        }
        return hit;
    }
    bool exact() const override { return true; }

private:
    int sign(i128 s, i128 t) const {
        if (t == 0) {
            return sgn128(s);
        }
        if (s == 0) {
            return sgn128(t);
        }
        if ((s > 0) == (t > 0)) {
            return sgn128(s);
        }
        long double approx = static_cast<long double>(s) + static_cast<long double>(t) * sqrt_d_;
        long double mag = std::abs(static_cast<long double>(s)) + std::abs(static_cast<long double>(t)) * sqrt_d_;
        if (std::abs(approx) > 1e-12L * mag) {
            return approx > 0 ? 1 : -1;
        }
        // s and t have opposite signs: compare s^2 with t^2 D.
        i128 lhs = s * s;
        i128 rhs = t * t * D_;
        return s > 0 ? sgn128(lhs - rhs) : sgn128(rhs - lhs);
    }

    long D_;
    long double sqrt_d_;
    i128 den_;
    Elem x_;
    Elem alpha_;
    std::vector<std::pair<Elem, Elem>> parts_;
};

// Exact stepping with arbitrary precision, for values too large for QuadraticOrbit.
class BigOrbit : public OrbitEngine {
public:
    BigOrbit(RealValue x, RealValue alpha, IntervalUnion w) : x_(std::move(x)), alpha_(std::move(alpha)), w_(std::move(w)) {}
    bool step() override {
        bool hit = w_.contains(x_);
        x_ += alpha_;
        if (exact_compare(x_, RealValue(Rational(1))) >= 0) {
            x_ -= RealValue(Rational(1));
        }
        return hit;
    }
    bool exact() const override { return true; }

private:
    RealValue x_;
    RealValue alpha_;
    IntervalUnion w_;
};

class FloatOrbit : public OrbitEngine {
public:
    FloatOrbit(const TorusPoint& x, const std::vector<RealValue>& alpha, const Window& w) : w_(w) {
        for (const auto& v : x) {
            x_.push_back(v.to_long_double());
        }
        for (const auto& a : alpha) {
            alpha_.push_back(a.to_long_double());
        }
        y_.resize(x_.size());
    }
    bool step() override {
        const long double k = static_cast<long double>(k_++);
        for (std::size_t i = 0; i < x_.size(); ++i) {
            long double v = x_[i] + k * alpha_[i];
            y_[i] = static_cast<double>(v - std::floor(v));
        }
        return window_contains(w_, y_);
    }
    bool exact() const override { return false; }

private:
    std::vector<long double> x_;
    std::vector<long double> alpha_;
    std::vector<double> y_;
    const Window& w_;
    std::uint64_t k_ = 0;
};

// The shared quadratic field of the values, 1 if all rational, 0 if none.
long common_field(const std::vector<RealValue>& vals) {
    long d = 1;
    for (const auto& v : vals) {
        if (!v.is_exact()) {
            return 0;
        }
        long f = v.field();
        if (f == 1) {
            continue;
        }
        if (d != 1 && d != f) {
            return 0;
        }
        d = f;
    }
    return d;
}

std::pair<Rational, Rational> parts_of(const RealValue& v) {
    if (v.is_rational()) {
        return {v.rational(), Rational(0)};
    }
    return {v.quadratic().a(), v.quadratic().b()};
}

std::unique_ptr<OrbitEngine> make_engine(const RotationSystem& sys, const TorusPoint& x, std::uint64_t n) {
    const auto* iu = std::get_if<IntervalUnion>(&sys.window);
    if (!iu || sys.alpha.size() != 1) {
        return std::make_unique<FloatOrbit>(x, sys.alpha, sys.window);
    }
    std::vector<RealValue> vals{sys.alpha[0], x[0]};
    for (const auto& p : iu->parts()) {
        vals.push_back(p.lo);
        vals.push_back(p.hi);
    }
    const long D = common_field(vals);
    if (D == 0) {
        return std::make_unique<FloatOrbit>(x, sys.alpha, sys.window);
    }
    BigInt den(1);
    for (const auto& v : vals) {
        auto [a, b] = parts_of(v);
        mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), a.get_den_mpz_t());
        mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), b.get_den_mpz_t());
    }
    // Every numerator stays below 2^56 for n steps, so squares times D fit in 128 bits.
    const double limit = std::ldexp(1.0, 56) / std::max(1.0, std::sqrt(static_cast<double>(D)));
    bool fits = den.get_d() < limit;
    std::vector<QuadraticOrbit::Elem> elems;
    for (const auto& v : vals) {
        auto [a, b] = parts_of(v);
        BigInt ua = a.get_num() * (den / a.get_den());
        BigInt vb = b.get_num() * (den / b.get_den());
        fits = fits && std::abs(ua.get_d()) < limit && std::abs(vb.get_d()) < limit;
        if (fits) {
            elems.push_back({static_cast<i128>(ua.get_si()), static_cast<i128>(vb.get_si())});
        }
    }
    if (fits) {
        double vmax = std::abs(static_cast<double>(elems[1].v)) + static_cast<double>(n) * std::abs(static_cast<double>(elems[0].v));
        double umax = den.get_d() + vmax * std::sqrt(static_cast<double>(D)) + 1;
        fits = vmax < limit && umax < limit;
    }
    if (!fits) {
        return std::make_unique<BigOrbit>(x[0], sys.alpha[0], *iu);
    }
    std::vector<std::pair<QuadraticOrbit::Elem, QuadraticOrbit::Elem>> parts;
    for (std::size_t i = 2; i < elems.size(); i += 2) {
        parts.emplace_back(elems[i], elems[i + 1]);
    }
    return std::make_unique<QuadraticOrbit>(D, static_cast<std::int64_t>(den.get_si()), elems[1], elems[0], std::move(parts));
}

long double window_mu(const Window& w) {
    if (window_empty(w)) {
        return 0;
    }
    return window_measure(w).to_long_double();
}

} // namespace

void RotationSystem::validate() const {
    const std::size_t d = alpha.size();
    if (d != 1 && d != 2) {
        throw std::invalid_argument("rotation dimension must be 1 or 2");
    }
    if (!window_empty(window) && static_cast<std::size_t>(window_dim(window)) != d) {
        throw std::invalid_argument("window dimension does not match alpha");
    }
    const RealValue zero, one(Rational(1));
    for (const auto& a : alpha) {
        if (exact_compare(a, zero) < 0 || exact_compare(a, one) >= 0) {
            throw std::invalid_argument("alpha must lie in [0,1)");
        }
    }
    if (const auto* iu = std::get_if<IntervalUnion>(&window)) {
        if (!iu->empty() && (exact_compare(iu->parts().front().lo, zero) < 0 || exact_compare(iu->parts().back().hi, one) > 0)) {
            throw std::invalid_argument("window must lie inside [0,1]");
        }
    } else {
        for (const auto& b : window_bounds(window)) {
            if (b.first < -1e-12 || b.second > 1 + 1e-12) {
                throw std::invalid_argument("window must lie inside [0,1]^d");
            }
        }
    }
    for (const auto& x : start_points) {
        if (x.size() != d) {
            throw std::invalid_argument("start point has the wrong dimension");
        }
        for (const auto& c : x) {
            if (exact_compare(c, zero) < 0 || exact_compare(c, one) >= 0) {
                throw std::invalid_argument("start points must lie in [0,1)");
            }
        }
    }
}

std::vector<TorusPoint> default_start_points(int d) {
    std::mt19937_64 rng(0x5eed2024);
    const RealValue golden_frac(QuadraticElement(Rational(-1, 2), Rational(1, 2), 5));
    std::vector<TorusPoint> out{TorusPoint(static_cast<std::size_t>(d), RealValue()),
                                TorusPoint(static_cast<std::size_t>(d), RealValue(Rational(1, 7))),
                                TorusPoint(static_cast<std::size_t>(d), golden_frac)};
    for (int i = 0; i < 3; ++i) {
        TorusPoint p;
        for (int j = 0; j < d; ++j) {
            p.push_back(RealValue(Rational(static_cast<long>(rng() >> 44), 1L << 20)));
        }
        out.push_back(p);
    }
    return out;
}

double discrepancy_value(const RotationSystem& sys, const TorusPoint& x, std::uint64_t n) {
    if (n == 0) {
        return 0.0;
    }
    auto engine = make_engine(sys, x, n);
    std::uint64_t hits = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
        hits += engine->step() ? 1 : 0;
    }
    return static_cast<double>(static_cast<long double>(hits) - static_cast<long double>(n) * window_mu(sys.window));
}

DiscrepancyProfile discrepancy_profile(const RotationSystem& sys, int K, const VerdictPolicy& policy) {
    if (K < 0 || K > kMaxProfileExponent) {
        throw std::invalid_argument("profile exponent must be in [0, " + std::to_string(kMaxProfileExponent) + "]");
    }
    sys.validate();
    DiscrepancyProfile p;
    p.policy = policy;
    for (int j = 0; j <= K; ++j) {
        p.horizons.push_back(std::uint64_t{1} << j);
    }
    const long double mu = window_mu(sys.window);
    const std::uint64_t N = p.horizons.back();
    p.exact_orbit = true;
    for (const auto& x : sys.start_points) {
        auto engine = make_engine(sys, x, N);
        p.exact_orbit = p.exact_orbit && engine->exact();
        std::vector<double> row;
        long double hits = 0, best = 0;
        std::size_t next = 0;
        for (std::uint64_t n = 1; n <= N; ++n) {
            hits += engine->step() ? 1 : 0;
            best = std::max(best, std::abs(hits - static_cast<long double>(n) * mu));
            if (n == p.horizons[next]) {
                row.push_back(static_cast<double>(best));
                ++next;
            }
        }
        p.per_start.push_back(row);
        std::string label;
        for (const auto& c : x) {
            label += (label.empty() ? "" : ";") + format_symbolic(c);
        }
        p.start_labels.push_back(label);
    }
    p.max_abs_D.assign(p.horizons.size(), 0.0);
    for (const auto& row : p.per_start) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            p.max_abs_D[j] = std::max(p.max_abs_D[j], row[j]);
        }
    }
    double first = 0;
    for (double v : p.max_abs_D) {
        if (v > policy.zero_tol) {
            first = v;
            break;
        }
    }
    p.growth_ratio = first > 0 ? p.max_abs_D.back() / first : 0.0;
    p.verdict = policy.decide(p.max_abs_D[static_cast<std::size_t>(K / 2)], p.max_abs_D.back());
    return p;
}

KestenCertificate kesten_test(const RealValue& a, const RealValue& b, const RealValue& alpha, std::int64_t search_bound) {
    if (search_bound < 1) {
        throw std::invalid_argument("search bound must be at least 1");
    }
    const RealValue zero, one(Rational(1));
    if (exact_compare(a, zero) < 0 || exact_compare(a, b) >= 0 || exact_compare(b, one) > 0) {
        throw std::invalid_argument("need 0 <= a < b <= 1");
    }
    KestenCertificate cert;
    cert.search_bound = search_bound;
    const RealValue len = b - a;
    auto accept = [&](std::int64_t k, std::int64_t l) {
        if (!(len == static_cast<long>(k) * alpha + RealValue(Rational(l)))) {
            throw NumericalFailure("Kesten witness failed exact verification");
        }
        cert.holds = true;
        cert.witness = std::make_pair(k, l);
        cert.exhaustive_only = false;
        cert.reason = "b - a = " + std::to_string(k) + "*alpha + " + std::to_string(l);
    };

    const long D = common_field({len, alpha});
    if (D != 0) {
        auto [l0, l1] = parts_of(len);
        auto [a0, a1] = parts_of(alpha);
        cert.exhaustive_only = false;
        if (sgn(a1) != 0) {
            Rational k = l1 / a1;
            if (k.get_den() != 1) {
                cert.reason = "sqrt(" + std::to_string(D) + ") coefficients force k = " + format_rational(k) + ", not an integer";
                return cert;
            }
            Rational l = l0 - k * a0;
            if (l.get_den() != 1) {
                cert.reason = "k = " + format_rational(k) + " leaves l = " + format_rational(l) + ", not an integer";
                return cert;
            }
            accept(k.get_num().get_si(), l.get_num().get_si());
            return cert;
        }
        if (sgn(l1) != 0) {
            cert.reason = "b - a is irrational and alpha is rational";
            return cert;
        }
        // Rational alpha = p/q: k alpha + l ranges over (1/q) Z.
        const BigInt q = a0.get_den();
        if (Rational(l0 * q).get_den() != 1) {
            cert.reason = "b - a is not a multiple of 1/" + q.get_str();
            return cert;
        }
        for (std::int64_t k = 0; k < q; ++k) {
            Rational l = l0 - Rational(k) * a0;
            if (l.get_den() == 1) {
                accept(k, l.get_num().get_si());
                return cert;
            }
        }
        throw NumericalFailure("rational Kesten search did not close");
    }
    if (len.is_exact() && alpha.is_exact() && len.field() != 1 && alpha.field() != 1) {
        cert.exhaustive_only = false;
        cert.reason = "b - a and alpha lie in different quadratic fields";
        return cert;
    }
    // Inexact data: only an exactly verifiable witness could confirm, so search
    // for a near witness and report it as unverified.
    const long double L = len.to_long_double(), A = alpha.to_long_double();
    for (std::int64_t i = 0; i <= 2 * search_bound; ++i) {
        std::int64_t k = (i % 2 == 0) ? -(i / 2) : (i + 1) / 2;
        long double r = L - static_cast<long double>(k) * A;
        if (std::abs(r - std::nearbyint(r)) < 1e-12L) {
            cert.reason = "near witness k = " + std::to_string(k) + " cannot be verified exactly";
            return cert;
        }
    }
    cert.reason = "no witness with |k| <= " + std::to_string(search_bound);
    return cert;
}

RotationSystem rotation_system_for_cps(const CutProjectScheme& scheme) {
    CanonicalForm cf = to_canonical(scheme);
    RotationSystem sys;
    for (const auto& a : cf.alpha) {
        sys.alpha.push_back(frac(a));
    }
    sys.window = cf.scheme.window();
    TorusPoint own;
    for (std::size_t r = 1; r < cf.scheme.offset().size(); ++r) {
        own.push_back(frac(cf.scheme.offset()[r]));
    }
    sys.start_points.push_back(own);
    for (auto& p : default_start_points(scheme.dim_internal())) {
        sys.start_points.push_back(p);
    }
    return sys;
}

DiscrepancyProfile brs_verdict_for_cps(const CutProjectScheme& scheme, int K, const VerdictPolicy& policy) {
    return discrepancy_profile(rotation_system_for_cps(scheme), K, policy);
}

void write_profile_csv(std::ostream& os, const DiscrepancyProfile& p) {
    os << "horizon,max_abs_D";
    for (std::size_t s = 0; s < p.start_labels.size(); ++s) {
        os << ",x" << s;
    }
    os << '\n';
    for (std::size_t j = 0; j < p.horizons.size(); ++j) {
        os << p.horizons[j] << ',' << format_decimal(p.max_abs_D[j]);
        for (const auto& row : p.per_start) {
            os << ',' << format_decimal(row[j]);
        }
        os << '\n';
    }
}

} // namespace aperiodic
