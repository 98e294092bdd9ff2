#include "aperiodic/numerics.hpp"

#include <cmath>
#include <optional>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace aperiodic {

namespace {

bool is_square_free(long n) {
    if (n < 2) {
        return false;
    }
    for (long p = 2; p * p <= n; ++p) {
        if (n % (p * p) == 0) {
            return false;
        }
    }
    return true;
}

constexpr double kRound = std::numeric_limits<double>::epsilon();

double sqrt_d(long d) { return std::sqrt(static_cast<double>(d)); }

// Rigorous float enclosure of an exact value.
Approx enclose(double v) { return {v, std::abs(v) * 4.0 * kRound + std::numeric_limits<double>::denorm_min()}; }

Approx approx_add(const Approx& x, const Approx& y, double sign_y) {
    double v = x.value + sign_y * y.value;
    double e = (x.err + y.err) * (1.0 + 4.0 * kRound) + std::abs(v) * kRound;
    return {v, e};
}

Approx approx_mul(const Approx& x, const Approx& y) {
    double v = x.value * y.value;
    double e = std::abs(x.value) * y.err + std::abs(y.value) * x.err + x.err * y.err;
    e = e * (1.0 + 8.0 * kRound) + std::abs(v) * kRound;
    return {v, e};
}

Approx approx_div(const Approx& x, const Approx& y) {
    double ay = std::abs(y.value);
    if (ay <= y.err) {
        throw DivisionByZero("division by an approximate value whose error interval contains 0");
    }
    double v = x.value / y.value;
    double e = (std::abs(x.value) * y.err + ay * x.err) / (ay * (ay - y.err));
    e = e * (1.0 + 16.0 * kRound) + std::abs(v) * kRound;
    return {v, e};
}

Rational to_rational(double v) {
    Rational r(v);
    r.canonicalize();
    return r;
}

} // namespace

std::pair<long, long> square_free_split(long n) {
    if (n <= 0) {
        throw std::invalid_argument("square_free_split needs a positive integer");
    }
    long k = 1;
    long s = n;
    for (long p = 2; p * p <= s; ++p) {
        while (s % (p * p) == 0) {
            s /= p * p;
            k *= p;
        }
    }
    return {k, s};
}

QuadraticElement::QuadraticElement(Rational a, Rational b, long discriminant)
    : a_(std::move(a)), b_(std::move(b)), d_(discriminant) {
    if (!is_square_free(d_)) {
        throw std::invalid_argument("discriminant must be square-free and >= 2, got " + std::to_string(d_));
    }
    a_.canonicalize();
    b_.canonicalize();
}

Rational QuadraticElement::norm() const { return a_ * a_ - b_ * b_ * d_; }

double QuadraticElement::to_double() const {
    if (sgn(a_) * sgn(b_) >= 0) {
        return a_.get_d() + b_.get_d() * sqrt_d(d_);
    }
    // a and b*sqrt(D) have opposite signs: use a^2 - b^2 D over the conjugate.
    Rational n = norm();
    return n.get_d() / (a_.get_d() - b_.get_d() * sqrt_d(d_));
}

long double QuadraticElement::to_long_double() const {
    long double s = std::sqrt(static_cast<long double>(d_));
    long double a = static_cast<long double>(a_.get_num().get_d()) / static_cast<long double>(a_.get_den().get_d());
    long double b = static_cast<long double>(b_.get_num().get_d()) / static_cast<long double>(b_.get_den().get_d());
    if (sgn(a_) * sgn(b_) >= 0) {
        return a + b * s;
    }
    Rational n = norm();
    long double nn = static_cast<long double>(n.get_num().get_d()) / static_cast<long double>(n.get_den().get_d());
    return nn / (a - b * s);
}

QuadraticElement qf_arith(const QuadraticElement& lhs, const QuadraticElement& rhs, QfOp op) {
    if (lhs.discriminant() != rhs.discriminant()) {
        throw MixedDiscriminant("operands live in Q(sqrt(" + std::to_string(lhs.discriminant()) + ")) and Q(sqrt(" +
                                std::to_string(rhs.discriminant()) + "))");
    }
    const long d = lhs.discriminant();
    switch (op) {
    case QfOp::add:
        return {lhs.a() + rhs.a(), lhs.b() + rhs.b(), d};
    case QfOp::sub:
        return {lhs.a() - rhs.a(), lhs.b() - rhs.b(), d};
    case QfOp::mul:
        return {lhs.a() * rhs.a() + lhs.b() * rhs.b() * d, lhs.a() * rhs.b() + lhs.b() * rhs.a(), d};
    case QfOp::div: {
        Rational n = rhs.norm();
        if (sgn(n) == 0) {
            throw DivisionByZero("division by zero in Q(sqrt(" + std::to_string(d) + "))");
        }
        // x / y = x * conj(y) / N(y)
        Rational a = (lhs.a() * rhs.a() - lhs.b() * rhs.b() * d) / n;
        Rational b = (lhs.b() * rhs.a() - lhs.a() * rhs.b()) / n;
        return {a, b, d};
    }
    }
    throw std::logic_error("unknown QfOp");
}

int qf_sign(const QuadraticElement& x) {
    int sa = sgn(x.a());
    int sb = sgn(x.b());
    if (sb == 0) {
        return sa;
    }
    if (sa == 0 || sa == sb) {
        return sb;
    }
    Rational a2 = x.a() * x.a();
    Rational b2d = x.b() * x.b() * x.discriminant();
    return a2 > b2d ? sa : sb;
}

BigInt qf_floor(const QuadraticElement& x) {
    BigInt f(std::floor(x.to_double()));
    auto below = [&](const BigInt& n) { return qf_sign(x - QuadraticElement(Rational(n), 0, x.discriminant())) < 0; };
    while (below(f)) {
        f -= 1;
    }
    while (!below(f + 1)) {
        f += 1;
    }
    return f;
}

RealValue::RealValue(const QuadraticElement& q) {
    if (q.is_rational()) {
        v_ = q.a();
    } else {
        v_ = q;
    }
}

RealValue::RealValue(const Approx& a) {
    if (!(a.err >= 0.0) || !std::isfinite(a.value)) {
        throw std::invalid_argument("approximate value needs a finite value and err >= 0");
    }
    v_ = a;
}

long RealValue::field() const {
    if (is_rational()) {
        return 1;
    }
    if (is_quadratic()) {
        return quadratic().discriminant();
    }
    return 0;
}

std::optional<QuadraticElement> RealValue::in_field(long discriminant) const {
    if (is_rational()) {
        return QuadraticElement(rational(), 0, discriminant);
    }
    if (is_quadratic() && quadratic().discriminant() == discriminant) {
        return quadratic();
    }
    return std::nullopt;
}

double RealValue::to_double() const {
    if (is_rational()) {
        return rational().get_d();
    }
    if (is_quadratic()) {
        return quadratic().to_double();
    }
    return approx_value().value;
}

long double RealValue::to_long_double() const {
    if (is_rational()) {
        const Rational& r = rational();
        if (r.get_den() == 1 && r.get_num().fits_slong_p()) {
            return static_cast<long double>(r.get_num().get_si());
        }
        return static_cast<long double>(r.get_num().get_d()) / static_cast<long double>(r.get_den().get_d());
    }
    if (is_quadratic()) {
        return quadratic().to_long_double();
    }
    return approx_value().value;
}

Approx RealValue::as_approx() const {
    if (is_exact()) {
        return enclose(to_double());
    }
    return approx_value();
}

int RealValue::sign() const {
    if (is_rational()) {
        return sgn(rational());
    }
    if (is_quadratic()) {
        return qf_sign(quadratic());
    }
    const Approx& a = approx_value();
    if (a.value - a.err > 0) {
        return 1;
    }
    if (a.value + a.err < 0) {
        return -1;
    }
    throw NumericalFailure("sign of approximate value " + format_decimal(a.value) + " is not decidable");
}

BigInt RealValue::floor() const {
    if (is_rational()) {
        BigInt q;
        mpz_fdiv_q(q.get_mpz_t(), rational().get_num_mpz_t(), rational().get_den_mpz_t());
        return q;
    }
    if (is_quadratic()) {
        return qf_floor(quadratic());
    }
    return BigInt(std::floor(approx_value().value));
}

std::string RealValue::to_string() const { return format_symbolic(*this); }

RealValue RealValue::operator-() const {
    if (is_rational()) {
        return RealValue(Rational(-rational()));
    }
    if (is_quadratic()) {
        return RealValue(-quadratic());
    }
    return RealValue(Approx{-approx_value().value, approx_value().err});
}

namespace {

enum class Op { add, sub, mul, div };

RealValue combine(const RealValue& x, const RealValue& y, Op op) {
    if (x.is_rational() && y.is_rational()) {
        switch (op) {
        case Op::add:
            return RealValue(Rational(x.rational() + y.rational()));
        case Op::sub:
            return RealValue(Rational(x.rational() - y.rational()));
        case Op::mul:
            return RealValue(Rational(x.rational() * y.rational()));
        case Op::div:
            if (sgn(y.rational()) == 0) {
                throw DivisionByZero("division by zero");
            }
            return RealValue(Rational(x.rational() / y.rational()));
        }
    }
    if (x.is_exact() && y.is_exact()) {
        long d = x.is_quadratic() ? x.field() : y.field();
        auto qx = x.in_field(d);
        auto qy = y.in_field(d);
        if (qx && qy) {
            QfOp q = op == Op::add ? QfOp::add : op == Op::sub ? QfOp::sub : op == Op::mul ? QfOp::mul : QfOp::div;
            return RealValue(qf_arith(*qx, *qy, q));
        }
    }
    Approx ax = x.as_approx();
    Approx ay = y.as_approx();
    switch (op) {
    case Op::add:
        return RealValue(approx_add(ax, ay, 1.0));
    case Op::sub:
        return RealValue(approx_add(ax, ay, -1.0));
    case Op::mul:
        return RealValue(approx_mul(ax, ay));
    case Op::div:
        return RealValue(approx_div(ax, ay));
    }
    throw std::logic_error("unknown op");
}

} // namespace

RealValue operator+(const RealValue& x, const RealValue& y) { return combine(x, y, Op::add); }
RealValue operator-(const RealValue& x, const RealValue& y) { return combine(x, y, Op::sub); }
RealValue operator*(const RealValue& x, const RealValue& y) { return combine(x, y, Op::mul); }
RealValue operator/(const RealValue& x, const RealValue& y) { return combine(x, y, Op::div); }
RealValue operator*(long k, const RealValue& x) { return RealValue::integer(k) * x; }

bool operator==(const RealValue& x, const RealValue& y) {
    if (x.is_rational() && y.is_rational()) {
        return x.rational() == y.rational();
    }
    if (x.is_quadratic() && y.is_quadratic()) {
        return x.quadratic() == y.quadratic();
    }
    if (!x.is_exact() && !y.is_exact()) {
        return x.approx_value().value == y.approx_value().value && x.approx_value().err == y.approx_value().err;
    }
    return false;
}

Comparison real_compare(const RealValue& x, const RealValue& y, double tol) {
    if (tol < 0) {
        throw std::invalid_argument("tolerance must be >= 0");
    }
    RealValue diff = x - y;
    if (diff.is_exact()) {
        int s = diff.sign();
        return s < 0 ? Comparison::less : s > 0 ? Comparison::greater : Comparison::equal_within_tol;
    }
    const Approx& a = diff.approx_value();
    if (std::abs(a.value) + a.err <= tol) {
        return Comparison::equal_within_tol;
    }
    if (a.value - a.err > 0) {
        return Comparison::greater;
    }
    if (a.value + a.err < 0) {
        return Comparison::less;
    }
    return Comparison::undecidable;
}

const char* to_string(Comparison c) {
    switch (c) {
    case Comparison::less:
        return "less";
    case Comparison::equal_within_tol:
        return "equal_within_tol";
    case Comparison::greater:
        return "greater";
    case Comparison::undecidable:
        return "undecidable";
    }
    return "?";
}

namespace {

// Sign of x - y from the float images when they are far enough apart; exact
// values convert with relative error near 1e-15.
std::optional<int> float_separated(const RealValue& x, const RealValue& y) {
    if (!x.is_exact() || !y.is_exact()) {
        return std::nullopt;
    }
    const double a = x.to_double(), b = y.to_double();
    if (!std::isfinite(a) || !std::isfinite(b)) {
        return std::nullopt;
    }
    if (std::abs(a - b) > 1e-12 * (std::abs(a) + std::abs(b)) + 1e-300) {
        return a < b ? -1 : 1;
    }
    return std::nullopt;
}

} // namespace

bool exact_less(const RealValue& x, const RealValue& y) {
    if (auto f = float_separated(x, y)) {
        return *f < 0;
    }
    Comparison c = real_compare(x, y, 0.0);
    if (c == Comparison::undecidable) {
        return x.to_double() < y.to_double();
    }
    return c == Comparison::less;
}

int exact_compare(const RealValue& x, const RealValue& y) {
    if (auto f = float_separated(x, y)) {
        return *f;
    }
    switch (real_compare(x, y, 0.0)) {
    case Comparison::less:
        return -1;
    case Comparison::greater:
        return 1;
    case Comparison::equal_within_tol:
        return 0;
    case Comparison::undecidable:
        break;
    }
    double d = x.to_double() - y.to_double();
    return (d > 0) - (d < 0);
}

std::string format_rational(const Rational& r) { return r.get_str(); }

std::string format_decimal(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string format_symbolic(const RealValue& v) {
    if (v.is_rational()) {
        return format_rational(v.rational());
    }
    if (!v.is_quadratic()) {
        return "~" + format_decimal(v.approx_value().value);
    }
    const QuadraticElement& q = v.quadratic();
    BigInt den;
    mpz_lcm(den.get_mpz_t(), q.a().get_den_mpz_t(), q.b().get_den_mpz_t());
    BigInt an = q.a().get_num() * (den / q.a().get_den());
    BigInt bn = q.b().get_num() * (den / q.b().get_den());
    std::string root = "sqrt(" + std::to_string(q.discriminant()) + ")";
    BigInt babs = abs(bn);
    std::string bterm = babs == 1 ? root : babs.get_str() + "*" + root;
    std::string num;
    bool compound = false;
    if (an == 0) {
        num = (bn < 0 ? "-" : "") + bterm;
    } else {
        num = an.get_str() + (bn < 0 ? "-" : "+") + bterm;
        compound = true;
    }
    if (den == 1) {
        return num;
    }
    return (compound ? "(" + num + ")" : num) + "/" + den.get_str();
}

Rational poly_eval(const Polynomial& p, const Rational& x) {
    Rational acc(0);
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

long double poly_eval(const Polynomial& p, long double x) {
    long double acc = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        acc = acc * x + static_cast<long double>(it->get_d());
    }
    return acc;
}

std::complex<long double> poly_eval(const Polynomial& p, std::complex<long double> z) {
    std::complex<long double> acc = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        acc = acc * z + static_cast<long double>(it->get_d());
    }
    return acc;
}

Polynomial poly_derivative(const Polynomial& p) {
    Polynomial d;
    for (std::size_t i = 1; i < p.size(); ++i) {
        d.push_back(p[i] * static_cast<long>(i));
    }
    return d;
}

Polynomial poly_divide(const Polynomial& p, const Polynomial& d, Polynomial& rem) {
    if (d.empty() || sgn(d.back()) == 0) {
        throw DivisionByZero("polynomial division by zero polynomial");
    }
    rem = p;
    if (p.size() < d.size()) {
        return {};
    }
    Polynomial q(p.size() - d.size() + 1, Rational(0));
    for (std::size_t i = q.size(); i-- > 0;) {
        Rational c = rem[i + d.size() - 1] / d.back();
        q[i] = c;
        for (std::size_t j = 0; j < d.size(); ++j) {
            rem[i + j] -= c * d[j];
        }
    }
    rem.resize(d.size() - 1);
    while (!rem.empty() && sgn(rem.back()) == 0) {
        rem.pop_back();
    }
    return q;
}

std::string format_polynomial(const Polynomial& p) {
    std::string out;
    for (std::size_t i = p.size(); i-- > 0;) {
        const Rational& c = p[i];
        if (sgn(c) == 0) {
            continue;
        }
        Rational ac = abs(c);
        if (!out.empty()) {
            out += sgn(c) < 0 ? "-" : "+";
        } else if (sgn(c) < 0) {
            out += "-";
        }
        bool unit = ac == 1 && i > 0;
        if (!unit) {
            out += format_rational(ac);
            if (i > 0) {
                out += "*";
            }
        }
        if (i == 1) {
            out += "x";
        } else if (i > 1) {
            out += "x^" + std::to_string(i);
        }
    }
    return out.empty() ? "0" : out;
}

Approx polish_real_root(const Polynomial& p, double lo, double hi, double max_err) {
    auto sign_at = [&](double x) { return sgn(poly_eval(p, to_rational(x))); };
    int slo = sign_at(lo);
    int shi = sign_at(hi);
    if (slo == 0) {
        return {lo, 0.0};
    }
    if (shi == 0) {
        return {hi, 0.0};
    }
    if (slo == shi) {
        throw NumericalFailure("no sign change of " + format_polynomial(p) + " on [" + format_decimal(lo) + ", " +
                               format_decimal(hi) + "]");
    }
    // Coarse bisection, then Newton.
    for (int i = 0; i < 200 && hi - lo > 1e-6 * std::max(1.0, std::abs(lo)); ++i) {
        double mid = 0.5 * (lo + hi);
        int s = sign_at(mid);
        if (s == 0) {
            return {mid, 0.0};
        }
        (s == slo ? lo : hi) = mid;
    }
    Polynomial dp = poly_derivative(p);
    long double x = 0.5L * (static_cast<long double>(lo) + hi);
    for (int i = 0; i < 60; ++i) {
        long double f = poly_eval(p, x);
        long double df = poly_eval(dp, x);
        if (df == 0) {
            break;
        }
        long double nx = x - f / df;
        if (!(nx >= lo && nx <= hi)) {
            break;
        }
        if (std::abs(nx - x) <= 1e-19L * std::max<long double>(1, std::abs(x))) {
            x = nx;
            break;
        }
        x = nx;
    }
    double c = static_cast<double>(x);
    if (sign_at(c) == 0) {
        return {c, 0.0};
    }
    // Certify a bracket around c with exact signs.
    double delta = std::max(std::abs(c), 1.0) * kRound;
    while (delta <= max_err) {
        int sl = sign_at(c - delta);
        int sr = sign_at(c + delta);
        if (sl != sr) {
            return {c, delta};
        }
        delta *= 2;
    }
    // Newton drifted; finish by plain bisection.
    while (hi - lo > max_err) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        int s = sign_at(mid);
        if (s == 0) {
            return {mid, 0.0};
        }
        (s == slo ? lo : hi) = mid;
    }
    double err = 0.5 * (hi - lo);
    if (err > max_err) {
        throw NumericalFailure("root of " + format_polynomial(p) + " could not be isolated to " + format_decimal(max_err));
    }
    return {0.5 * (lo + hi), err};
}

std::complex<double> polish_complex_root(const Polynomial& p, std::complex<double> start) {
    Polynomial dp = poly_derivative(p);
    std::complex<long double> z(start.real(), start.imag());
    for (int i = 0; i < 100; ++i) {
        auto f = poly_eval(p, z);
        auto df = poly_eval(dp, z);
        if (std::abs(df) == 0) {
            break;
        }
        auto step = f / df;
        z -= step;
        if (std::abs(step) <= 1e-19L * std::max<long double>(1, std::abs(z))) {
            break;
        }
    }
    return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

} // namespace aperiodic
