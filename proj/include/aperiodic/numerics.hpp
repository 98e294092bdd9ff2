#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <gmpxx.h>

#include "aperiodic/errors.hpp"

namespace aperiodic {

using BigInt = mpz_class;
using Rational = mpq_class;

inline constexpr double kDefaultTol = 1e-9;

// a + b*sqrt(D) with D square-free and D >= 2.
class QuadraticElement {
public:
    QuadraticElement(Rational a, Rational b, long discriminant);

    static QuadraticElement sqrt_of(long discriminant) { return {Rational(0), Rational(1), discriminant}; }

    const Rational& a() const { return a_; }
    const Rational& b() const { return b_; }
    long discriminant() const { return d_; }

    bool is_rational() const { return sgn(b_) == 0; }
    QuadraticElement conjugate() const { return {a_, -b_, d_}; }
    // a^2 - b^2 D
    Rational norm() const;
    double to_double() const;
    long double to_long_double() const;

    QuadraticElement operator-() const { return {-a_, -b_, d_}; }

    friend bool operator==(const QuadraticElement& x, const QuadraticElement& y) {
        return x.d_ == y.d_ && x.a_ == y.a_ && x.b_ == y.b_;
    }

private:
    Rational a_;
    Rational b_;
    long d_;
};

enum class QfOp { add, sub, mul, div };

QuadraticElement qf_arith(const QuadraticElement& lhs, const QuadraticElement& rhs, QfOp op);
int qf_sign(const QuadraticElement& x);
BigInt qf_floor(const QuadraticElement& x);

inline QuadraticElement operator+(const QuadraticElement& x, const QuadraticElement& y) { return qf_arith(x, y, QfOp::add); }
inline QuadraticElement operator-(const QuadraticElement& x, const QuadraticElement& y) { return qf_arith(x, y, QfOp::sub); }
inline QuadraticElement operator*(const QuadraticElement& x, const QuadraticElement& y) { return qf_arith(x, y, QfOp::mul); }
inline QuadraticElement operator/(const QuadraticElement& x, const QuadraticElement& y) { return qf_arith(x, y, QfOp::div); }

// Largest square-free part: n = k^2 * s, returns (k, s).
std::pair<long, long> square_free_split(long n);

struct Approx {
    double value = 0.0;
    double err = 0.0;
};

// Exact rational, exact quadratic, or a float carrying an absolute error bound.
class RealValue {
public:
    RealValue() : v_(Rational(0)) {}
    RealValue(const Rational& r) : v_(r) {}
    RealValue(const QuadraticElement& q);
    RealValue(const Approx& a);

    static RealValue integer(long n) { return RealValue(Rational(n)); }
    static RealValue approx(double value, double err) { return RealValue(Approx{value, err}); }

    bool is_exact() const { return !std::holds_alternative<Approx>(v_); }
    bool is_rational() const { return std::holds_alternative<Rational>(v_); }
    bool is_quadratic() const { return std::holds_alternative<QuadraticElement>(v_); }

    const Rational& rational() const { return std::get<Rational>(v_); }
    const QuadraticElement& quadratic() const { return std::get<QuadraticElement>(v_); }
    const Approx& approx_value() const { return std::get<Approx>(v_); }

    // Discriminant of the field the value lives in, 1 for rationals, 0 for approx.
    long field() const;
    // Lift into Q(sqrt(D)); empty when the value is approx or lives in another field.
    std::optional<QuadraticElement> in_field(long discriminant) const;

    double to_double() const;
    long double to_long_double() const;
    // Float value with a rigorous bound on |true - value|.
    Approx as_approx() const;
    // Exact sign; throws NumericalFailure for approx values whose interval contains 0.
    int sign() const;
    bool is_zero() const { return is_exact() && sign() == 0; }
    // floor for exact values; for approx values floor of the float.
    BigInt floor() const;

    std::string to_string() const;

    RealValue operator-() const;
    friend RealValue operator+(const RealValue& x, const RealValue& y);
    friend RealValue operator-(const RealValue& x, const RealValue& y);
    friend RealValue operator*(const RealValue& x, const RealValue& y);
    friend RealValue operator/(const RealValue& x, const RealValue& y);
    RealValue& operator+=(const RealValue& y) { return *this = *this + y; }
    RealValue& operator-=(const RealValue& y) { return *this = *this - y; }
    RealValue& operator*=(const RealValue& y) { return *this = *this * y; }

    // Structural equality of exact values (approx values compare by value and err).
    friend bool operator==(const RealValue& x, const RealValue& y);

private:
    std::variant<Rational, QuadraticElement, Approx> v_;
};

RealValue operator*(long k, const RealValue& x);

enum class Comparison { less, equal_within_tol, greater, undecidable };

Comparison real_compare(const RealValue& x, const RealValue& y, double tol = kDefaultTol);
const char* to_string(Comparison c);

// Smallest and largest of two values under exact comparison (approx: by float).
bool exact_less(const RealValue& x, const RealValue& y);
// -1, 0 or 1; same fallback as exact_less.
int exact_compare(const RealValue& x, const RealValue& y);

// Symbolic rendering: "(1+sqrt(5))/2", "2/3", "~2.205569430401" for approx.
std::string format_symbolic(const RealValue& v);
// 12 significant digits.
std::string format_decimal(double v);
std::string format_rational(const Rational& r);

// Parses "(1+sqrt(5))/2", "3/2", "-1/2+sqrt(5)/2", "tau", "1e6", "0.25".
RealValue parse_real(std::string_view text);

// Polynomials with rational coefficients, c[i] is the coefficient of x^i.
using Polynomial = std::vector<Rational>;

Rational poly_eval(const Polynomial& p, const Rational& x);
long double poly_eval(const Polynomial& p, long double x);
std::complex<long double> poly_eval(const Polynomial& p, std::complex<long double> z);
Polynomial poly_derivative(const Polynomial& p);
// Quotient of p by monic divisor d; remainder written to rem.
Polynomial poly_divide(const Polynomial& p, const Polynomial& d, Polynomial& rem);
std::string format_polynomial(const Polynomial& p);

// Real root of p inside [lo, hi] (sign change required), polished by Newton steps
// and bracketed with exact sign evaluations so that the returned err is rigorous.
Approx polish_real_root(const Polynomial& p, double lo, double hi, double max_err = 1e-12);

// All complex roots of p, polished by Newton steps from companion-matrix style
// starting values supplied by the caller.
std::complex<double> polish_complex_root(const Polynomial& p, std::complex<double> start);

} // namespace aperiodic
