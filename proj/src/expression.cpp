#include <cctype>
#include <string>

#include "aperiodic/numerics.hpp"

namespace aperiodic {

namespace {

class ExprParser {
public:
    explicit ExprParser(std::string_view text) : s_(text) {}

    RealValue parse() {
        skip();
        if (pos_ >= s_.size()) {
            fail("empty expression");
        }
        RealValue v = expr();
        skip();
        if (pos_ != s_.size()) {
            fail(std::string("unexpected '") + s_[pos_] + "'");
        }
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, 1, static_cast<int>(pos_) + 1); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    RealValue expr() {
        RealValue v = term();
        for (;;) {
            if (accept('+')) {
                v = v + term();
            } else if (accept('-')) {
                v = v - term();
            } else {
                return v;
            }
        }
    }

    RealValue term() {
        RealValue v = unary();
        for (;;) {
            if (accept('*')) {
                v = v * unary();
            } else if (accept('/')) {
                std::size_t at = pos_;
                RealValue d = unary();
                if (d.is_zero()) {
                    pos_ = at;
                    fail("division by zero");
                }
                v = v / d;
            } else {
                return v;
            }
        }
    }

    RealValue unary() {
        if (accept('-')) {
            return -unary();
        }
        if (accept('+')) {
            return unary();
        }
        return primary();
    }

    RealValue primary() {
        skip();
        if (pos_ >= s_.size()) {
            fail("unexpected end of expression");
        }
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            RealValue v = expr();
            if (!accept(')')) {
                fail("expected ')'");
            }
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return number();
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
            }
            std::string name(s_.substr(start, pos_ - start));
            if (name == "tau") {
                return RealValue(QuadraticElement(Rational(1, 2), Rational(1, 2), 5));
            }
            if (name == "sqrt") {
                if (!accept('(')) {
                    fail("expected '(' after sqrt");
                }
                std::size_t at = pos_;
                RealValue arg = expr();
                if (!accept(')')) {
                    fail("expected ')'");
                }
                if (!arg.is_rational() || sgn(arg.rational()) < 0) {
                    pos_ = at;
                    fail("sqrt needs a nonnegative rational argument");
                }
                return rational_sqrt(arg.rational(), at);
            }
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected '") + c + "'");
    }

    RealValue rational_sqrt(const Rational& r, std::size_t at) {
        if (sgn(r) == 0) {
            return RealValue(Rational(0));
        }
        // sqrt(p/q) = sqrt(p*q)/q
        BigInt pq = r.get_num() * r.get_den();
        if (!pq.fits_slong_p()) {
            pos_ = at;
            fail("sqrt argument too large");
        }
        auto [k, s] = square_free_split(pq.get_si());
        Rational coeff(BigInt(k), r.get_den());
        coeff.canonicalize();
        if (s == 1) {
            return RealValue(coeff);
        }
        return RealValue(QuadraticElement(Rational(0), coeff, s));
    }

    RealValue number() {
        std::size_t start = pos_;
        std::string digits;
        long frac_digits = 0;
        bool dot = false;
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                digits += c;
                if (dot) {
                    ++frac_digits;
                }
            } else if (c == '.' && !dot) {
                dot = true;
            } else {
                break;
            }
            ++pos_;
        }
        if (digits.empty()) {
            pos_ = start;
            fail("malformed number");
        }
        long exponent = 0;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_++;
            bool neg = false;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
                neg = s_[pos_] == '-';
                ++pos_;
            }
            std::string ed;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                ed += s_[pos_++];
            }
            if (ed.empty() || ed.size() > 4) {
                pos_ = save;
                fail("malformed exponent");
            }
            exponent = std::stol(ed) * (neg ? -1 : 1);
        }
        long shift = exponent - frac_digits;
        BigInt mant(digits, 10);
        BigInt ten;
        mpz_ui_pow_ui(ten.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
        Rational v = shift >= 0 ? Rational(mant * ten) : Rational(mant, ten);
        v.canonicalize();
        return RealValue(v);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace

RealValue parse_real(std::string_view text) { return ExprParser(text).parse(); }

} // namespace aperiodic
