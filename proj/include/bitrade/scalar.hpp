#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

namespace bitrade {

using Rational = boost::multiprecision::cpp_rational;

struct BitradeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProbabilityMassError : BitradeError { using BitradeError::BitradeError; };
struct NegativeValueError : BitradeError { using BitradeError::BitradeError; };
struct OutOfSupportError : BitradeError { using BitradeError::BitradeError; };
struct DegenerateGridError : BitradeError { using BitradeError::BitradeError; };
struct ParameterError : BitradeError { using BitradeError::BitradeError; };
struct OrderingError : BitradeError { using BitradeError::BitradeError; };
struct FamilyError : BitradeError { using BitradeError::BitradeError; };
struct SupportMismatchError : BitradeError { using BitradeError::BitradeError; };
struct ScaleError : BitradeError { using BitradeError::BitradeError; };
struct TooFewTradesError : BitradeError { using BitradeError::BitradeError; };
struct UnknownTargetError : BitradeError { using BitradeError::BitradeError; };

/// Default comparison tolerance for approx-mode scalars.
inline constexpr double kDefaultTolerance = 1e-9;

/// A numeric value that is either an exact rational or a tagged float64.
///
/// Exact scalars support closed +,-,*,/ with no rounding; mixing an exact
/// scalar with an approx one demotes the result to approx. Equality on
/// approx scalars is tolerance-based; the ordering operators compare raw
/// values so that sorting stays a strict weak order.
class Scalar {
public:
    Scalar() : value_(Rational(0)) {}
    Scalar(int v) : value_(Rational(v)) {}
    Scalar(long v) : value_(Rational(v)) {}
    Scalar(long long v) : value_(Rational(v)) {}
    Scalar(const Rational& r) : value_(r) {}
    Scalar(Rational&& r) : value_(std::move(r)) {}

    static Scalar approx(double v, double tol = kDefaultTolerance) {
        if (!(tol > 0)) throw ParameterError("approx tolerance must be positive");
        Scalar s;
        s.value_ = v;
        s.tol_ = tol;
        return s;
    }

    static Scalar ratio(long long num, long long den) {
        if (den == 0) throw ParameterError("zero denominator");
        return Scalar(Rational(num, den));
    }

    bool is_exact() const { return std::holds_alternative<Rational>(value_); }

    const Rational& rat() const {
        if (!is_exact()) throw ParameterError("approx scalar has no exact rational value");
        return std::get<Rational>(value_);
    }

    double as_double() const {
        if (is_exact()) return static_cast<double>(std::get<Rational>(value_));
        return std::get<double>(value_);
    }

    double tolerance() const { return tol_; }

    Scalar operator-() const {
        if (is_exact()) return Scalar(Rational(-rat()));
        return approx(-as_double(), tol_);
    }

    friend Scalar operator+(const Scalar& a, const Scalar& b) { return combine(a, b, std::plus<>{}); }
    friend Scalar operator-(const Scalar& a, const Scalar& b) { return combine(a, b, std::minus<>{}); }
    friend Scalar operator*(const Scalar& a, const Scalar& b) { return combine(a, b, std::multiplies<>{}); }

    friend Scalar operator/(const Scalar& a, const Scalar& b) {
        if (a.is_exact() && b.is_exact()) {
            if (b.rat() == 0) throw ParameterError("division by zero");
            return Scalar(Rational(a.rat() / b.rat()));
        }
        return approx(a.as_double() / b.as_double(), std::max(a.tol_, b.tol_));
    }

    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
    Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
    Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
    Scalar& operator/=(const Scalar& o) { return *this = *this / o; }

    /// Tolerance-aware equality: exact when both sides are exact.
    friend bool operator==(const Scalar& a, const Scalar& b) {
        if (a.is_exact() && b.is_exact()) return a.rat() == b.rat();
        return std::abs(a.as_double() - b.as_double()) <= std::max(a.tol_, b.tol_);
    }
    friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

    // Raw-value ordering (no tolerance), usable as a strict weak order.
    friend bool operator<(const Scalar& a, const Scalar& b) {
        if (a.is_exact() && b.is_exact()) return a.rat() < b.rat();
        return a.as_double() < b.as_double();
    }
    friend bool operator>(const Scalar& a, const Scalar& b) { return b < a; }
    friend bool operator<=(const Scalar& a, const Scalar& b) { return !(b < a); }
    friend bool operator>=(const Scalar& a, const Scalar& b) { return !(a < b); }

    bool is_zero() const { return is_exact() ? rat() == 0 : std::abs(as_double()) <= tol_; }

    /// Demote to approx mode (identity on approx scalars).
    Scalar to_approx(double tol = kDefaultTolerance) const {
        return is_exact() ? approx(as_double(), tol) : *this;
    }

    /// "num/den" for exact values, shortest-roundtrip decimal for approx.
    std::string str() const {
        if (is_exact()) {
            const Rational& r = rat();
            return boost::multiprecision::numerator(r).str() + "/" +
                   boost::multiprecision::denominator(r).str();
        }
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", as_double());
        return buf;
    }

    /// Parses "num/den" or a plain integer string into an exact scalar.
    static Scalar parse_exact(const std::string& text) {
        auto slash = text.find('/');
        try {
            if (slash == std::string::npos) {
                return Scalar(Rational(boost::multiprecision::cpp_int(text)));
            }
            boost::multiprecision::cpp_int num(text.substr(0, slash));
            boost::multiprecision::cpp_int den(text.substr(slash + 1));
            if (den == 0) throw ParameterError("zero denominator in '" + text + "'");
            return Scalar(Rational(num, den));
        } catch (const std::exception&) {
            throw ParameterError("cannot parse rational '" + text + "'");
        }
    }

private:
    template <class Op>
    static Scalar combine(const Scalar& a, const Scalar& b, Op op) {
        if (a.is_exact() && b.is_exact()) return Scalar(Rational(op(a.rat(), b.rat())));
        return approx(op(a.as_double(), b.as_double()), std::max(a.tol_, b.tol_));
    }

    std::variant<Rational, double> value_;
    double tol_ = kDefaultTolerance;
};

/// Exact n-th harmonic number H_n = 1 + 1/2 + ... + 1/n.
inline Rational harmonic(int n) {
    Rational h = 0;
    for (int i = 1; i <= n; ++i) h += Rational(1, i);
    return h;
}

/// 2^n as an exact rational (n may be negative).
inline Rational pow2(int n) {
    Rational r = 1;
    for (int i = 0; i < std::abs(n); ++i) r *= 2;
    return n >= 0 ? r : Rational(1) / r;
}

}  // namespace bitrade
