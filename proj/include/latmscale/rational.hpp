#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

namespace latms {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& x) { return static_cast<double>(x); }

inline Rational rational_pow(const Rational& base, int e) {
    if (e == 0) return Rational(1);
    if (e < 0) {
        if (base == 0) throw std::domain_error("rational_pow: 0 to negative power");
        return Rational(1) / rational_pow(base, -e);
    }
    Rational acc(1), b = base;
    int n = e;
    while (n > 0) {
        if (n & 1) acc *= b;
        b *= b;
        n >>= 1;
    }
    return acc;
}

inline BigInt factorial(int n) {
    BigInt f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Complex number with exact rational real and imaginary parts. Used for
/// operator-series coefficients so that the printed expansions can be
/// matched bit-exactly before anything floating-point enters.
struct CRational {
    Rational re{0};
    Rational im{0};

    CRational() = default;
    CRational(Rational r) : re(std::move(r)) {}
    CRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    CRational(int r) : re(r) {}
    CRational(int num, int den) : re(Rational(num, den)) {}

    static CRational i() { return CRational(Rational(0), Rational(1)); }

    bool is_zero() const { return re == 0 && im == 0; }

    CRational operator-() const { return {-re, -im}; }
    CRational& operator+=(const CRational& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    CRational& operator-=(const CRational& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    CRational& operator*=(const CRational& o) {
        Rational r = re * o.re - im * o.im;
        Rational i = re * o.im + im * o.re;
        re = std::move(r);
        im = std::move(i);
        return *this;
    }
    CRational& operator/=(const CRational& o) {
        Rational d = o.re * o.re + o.im * o.im;
        if (d == 0) throw std::domain_error("CRational: division by zero");
        Rational r = (re * o.re + im * o.im) / d;
        Rational i = (im * o.re - re * o.im) / d;
        re = std::move(r);
        im = std::move(i);
        return *this;
    }

    friend CRational operator+(CRational a, const CRational& b) { return a += b; }
    friend CRational operator-(CRational a, const CRational& b) { return a -= b; }
    friend CRational operator*(CRational a, const CRational& b) { return a *= b; }
    friend CRational operator/(CRational a, const CRational& b) { return a /= b; }
    friend bool operator==(const CRational& a, const CRational& b) {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const CRational& a, const CRational& b) { return !(a == b); }

    std::complex<double> to_complex() const { return {to_double(re), to_double(im)}; }

    std::string str() const {
        std::ostringstream os;
        if (im == 0) {
            os << re;
        } else if (re == 0) {
            os << im << "*i";
        } else {
            os << "(" << re << (im > 0 ? "+" : "") << im << "*i)";
        }
        return os.str();
    }
};

namespace detail {

template <class K>
struct scalar_traits;

template <>
struct scalar_traits<CRational> {
    static CRational from_rational(const Rational& r) { return CRational(r); }
    static bool is_zero(const CRational& x) { return x.is_zero(); }
    static std::complex<double> to_complex(const CRational& x) { return x.to_complex(); }
};

template <>
struct scalar_traits<std::complex<double>> {
    static std::complex<double> from_rational(const Rational& r) { return {to_double(r), 0.0}; }
    static bool is_zero(const std::complex<double>& x) { return x == std::complex<double>{}; }
    static std::complex<double> to_complex(const std::complex<double>& x) { return x; }
};

}  // namespace detail

}  // namespace latms
