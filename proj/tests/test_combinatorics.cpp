#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "latmscale/combinatorics.hpp"

#include <vector>

using latms::BigInt;
using latms::Rational;
namespace ex = latms::exact;

namespace {

// Truncated power series over Rational, enough rope for the generating
// function oracles below.
struct Poly {
    std::vector<Rational> c;  // c[i] is the x^i coefficient

    static Poly x(int max_deg) {
        Poly p;
        p.c.assign(max_deg + 1, Rational(0));
        if (max_deg >= 1) p.c[1] = 1;
        return p;
    }
    static Poly constant(Rational v, int max_deg) {
        Poly p;
        p.c.assign(max_deg + 1, Rational(0));
        p.c[0] = std::move(v);
        return p;
    }
    Poly mul(const Poly& o) const {
        Poly r;
        r.c.assign(c.size(), Rational(0));
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; i + j < c.size() && j < o.c.size(); ++j)
                r.c[i + j] += c[i] * o.c[j];
        return r;
    }
    Poly pow(int e) const {
        Poly r = constant(1, static_cast<int>(c.size()) - 1);
        for (int i = 0; i < e; ++i) r = r.mul(*this);
        return r;
    }
};

// log(1+x) and e^x - 1 as truncated series.
Poly log1p_series(int max_deg) {
    Poly p;
    p.c.assign(max_deg + 1, Rational(0));
    for (int i = 1; i <= max_deg; ++i) p.c[i] = Rational((i % 2 == 1) ? 1 : -1, i);
    return p;
}
Poly expm1_series(int max_deg) {
    Poly p;
    p.c.assign(max_deg + 1, Rational(0));
    for (int i = 1; i <= max_deg; ++i) p.c[i] = Rational(BigInt(1), latms::factorial(i));
    return p;
}

BigInt double_factorial(int n) {
    BigInt r = 1;
    for (int k = n; k >= 2; k -= 2) r *= k;
    return r;
}

}  // namespace

TEST_CASE("stirling numbers of the first kind") {
    CHECK(ex::stirling_first(0, 0) == 1);
    CHECK(ex::stirling_first(4, 2) == 11);
    CHECK(ex::stirling_first(3, 5) == 0);
    CHECK(ex::stirling_first(5, 1) == 24);  // (-1)^{5-1} (5-1)!
    CHECK(ex::stirling_first(6, 6) == 1);

    SUBCASE("generating identity [ln(1+x)]^k = k! sum s(i,k)/i! x^i") {
        const int max_deg = 8;
        for (int k = 0; k <= 5; ++k) {
            Poly gen = log1p_series(max_deg).pow(k);
            for (int i = 0; i <= max_deg; ++i) {
                Rational expected = Rational(latms::factorial(k) * ex::stirling_first(i, k),
                                             latms::factorial(i));
                CHECK(gen.c[i] == expected);
            }
        }
    }
}

TEST_CASE("stirling numbers of the second kind") {
    CHECK(ex::stirling_second(0, 0) == 1);
    CHECK(ex::stirling_second(4, 2) == 7);
    CHECK(ex::stirling_second(2, 4) == 0);
    CHECK(ex::stirling_second(5, 3) == 25);

    SUBCASE("generating identity (e^x-1)^j = j! sum S(k,j)/k! x^k") {
        const int max_deg = 8;
        for (int j = 0; j <= 5; ++j) {
            Poly gen = expm1_series(max_deg).pow(j);
            for (int k = 0; k <= max_deg; ++k) {
                Rational expected = Rational(latms::factorial(j) * ex::stirling_second(k, j),
                                             latms::factorial(k));
                CHECK(gen.c[k] == expected);
            }
        }
    }
}

TEST_CASE("orthogonality and sign pattern") {
    for (int i = 0; i <= 12; ++i)
        for (int j = 0; j <= i; ++j) {
            BigInt sum = 0;
            for (int k = j; k <= i; ++k) sum += ex::stirling_first(i, k) * ex::stirling_second(k, j);
            CHECK(sum == (i == j ? 1 : 0));
        }
    for (int i = 0; i <= 10; ++i)
        for (int k = 0; k <= i; ++k) {
            const BigInt s = ex::stirling_first(i, k);
            if (s != 0) CHECK((s > 0) == ((i - k) % 2 == 0));
            CHECK(ex::stirling_second(i, k) >= 0);
        }
}

TEST_CASE("legendre values at zero") {
    CHECK(ex::legendre_at_zero(0) == 1);
    CHECK(ex::legendre_at_zero(1) == 0);
    CHECK(ex::legendre_at_zero(2) == Rational(-1, 2));
    for (int m = 0; m <= 10; ++m) CHECK(ex::legendre_at_zero(2 * m + 1) == 0);
    // |P_{2m}(0)| = (2m-1)!!/(2m)!!, sign (-1)^m
    for (int m = 1; m <= 10; ++m) {
        Rational expected(double_factorial(2 * m - 1), double_factorial(2 * m));
        if (m % 2 == 1) expected = -expected;
        CHECK(ex::legendre_at_zero(2 * m) == expected);
    }
}

TEST_CASE("lattice-change coefficients") {
    const Rational w(1, 2);

    SUBCASE("diagonal is omega^j") {
        for (int j = 0; j <= 8; ++j) CHECK(ex::lattice_coeff_P(j, j, w) == latms::rational_pow(w, j));
    }
    SUBCASE("omega = 1 gives the Kronecker delta") {
        for (int i = 0; i <= 10; ++i)
            for (int j = 0; j <= i; ++j)
                CHECK(ex::lattice_coeff_P(i, j, Rational(1)) == (i == j ? 1 : 0));
    }
    SUBCASE("j > i vanishes") { CHECK(ex::lattice_coeff_P(2, 5, w) == 0); }
    SUBCASE("term-by-term oracle at (3,1,1/2)") {
        Rational direct = 0;
        for (int k = 1; k <= 3; ++k)
            direct += latms::rational_pow(w, k) *
                      Rational(ex::stirling_first(3, k) * ex::stirling_second(k, 1));
        CHECK(ex::lattice_coeff_P(3, 1, w) == direct);
        // and once more, fully spelled out: s(3,1)=2, s(3,2)=-3, s(3,3)=1; S(k,1)=1
        CHECK(direct == Rational(2, 2) - Rational(3, 4) + Rational(1, 8));
    }
    SUBCASE("Q duality") {
        for (int i = 0; i <= 8; ++i)
            for (int j = 0; j <= i; ++j)
                CHECK(ex::lattice_coeff_Q(i, j, w) ==
                      ex::lattice_coeff_P(i, j, Rational(1) / w));
        CHECK(ex::lattice_coeff_Q(3, 3, w) == latms::rational_pow(Rational(2), 3));
        CHECK_THROWS_AS(ex::lattice_coeff_Q(2, 1, Rational(0)), std::domain_error);
    }
}
