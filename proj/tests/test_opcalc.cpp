#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "latmscale/grid.hpp"
#include "latmscale/opcalc.hpp"

#include <complex>
#include <numbers>
#include <random>

using namespace latms;
using namespace latms::ops;
using Cplx = std::complex<double>;

namespace {

CRational cr(int num, int den = 1) { return CRational(Rational(num, den)); }

using XSeries = OperatorSeries<CRational>;
using XGrid = GridFunction<CRational>;

XGrid poly_grid(const std::string& axis, int size, const std::vector<Rational>& coeffs) {
    // p(x) = sum coeffs[d] x^d sampled on 0..size-1
    return XGrid::from_function({{axis, size}}, [&](const std::vector<int>& idx) {
        Rational x(idx[0]);
        Rational acc(0), xp(1);
        for (const auto& c : coeffs) {
            acc += c * xp;
            xp *= x;
        }
        return CRational(acc);
    }, Boundary::Clamped);
}

std::vector<Rational> poly_derivative(const std::vector<Rational>& coeffs) {
    std::vector<Rational> d;
    for (std::size_t k = 1; k < coeffs.size(); ++k) d.push_back(coeffs[k] * Rational(k));
    if (d.empty()) d.push_back(Rational(0));
    return d;
}

Rational poly_eval(const std::vector<Rational>& coeffs, int x) {
    Rational acc(0), xp(1);
    for (const auto& c : coeffs) {
        acc += c * xp;
        xp *= Rational(x);
    }
    return acc;
}

}  // namespace

TEST_CASE("delta series printed forms") {
    SUBCASE("forward, ell = 2: D - D^2/2") {
        auto s = delta_series<CRational>("n", DiffVariant::Forward, 2);
        CHECK(s.coeff(mono().with_delta("n", DiffVariant::Forward, 1)) == cr(1));
        CHECK(s.coeff(mono().with_delta("n", DiffVariant::Forward, 2)) == cr(-1, 2));
        CHECK(s.size() == 2);
    }
    SUBCASE("backward, ell = 2: D- + (D-)^2/2") {
        auto s = delta_series<CRational>("n", DiffVariant::Backward, 2);
        CHECK(s.coeff(mono().with_delta("n", DiffVariant::Backward, 1)) == cr(1));
        CHECK(s.coeff(mono().with_delta("n", DiffVariant::Backward, 2)) == cr(1, 2));
    }
    SUBCASE("symmetric, ell = 3: Ds - (Ds)^3/6") {
        auto s = delta_series<CRational>("n", DiffVariant::Symmetric, 3);
        CHECK(s.coeff(mono().with_delta("n", DiffVariant::Symmetric, 1)) == cr(1));
        CHECK(s.coeff(mono().with_delta("n", DiffVariant::Symmetric, 2)) == cr(0));
        CHECK(s.coeff(mono().with_delta("n", DiffVariant::Symmetric, 3)) == cr(-1, 6));
        CHECK(s.size() == 2);
    }
    SUBCASE("ell = 0 degenerates to the zero series") {
        auto s = delta_series<CRational>("n", DiffVariant::Forward, 0);
        CHECK(s.empty());
    }
}

TEST_CASE("partial-shift exponential") {
    SUBCASE("M = 0 is the identity") {
        auto s = exp_scaled_delta<CRational>("n1", cr(0), 1, 3, 3);
        CHECK(s.size() == 1);
        CHECK(s.coeff(mono()) == cr(1));
    }
    SUBCASE("level-1 expansion carries M^i/i! through 1/N^3") {
        auto s = exp_scaled_delta<CRational>("n1", cr(2), 1, 3, 3);
        CHECK(s.coeff(mono()) == cr(1));
        CHECK(s.coeff(mono().with_del("n1", 1).with_invN(1)) == cr(2));
        CHECK(s.coeff(mono().with_del("n1", 2).with_invN(2)) == cr(2));      // 4/2
        CHECK(s.coeff(mono().with_del("n1", 3).with_invN(3)) == cr(4, 3));   // 8/6
        CHECK(s.size() == 4);
    }
    SUBCASE("level-2 expansion truncates at 1/N^3") {
        auto s = exp_scaled_delta<CRational>("m2", cr(5), 2, 3, 3);
        CHECK(s.coeff(mono().with_del("m2", 1).with_invN(2)) == cr(5));
        CHECK(s.size() == 2);  // identity and the linear term only
    }
}

TEST_CASE("series multiplication") {
    const int trunc = 3, ell = 3;
    auto a = exp_scaled_delta<CRational>("n1", cr(2), 1, trunc, ell);
    auto one = XSeries::identity(trunc, ell);

    SUBCASE("identity is neutral") { CHECK(series_multiply(a, one) == a); }

    SUBCASE("printed cross term of the double expansion") {
        auto b = exp_scaled_delta<CRational>("m1", cr(3), 1, trunc, ell);
        auto prod = series_multiply(a, b);
        CHECK(prod.coeff(mono().with_del("n1", 1).with_del("m1", 1).with_invN(2)) == cr(6));
        CHECK(prod.coeff(mono().with_del("n1", 1).with_invN(1)) == cr(2));
        CHECK(prod.coeff(mono().with_del("m1", 1).with_invN(1)) == cr(3));
    }

    SUBCASE("associativity on random small series") {
        std::mt19937 rng(7);
        std::uniform_int_distribution<int> coeff(-4, 4);
        auto random_series = [&] {
            XSeries s(trunc, ell);
            for (int t = 0; t < 4; ++t) {
                OperatorMonomial m;
                m.with_shift("n", coeff(rng) % 2);
                m.with_del("n1", std::abs(coeff(rng)) % 3);
                m.with_invN(std::abs(coeff(rng)) % 2);
                s.add_term(m, cr(coeff(rng), 1 + std::abs(coeff(rng))));
            }
            return s;
        };
        for (int rep = 0; rep < 5; ++rep) {
            auto x = random_series(), y = random_series(), z = random_series();
            CHECK(series_multiply(series_multiply(x, y), z) ==
                  series_multiply(x, series_multiply(y, z)));
        }
    }

    SUBCASE("mixing operator kinds on one index throws") {
        XSeries d(trunc, ell);
        d.add_term(mono().with_delta("n1", DiffVariant::Forward, 1), cr(1));
        CHECK_THROWS_AS(series_multiply(a, d), std::invalid_argument);
    }
}

TEST_CASE("shift expansions match the printed multi-lattice forms") {
    // rational stand-ins M1 = 2, M1~ = 3, M2~ = 5, M3~ = 7
    const CRational M1 = cr(2);
    const std::vector<CRational> Mt = {cr(3), cr(5), cr(7)};

    SUBCASE("T_n at trunc 3") {
        auto s = shift_expansion<CRational>(ShiftKind::Tn, M1, Mt, 3, 3);
        CHECK(s.coeff(mono().with_shift("n", 1)) == cr(1));
        CHECK(s.coeff(mono().with_shift("n", 1).with_del("n1", 1).with_invN(1)) == cr(2));
        CHECK(s.coeff(mono().with_shift("n", 1).with_del("n1", 2).with_invN(2)) == cr(2));
        CHECK(s.coeff(mono().with_shift("n", 1).with_del("n1", 3).with_invN(3)) == cr(4, 3));
        CHECK(s.size() == 4);
    }

    SUBCASE("T_m at trunc 2") {
        auto s = shift_expansion<CRational>(ShiftKind::Tm, M1, Mt, 2, 3);
        CHECK(s.coeff(mono().with_shift("m", 1)) == cr(1));
        CHECK(s.coeff(mono().with_shift("m", 1).with_del("m1", 1).with_invN(1)) == cr(3));
        CHECK(s.coeff(mono().with_shift("m", 1).with_del("m1", 2).with_invN(2)) == cr(9, 2));
        CHECK(s.coeff(mono().with_shift("m", 1).with_del("m2", 1).with_invN(2)) == cr(5));
        CHECK(s.size() == 4);
    }

    SUBCASE("T_m at trunc 3 gains the M1~M2~ cross term and M3~") {
        auto s = shift_expansion<CRational>(ShiftKind::Tm, M1, Mt, 3, 3);
        CHECK(s.coeff(mono().with_shift("m", 1).with_del("m1", 3).with_invN(3)) == cr(9, 2));
        CHECK(s.coeff(mono().with_shift("m", 1).with_del("m1", 1).with_del("m2", 1).with_invN(3)) ==
              cr(15));
        CHECK(s.coeff(mono().with_shift("m", 1).with_del("m3", 1).with_invN(3)) == cr(7));
    }

    SUBCASE("T_n T_m at trunc 1") {
        auto s = shift_expansion<CRational>(ShiftKind::TnTm, M1, Mt, 1, 3);
        auto tn_tm = mono().with_shift("n", 1).with_shift("m", 1);
        CHECK(s.coeff(tn_tm) == cr(1));
        CHECK(s.coeff(mono().with_shift("n", 1).with_shift("m", 1).with_del("n1", 1).with_invN(1)) ==
              cr(2));
        CHECK(s.coeff(mono().with_shift("n", 1).with_shift("m", 1).with_del("m1", 1).with_invN(1)) ==
              cr(3));
        CHECK(s.size() == 3);
    }

    SUBCASE("T_n T_m at trunc 3, full printed bracket") {
        auto s = shift_expansion<CRational>(ShiftKind::TnTm, M1, Mt, 3, 3);
        auto base = [&] { return mono().with_shift("n", 1).with_shift("m", 1); };
        // 1/N^2 row
        CHECK(s.coeff(base().with_del("n1", 2).with_invN(2)) == cr(2));          // M1^2/2
        CHECK(s.coeff(base().with_del("n1", 1).with_del("m1", 1).with_invN(2)) == cr(6));
        CHECK(s.coeff(base().with_del("m1", 2).with_invN(2)) == cr(9, 2));
        CHECK(s.coeff(base().with_del("m2", 1).with_invN(2)) == cr(5));
        // 1/N^3 row
        CHECK(s.coeff(base().with_del("n1", 3).with_invN(3)) == cr(4, 3));       // M1^3/6
        CHECK(s.coeff(base().with_del("n1", 2).with_del("m1", 1).with_invN(3)) == cr(6));
        CHECK(s.coeff(base().with_del("n1", 1).with_del("m1", 2).with_invN(3)) == cr(9));
        CHECK(s.coeff(base().with_del("n1", 1).with_del("m2", 1).with_invN(3)) == cr(10));
        CHECK(s.coeff(base().with_del("m1", 3).with_invN(3)) == cr(9, 2));
        CHECK(s.coeff(base().with_del("m1", 1).with_del("m2", 1).with_invN(3)) == cr(15));
        CHECK(s.coeff(base().with_del("m3", 1).with_invN(3)) == cr(7));
    }

    SUBCASE("grading consistency: TnTm equals the product of its factors") {
        auto tn = shift_expansion<CRational>(ShiftKind::Tn, M1, Mt, 3, 3);
        auto tm = shift_expansion<CRational>(ShiftKind::Tm, M1, Mt, 3, 3);
        CHECK(shift_expansion<CRational>(ShiftKind::TnTm, M1, Mt, 3, 3) ==
              series_multiply(tn, tm));
    }

    SUBCASE("truncation monotonicity") {
        auto s2 = shift_expansion<CRational>(ShiftKind::TnTm, M1, Mt, 2, 3);
        auto s3 = shift_expansion<CRational>(ShiftKind::TnTm, M1, Mt, 3, 3);
        for (const auto& [m, c] : s2.terms()) CHECK(s3.coeff(m) == c);
        auto e3 = shift_expansion<CRational>(ShiftKind::TnTm, M1, Mt, 3, 4);
        for (const auto& [m, c] : s3.terms()) CHECK(e3.coeff(m) == c);
    }
}

TEST_CASE("stencil application") {
    SUBCASE("identity leaves the field unchanged") {
        auto f = poly_grid("n1", 12, {Rational(3), Rational(-2), Rational(5)});
        auto out = stencil_apply(XSeries::identity(kUnboundedInvN, 3), f);
        f.for_each_index([&](const std::vector<int>& idx) { CHECK(out.at(idx) == f.at(idx)); });
    }

    SUBCASE("formal delta acts as the exact derivative on n^3") {
        auto f = poly_grid("n1", 12, {Rational(0), Rational(0), Rational(0), Rational(1)});
        XSeries d(kUnboundedInvN, 3);
        d.add_term(mono().with_del("n1", 1), cr(1));
        auto out = stencil_apply(d, f);  // forward realization by default
        for (int x = 0; x + 3 < 12; ++x) {
            CHECK(out.valid({x}));
            CHECK(out.at({x}) == CRational(Rational(3 * x * x)));
        }
        CHECK_FALSE(out.valid({11}));  // clamped margin is flagged, not guessed
    }

    SUBCASE("forward difference is the plane-wave eigenfunction multiplier") {
        using CGrid = GridFunction<Cplx>;
        const double kappa = 2.0 * std::numbers::pi * 3.0 / 24.0;  // commensurate wrap
        auto wave = CGrid::from_function({{"n", 24}}, [&](const std::vector<int>& idx) {
            return std::exp(Cplx(0, kappa * idx[0]));
        });
        OperatorSeries<Cplx> dplus(kUnboundedInvN, 2);
        dplus.add_term(mono().with_delta("n", DiffVariant::Forward, 1), Cplx(1.0));
        auto out = stencil_apply(dplus, wave);
        const Cplx mult = std::exp(Cplx(0, kappa)) - 1.0;
        for (int x = 0; x < 24; ++x)
            CHECK(std::abs(out.at({x}) - mult * wave.at({x})) < 1e-13);  // periodic wrap
    }
}

TEST_CASE("polynomial exactness of all delta variants") {
    // apply(delta_series(variant, ell), p) == p' at interior points, exactly.
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> coeff(-6, 6);
    for (int deg = 1; deg <= 8; ++deg) {
        std::vector<Rational> coeffs;
        for (int d = 0; d <= deg; ++d) coeffs.emplace_back(coeff(rng), 1 + (d % 3));
        const auto dcoeffs = poly_derivative(coeffs);
        const int size = 24;
        auto f = poly_grid("x", size, coeffs);
        for (auto variant :
             {DiffVariant::Forward, DiffVariant::Backward, DiffVariant::Symmetric}) {
            auto out = stencil_apply(delta_series<CRational>("x", variant, deg), f);
            for (int x = deg + 1; x + deg + 1 < size; ++x) {
                REQUIRE(out.valid({x}));
                CHECK(out.at({x}) == CRational(poly_eval(dcoeffs, x)));
            }
        }
    }
}

TEST_CASE("change of lattice") {
    SUBCASE("omega = 1 reduces to the same difference") {
        for (int j = 1; j <= 4; ++j) {
            auto s = change_of_lattice<CRational>(j, Rational(1), "n1", 8);
            CHECK(s.size() == 1);
            CHECK(s.coeff(mono().with_delta("n1", DiffVariant::Forward, j)) == cr(1));
        }
    }
    SUBCASE("printed first-order form at ell = 2") {
        const Rational w(2, 3);
        auto s = change_of_lattice<CRational>(1, w, "n1", 2);
        CHECK(s.coeff(mono().with_delta("n1", DiffVariant::Forward, 1)) == CRational(w));
        CHECK(s.coeff(mono().with_delta("n1", DiffVariant::Forward, 2)) ==
              CRational(w * (w - 1) / 2));
    }
    SUBCASE("round trip P then Q collapses to the exact identity") {
        // Substituting the Q expansion of each coarse difference back into
        // the P expansion must reproduce Delta^j on the nose: the inner
        // bracket is sum_i P_{i,j} Q_{k,i} = delta_{jk}.
        const Rational w(1, 3);
        const int ell = 8;
        for (int j = 1; j <= 4; ++j) {
            auto p_side = change_of_lattice<CRational>(j, w, "coarse", ell);
            XSeries composed(kUnboundedInvN, ell);
            for (const auto& [m, c] : p_side.terms()) {
                const int i = m.op_degree("coarse");
                composed += change_of_lattice_inverse<CRational>(i, w, "fine", ell).scaled(c);
            }
            XSeries expected(kUnboundedInvN, ell);
            expected.add_term(mono().with_delta("fine", DiffVariant::Forward, j), cr(1));
            CHECK(composed == expected);
        }
        // and the same identity realized on a sampled polynomial
        auto f = poly_grid("fine", 24, {Rational(1, 2), Rational(-1, 3), Rational(2, 7),
                                        Rational(1, 4)});
        auto p1 = change_of_lattice<CRational>(1, w, "fine", ell);
        XSeries composed(kUnboundedInvN, ell);
        for (const auto& [m, c] : p1.terms())
            composed += change_of_lattice_inverse<CRational>(m.op_degree("fine"), w, "fine", ell)
                            .scaled(c);
        auto via = stencil_apply(composed, f);
        XSeries d1(kUnboundedInvN, ell);
        d1.add_term(mono().with_delta("fine", DiffVariant::Forward, 1), cr(1));
        auto direct = stencil_apply(d1, f);
        for (int x = 0; x + ell + 1 < 24; ++x) {
            REQUIRE(via.valid({x}));
            CHECK(via.at({x}) == direct.at({x}));
        }
    }
}

TEST_CASE("plane-wave eigen-action matches the symbol") {
    using CGrid = GridFunction<Cplx>;
    const double kappa = 2.0 * std::numbers::pi * 3.0 / 20.0;
    const double omega = -2.0 * std::numbers::pi * 5.0 / 16.0;
    auto wave = CGrid::from_function({{"n", 20}, {"m", 16}}, [&](const std::vector<int>& idx) {
        return std::exp(Cplx(0, kappa * idx[0] - omega * idx[1]));
    });

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> c(-1, 1);
    OperatorSeries<Cplx> s(kUnboundedInvN, 4);
    s.add_term(mono().with_shift("n", 1).with_delta("m", DiffVariant::Forward, 1),
               Cplx(c(rng), c(rng)));
    s.add_term(mono().with_delta("n", DiffVariant::Symmetric, 2), Cplx(c(rng), c(rng)));
    s.add_term(mono().with_shift("m", -1), Cplx(c(rng), c(rng)));
    s.add_term(mono().with_delta("n", DiffVariant::Backward, 1)
                   .with_delta("m", DiffVariant::Forward, 1),
               Cplx(c(rng), c(rng)));

    auto out = stencil_apply(s, wave);
    const Cplx sym = series_symbol(s, {{"n", kappa}, {"m", -omega}});
    wave.for_each_index([&](const std::vector<int>& idx) {
        CHECK(std::abs(out.at(idx) - sym * wave.at(idx)) <=
              1e-12 * std::max(1.0, std::abs(sym)));
    });
}

TEST_CASE("pretty printer and JSON-ready term walk") {
    auto s = exp_scaled_delta<CRational>("n1", cr(2), 1, 2, 2);
    CHECK(pretty(s) == "1 + 2 d[n1] /N + 2 d[n1]^2 /N^2");
    auto d = delta_series<CRational>("n", DiffVariant::Forward, 2);
    CHECK(pretty(d) == "1 D+[n] + -1/2 D+[n]^2");
}
