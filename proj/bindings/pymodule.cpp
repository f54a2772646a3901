#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "latmscale/combinatorics.hpp"
#include "latmscale/multiscale.hpp"
#include "latmscale/nls.hpp"

#include <complex>
#include <sstream>

namespace py = pybind11;
using namespace latms;
using Cplx = std::complex<double>;

namespace {

py::object big_to_pyint(const BigInt& v) {
    std::ostringstream os;
    os << v;
    return py::module_::import("builtins").attr("int")(os.str());
}

py::object rational_to_fraction(const Rational& v) {
    std::ostringstream os;
    os << v;
    return py::module_::import("fractions").attr("Fraction")(os.str());
}

Rational rational_from_pair(long long num, long long den) { return Rational(num, den); }

ms::ReductionParams make_params(double p, double q, double kappa, int gamma, double r,
                                double M2t, int N, int ell) {
    return ms::ReductionParams::make(p, q, kappa, gamma, r, M2t, N, ell);
}

py::dict coefficients(double p, double q, double kappa, int gamma, double r, double M2t) {
    const auto rp = make_params(p, q, kappa, gamma, r, M2t, 16, 6);
    const auto sc = ms::sigma_coefficients(rp);
    py::dict d;
    d["omega"] = rp.omega;
    d["theta"] = rp.theta;
    d["S"] = rp.S;
    d["M1"] = rp.M1;
    d["M1t"] = rp.M1t;
    d["alpha1"] = sc.alpha1;
    d["alpha2"] = sc.alpha2;
    py::list sig;
    for (int i = 1; i <= 9; ++i) sig.append(sc.sigma[i]);
    d["sigma"] = std::move(sig);
    d["rho1"] = sc.rho1;
    d["rho2"] = sc.rho2;
    d["defocusing"] = sc.rho1 * sc.rho2 < 0;
    return d;
}

py::dict convergence(double p, double q, double kappa, int gamma, double r, double M2t, int ell,
                     const std::vector<int>& Ns, double u0, double A, double B) {
    const auto rp = make_params(p, q, kappa, gamma, r, M2t, Ns.front(), ell);
    const auto [rho1, rho2] = ms::rho_coefficients(rp);
    const nls::SolitonParams sp(u0, A, B, rho1, rho2);
    const auto res = ms::convergence_sweep(p, q, kappa, gamma, r, M2t, ell, Ns,
                                           nls::soliton_eval(sp),
                                           [sp](double n2, double m2) {
                                               return nls::soliton_sq_antideriv(sp, n2, m2);
                                           });
    py::list rows;
    for (const auto& row : res.rows) {
        py::dict r2;
        r2["N"] = row.N;
        r2["max_abs_residual"] = row.max_abs_residual;
        r2["max_abs_u"] = row.max_abs_u;
        r2["rel_residual"] = row.rel_residual;
        rows.append(std::move(r2));
    }
    py::dict d;
    d["rows"] = std::move(rows);
    d["slope"] = res.slope;
    return d;
}

py::dict pkdv_chain_dict(double kappa) {
    const auto c = nls::pkdv_chain(kappa);
    py::dict d;
    d["omega"] = c.omega;
    d["alpha1"] = c.alpha1;
    d["rho1"] = c.rho1;
    d["rho2"] = c.rho2;
    d["w22_factor"] = c.w22_factor;
    return d;
}

}  // namespace

PYBIND11_MODULE(_latmscale, m) {
    m.doc() = "multiscale reduction of the lattice potential KdV equation";

    // exact combinatorics
    m.def("stirling_first",
          [](int i, int k) { return big_to_pyint(exact::stirling_first(i, k)); },
          py::arg("i"), py::arg("k"), "signed Stirling number of the first kind");
    m.def("stirling_second",
          [](int k, int j) { return big_to_pyint(exact::stirling_second(k, j)); },
          py::arg("k"), py::arg("j"), "Stirling number of the second kind");
    m.def("legendre_at_zero",
          [](int i) { return rational_to_fraction(exact::legendre_at_zero(i)); }, py::arg("i"),
          "exact value of the i-th Legendre polynomial at 0");
    m.def("lattice_coeff_P",
          [](int i, int j, long long num, long long den) {
              return rational_to_fraction(exact::lattice_coeff_P(i, j, rational_from_pair(num, den)));
          },
          py::arg("i"), py::arg("j"), py::arg("omega_num"), py::arg("omega_den") = 1,
          "lattice-change coefficient P_{i,j}(omega) as an exact Fraction");
    m.def("lattice_coeff_Q",
          [](int i, int j, long long num, long long den) {
              return rational_to_fraction(exact::lattice_coeff_Q(i, j, rational_from_pair(num, den)));
          },
          py::arg("i"), py::arg("j"), py::arg("omega_num"), py::arg("omega_den") = 1);

    // lpKdV layer
    m.def("dispersion",
          [](double kappa, double p, double q) {
              return lpkdv::dispersion(kappa, lpkdv::LpkdvParams(p, q));
          },
          py::arg("kappa"), py::arg("p") = 2.0, py::arg("q") = 1.0);
    m.def("linear_symbol",
          [](double kappa, double omega, double p, double q) {
              return lpkdv::linear_symbol(kappa, omega, lpkdv::LpkdvParams(p, q));
          },
          py::arg("kappa"), py::arg("omega"), py::arg("p") = 2.0, py::arg("q") = 1.0);

    // reduction coefficients
    m.def("coefficients", &coefficients, py::arg("p") = 2.0, py::arg("q") = 1.0,
          py::arg("kappa") = 1.5707963267948966, py::arg("gamma") = 1, py::arg("r") = 1.0,
          py::arg("M2t") = 1.0, "closed-form reduction coefficients and checks");

    // soliton layer
    m.def("gray_soliton",
          [](double u0, double A, double B, double rho1, double rho2, double n2, double m2) {
              return nls::gray_soliton(nls::SolitonParams(u0, A, B, rho1, rho2), n2, m2);
          },
          py::arg("u0"), py::arg("A"), py::arg("B"), py::arg("rho1"), py::arg("rho2"),
          py::arg("n2"), py::arg("m2"));
    m.def("dnls_residual_closed_form",
          [](double u0, double A, double B, double rho1, double rho2, double n2, double m2) {
              return nls::dnls_residual_closed_form(nls::SolitonParams(u0, A, B, rho1, rho2), n2,
                                                    m2);
          },
          py::arg("u0"), py::arg("A"), py::arg("B"), py::arg("rho1"), py::arg("rho2"),
          py::arg("n2"), py::arg("m2"));

    m.def("convergence_sweep", &convergence, py::arg("p") = 2.0, py::arg("q") = 1.0,
          py::arg("kappa") = 1.5707963267948966, py::arg("gamma") = 1,
          py::arg("r") = 0.31622776601683794, py::arg("M2t") = 1.0, py::arg("ell") = 6,
          py::arg("Ns") = std::vector<int>{8, 16, 32, 64}, py::arg("u0") = 1.0,
          py::arg("A") = 0.3, py::arg("B") = 1.0,
          "lpKdV residual of the reconstructed approximation vs N");

    m.def("pkdv_chain", &pkdv_chain_dict, py::arg("kappa"),
          "continuous potential-KdV comparison constants");
    m.def("reconstruct_continuous",
          [](double u0, double A, double B, double kappa, double eps, double x, double t) {
              return nls::reconstruct_continuous(nls::continuous_soliton(u0, A, B, kappa), kappa,
                                                 eps, x, t);
          },
          py::arg("u0"), py::arg("A"), py::arg("B"), py::arg("kappa"), py::arg("eps"),
          py::arg("x"), py::arg("t"));

    m.def("zero_curvature_slope",
          [](double u0, double A, double B, double rho1, double rho2, double eta) {
              const nls::SolitonParams sp(u0, A, B, rho1, rho2);
              const auto u = nls::lax_normalized_soliton(sp);
              std::vector<double> hs = {0.1, 0.05, 0.025}, vals;
              for (double h : hs)
                  vals.push_back(
                      nls::zero_curvature_max_central(u, Cplx(eta, 0), h, -4, 4, 33, -1, 1, 9));
              return std::log2(vals[0] / vals[2]) / 2.0;
          },
          py::arg("u0") = 1.0, py::arg("A") = 0.3, py::arg("B") = 1.0, py::arg("rho1") = -0.24,
          py::arg("rho2") = 0.12, py::arg("eta") = 0.3);
    m.def("zero_curvature_stencil_floor",
          [](double u0, double A, double B, double rho1, double rho2, double eta, int ell) {
              const nls::SolitonParams sp(u0, A, B, rho1, rho2);
              const auto u = nls::lax_normalized_soliton(sp);
              return nls::zero_curvature_max_stencil(u, Cplx(eta, 0), ell, -4, 4, 33, -1, 1, 9);
          },
          py::arg("u0") = 1.0, py::arg("A") = 0.3, py::arg("B") = 1.0, py::arg("rho1") = -0.24,
          py::arg("rho2") = 0.12, py::arg("eta") = 0.3, py::arg("ell") = 2);
}
