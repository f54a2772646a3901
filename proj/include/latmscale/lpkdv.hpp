#pragma once

#include "latmscale/grid.hpp"

#include <complex>

namespace latms::lpkdv {

using Cplx = std::complex<double>;
using Field = ops::GridFunction<Cplx>;

/// Parameters of the quad equation; mu = p-q and zeta = p+q must both be
/// nonzero (the equation and several downstream formulas divide by them).
struct LpkdvParams {
    double p = 0, q = 0;
    double mu = 0, zeta = 0;

    LpkdvParams(double p_, double q_);
};

/// Quad-equation residual
///   (mu + u_{n,m+1} - u_{n+1,m}) (zeta - u_{n+1,m+1} + u_{n,m}) - mu*zeta
/// on every cell whose four corners lie in the box. The output grid has one
/// fewer point along each of n and m. Expanding the product shows this
/// equals nonlinear_part_residual - linear_part_residual, cellwise.
Field lpkdv_residual(const Field& u, const LpkdvParams& params);

/// mu (T_n T_m u - u) + zeta (T_n u - T_m u): the linear part whose
/// order-by-order slices are the L_i operators.
Field linear_part_residual(const Field& u, const LpkdvParams& params);

/// (T_n u - T_m u)(T_n T_m u - u): the nonlinear part.
Field nonlinear_part_residual(const Field& u);

/// omega(kappa) = -2 atan(((zeta+mu)/(zeta-mu)) tan(kappa/2)), principal
/// branch, continuous through kappa = 0. At the tan pole (kappa = pi mod
/// 2 pi) the limiting value -pi*sign((zeta+mu)/(zeta-mu)) is returned.
double dispersion(double kappa, const LpkdvParams& params);

/// Symbol of the linear part on exp(i(kappa n - omega m)):
///   mu (e^{i(kappa-omega)} - 1) + zeta (e^{i kappa} - e^{-i omega})
Cplx linear_symbol(double kappa, double omega, const LpkdvParams& params);

/// Plane wave e^{i(kappa n - omega m)} sampled on an (n, m) box.
Field plane_wave(double kappa, double omega, int n_size, int m_size);

/// Residual field as CSV with columns n, m, re, im (row-major, invalid
/// margin cells skipped).
std::string field_csv(const Field& f);

}  // namespace latms::lpkdv
