#include "latmscale/nls.hpp"

#include <cmath>
#include <stdexcept>

namespace latms::nls {

namespace {

constexpr Cplx I{0.0, 1.0};

double binom(int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Truncated log-shift series applied to a continuum extension: unit steps
/// along the chosen argument.
Cplx delta_ell_apply(const std::function<Cplx(double, double)>& f, double x, double t, int axis,
                     int ell, double step = 1.0) {
    Cplx out = 0;
    for (int i = 1; i <= ell; ++i) {
        Cplx acc = 0;
        for (int k = 0; k <= i; ++k) {
            const double sgn = ((i - k) % 2 == 0) ? 1.0 : -1.0;
            const double dx = k * step;
            acc += sgn * binom(i, k) * (axis == 0 ? f(x + dx, t) : f(x, t + dx));
        }
        out += ((i % 2 == 1) ? 1.0 : -1.0) / static_cast<double>(i) * acc;
    }
    return out;
}

}  // namespace

SolitonParams::SolitonParams(double u0_, double A_, double B_, double rho1_, double rho2_)
    : u0(u0_), A(A_), B(B_), rho1(rho1_), rho2(rho2_) {
    if (!(rho1 * rho2 < 0))
        throw std::domain_error("SolitonParams: needs the defocusing regime rho1*rho2 < 0");
    sgn = rho2 > 0 ? 1.0 : -1.0;
    eta0 = u0 * B * std::sqrt(rho2 / (-2.0 * rho1));
    eta1 = A / std::sqrt(-2.0 * rho1 * rho2);
    ue = u0 * A;
    eta2 = 0.5 * u0 * u0 * (2.0 * rho2 * B * B - A * A / rho1);
}

Cplx gray_soliton(const SolitonParams& sp, double n2, double m2) {
    const double z = sp.eta0 * (n2 - sp.ue * m2);
    return sp.u0 * (sp.B * std::tanh(z) + I * sp.sgn * sp.eta1) * std::exp(-I * sp.eta2 * m2);
}

Cplx gray_soliton_d_n2(const SolitonParams& sp, double n2, double m2) {
    const double z = sp.eta0 * (n2 - sp.ue * m2);
    const double sech2 = 1.0 / std::pow(std::cosh(z), 2);
    return sp.u0 * sp.B * sp.eta0 * sech2 * std::exp(-I * sp.eta2 * m2);
}

Cplx gray_soliton_d2_n2(const SolitonParams& sp, double n2, double m2) {
    const double z = sp.eta0 * (n2 - sp.ue * m2);
    const double sech2 = 1.0 / std::pow(std::cosh(z), 2);
    return -2.0 * sp.u0 * sp.B * sp.eta0 * sp.eta0 * std::tanh(z) * sech2 *
           std::exp(-I * sp.eta2 * m2);
}

Cplx gray_soliton_d_m2(const SolitonParams& sp, double n2, double m2) {
    return -sp.ue * gray_soliton_d_n2(sp, n2, m2) - I * sp.eta2 * gray_soliton(sp, n2, m2);
}

ms::SlowFieldEval soliton_eval(const SolitonParams& sp) {
    ms::SlowFieldEval e;
    e.value = [sp](double n2, double m2) { return gray_soliton(sp, n2, m2); };
    e.d_n2 = [sp](double n2, double m2) { return gray_soliton_d_n2(sp, n2, m2); };
    e.d2_n2 = [sp](double n2, double m2) { return gray_soliton_d2_n2(sp, n2, m2); };
    e.d_m2 = [sp](double n2, double m2) { return gray_soliton_d_m2(sp, n2, m2); };
    return e;
}

double soliton_sq_antideriv(const SolitonParams& sp, double n2, double m2) {
    // |u|^2 = u0^2 (eta1^2 + B^2 tanh^2), integrated in n2 and centered so
    // the value vanishes at the soliton core.
    const double z = n2 - sp.ue * m2;
    const double tanh_term =
        sp.eta0 != 0.0 ? (sp.B * sp.B / sp.eta0) * std::tanh(sp.eta0 * z) : 0.0;
    return sp.u0 * sp.u0 * ((sp.B * sp.B + sp.eta1 * sp.eta1) * z - tanh_term);
}

Cplx dnls_residual_closed_form(const SolitonParams& sp, double n2, double m2) {
    const Cplx u = gray_soliton(sp, n2, m2);
    return I * gray_soliton_d_m2(sp, n2, m2) - sp.rho1 * gray_soliton_d2_n2(sp, n2, m2) -
           sp.rho2 * u * std::norm(u);
}

Field dnls_reduced_residual(const Field& u, double rho1, double rho2, const StencilSpec& spec) {
    if (u.axis_position("n2") < 0 || u.axis_position("m2") < 0)
        throw std::domain_error("dnls_reduced_residual: field must live on (n2, m2)");
    using S = ops::OperatorSeries<Cplx>;
    const S dm2 = ops::delta_series<Cplx>("m2", ops::DiffVariant::Forward, spec.ell);
    const S dn2 = ops::delta_series<Cplx>("n2", ops::DiffVariant::Forward, spec.ell);
    const Field ut = ops::stencil_apply(dm2, u);
    const Field uxx = ops::stencil_apply(ops::series_multiply(dn2, dn2), u);
    Field out(u.axes(), u.boundary());
    out.for_each_index([&](const std::vector<int>& idx) {
        if (!ut.valid(idx) || !uxx.valid(idx) || !u.valid(idx)) {
            out.mark_invalid(idx);
            return;
        }
        const Cplx v = u.at(idx);
        out.set(idx, I * ut.at(idx) / spec.dm2 - rho1 * uxx.at(idx) / (spec.dn2 * spec.dn2) -
                         rho2 * v * std::norm(v));
    });
    return out;
}

Field dnls_local_residual(const Field& phi, double c1, double c2) {
    if (phi.axis_position("n") < 0 || phi.axis_position("m") < 0)
        throw std::domain_error("dnls_local_residual: field must live on (n, m)");
    const int an = phi.axis_position("n");
    const int am = phi.axis_position("m");
    auto offset = [&](int axis, int step) {
        std::vector<int> o(phi.rank(), 0);
        o[axis] = step;
        return o;
    };
    Field out(phi.axes(), phi.boundary());
    out.for_each_index([&](const std::vector<int>& idx) {
        auto rpp = phi.resolve(idx, offset(an, 1));
        auto rpm = phi.resolve(idx, offset(an, -1));
        auto rpt = phi.resolve(idx, offset(am, 1));
        if (!rpp || !rpm || !rpt) {
            out.mark_invalid(idx);
            return;
        }
        const Cplx v = phi.at(idx);
        out.set(idx, I * (phi.at(*rpt) - v) + c1 * (phi.at(*rpp) - 2.0 * v + phi.at(*rpm)) +
                         c2 * v * std::norm(v));
    });
    return out;
}

LaxMatrices lax_matrices(Cplx u, Cplx u_conj, Cplx du_dn2, Cplx eta) {
    LaxMatrices lm;
    lm.eta = eta;
    lm.U = {{{I * eta, u}, {u_conj, -I * eta}}};
    const Cplx mod2 = u * u_conj;
    lm.V = {{{2.0 * I * eta * eta + I * mod2, 2.0 * eta * u - I * du_dn2},
             {2.0 * eta * u_conj + I * std::conj(du_dn2), -2.0 * I * eta * eta - I * mod2}}};
    return lm;
}

Mat2 commutator(const Mat2& a, const Mat2& b) {
    Mat2 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Cplx ab = 0, ba = 0;
            for (int k = 0; k < 2; ++k) {
                ab += a[i][k] * b[k][j];
                ba += b[i][k] * a[k][j];
            }
            r[i][j] = ab - ba;
        }
    return r;
}

double max_abs(const Mat2& m) {
    double w = 0;
    for (const auto& row : m)
        for (const auto& v : row) w = std::max(w, std::abs(v));
    return w;
}

LaxNormalization lax_normalization(double rho1, double rho2) {
    if (!(rho1 * rho2 < 0))
        throw std::domain_error("lax_normalization: needs rho1*rho2 < 0");
    return {std::sqrt(-rho2 / (2.0 * rho1)), 1.0 / rho1};
}

std::function<Cplx(double, double)> lax_normalized_soliton(const SolitonParams& sp) {
    const LaxNormalization ln = lax_normalization(sp.rho1, sp.rho2);
    return [sp, ln](double x, double t) { return ln.amp * gray_soliton(sp, x, t * ln.time); };
}

double Matrix2Field::max_abs() const {
    double w = 0;
    auto scan = [&](const Field& f) {
        f.for_each_index([&](const std::vector<int>& idx) {
            if (f.valid(idx)) w = std::max(w, std::abs(f.at(idx)));
        });
    };
    scan(e00);
    scan(e01);
    scan(e10);
    scan(e11);
    return w;
}

Matrix2Field zero_curvature_residual(const Field& u_field, Cplx eta, double h) {
    const int ax = u_field.axis_position("n2");
    const int at = u_field.axis_position("m2");
    if (ax < 0 || at < 0)
        throw std::domain_error("zero_curvature_residual: field must live on (n2, m2)");
    const int nx = u_field.axes()[ax].size;
    const int nt = u_field.axes()[at].size;

    auto value = [&](int i, int j) {
        std::vector<int> idx(2);
        idx[ax] = i;
        idx[at] = j;
        return u_field.at(idx);
    };
    auto du = [&](int i, int j) { return (value(i + 1, j) - value(i - 1, j)) / (2.0 * h); };
    auto Umat = [&](int i, int j) {
        const Cplx u = value(i, j);
        return lax_matrices(u, std::conj(u), du(i, j), eta).U;
    };
    auto Vmat = [&](int i, int j) {
        const Cplx u = value(i, j);
        return lax_matrices(u, std::conj(u), du(i, j), eta).V;
    };

    Matrix2Field out{Field(u_field.axes(), ops::Boundary::Clamped),
                     Field(u_field.axes(), ops::Boundary::Clamped),
                     Field(u_field.axes(), ops::Boundary::Clamped),
                     Field(u_field.axes(), ops::Boundary::Clamped)};
    Field* entries[2][2] = {{&out.e00, &out.e01}, {&out.e10, &out.e11}};

    u_field.for_each_index([&](const std::vector<int>& idx) {
        const int i = idx[ax], j = idx[at];
        const bool interior = i >= 2 && i + 2 < nx && j >= 1 && j + 1 < nt;
        if (!interior || std::isnan(std::abs(value(i, j)))) {
            for (auto& row : entries)
                for (Field* f : row) f->mark_invalid(idx);
            return;
        }
        const Mat2 U = Umat(i, j);
        const Mat2 V = Vmat(i, j);
        const Mat2 Utp = Umat(i, j + 1), Utm = Umat(i, j - 1);
        const Mat2 Vxp = Vmat(i + 1, j), Vxm = Vmat(i - 1, j);
        const Mat2 com = commutator(U, V);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const Cplx r = (Utp[a][b] - Utm[a][b]) / (2.0 * h) -
                               (Vxp[a][b] - Vxm[a][b]) / (2.0 * h) + com[a][b];
                entries[a][b]->set(idx, r);
            }
    });
    return out;
}

double zero_curvature_max_central(const std::function<Cplx(double, double)>& u, Cplx eta,
                                  double h, double x_lo, double x_hi, int nx, double t_lo,
                                  double t_hi, int nt) {
    auto du = [&](double x, double t) { return (u(x + h, t) - u(x - h, t)) / (2.0 * h); };
    auto Umat = [&](double x, double t) {
        const Cplx v = u(x, t);
        return lax_matrices(v, std::conj(v), du(x, t), eta).U;
    };
    auto Vmat = [&](double x, double t) {
        const Cplx v = u(x, t);
        return lax_matrices(v, std::conj(v), du(x, t), eta).V;
    };
    double worst = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nt; ++j) {
            const double x = x_lo + (x_hi - x_lo) * i / std::max(1, nx - 1);
            const double t = t_lo + (t_hi - t_lo) * j / std::max(1, nt - 1);
            const Mat2 U = Umat(x, t);
            const Mat2 V = Vmat(x, t);
            const Mat2 Utp = Umat(x, t + h), Utm = Umat(x, t - h);
            const Mat2 Vxp = Vmat(x + h, t), Vxm = Vmat(x - h, t);
            const Mat2 com = commutator(U, V);
            Mat2 r{};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    r[a][b] = (Utp[a][b] - Utm[a][b]) / (2.0 * h) -
                              (Vxp[a][b] - Vxm[a][b]) / (2.0 * h) + com[a][b];
            worst = std::max(worst, max_abs(r));
        }
    return worst;
}

double zero_curvature_max_stencil(const std::function<Cplx(double, double)>& u, Cplx eta,
                                  int ell, double x_lo, double x_hi, int nx, double t_lo,
                                  double t_hi, int nt) {
    auto du = [&](double x, double t) { return delta_ell_apply(u, x, t, 0, ell); };
    auto Umat = [&](double x, double t) {
        const Cplx v = u(x, t);
        return lax_matrices(v, std::conj(v), du(x, t), eta).U;
    };
    auto Vmat = [&](double x, double t) {
        const Cplx v = u(x, t);
        return lax_matrices(v, std::conj(v), du(x, t), eta).V;
    };
    auto Ufn = [&](int a, int b) {
        return [&, a, b](double x, double t) { return Umat(x, t)[a][b]; };
    };
    auto Vfn = [&](int a, int b) {
        return [&, a, b](double x, double t) { return Vmat(x, t)[a][b]; };
    };
    double worst = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nt; ++j) {
            const double x = x_lo + (x_hi - x_lo) * i / std::max(1, nx - 1);
            const double t = t_lo + (t_hi - t_lo) * j / std::max(1, nt - 1);
            const Mat2 com = commutator(Umat(x, t), Vmat(x, t));
            Mat2 r{};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    r[a][b] = delta_ell_apply(Ufn(a, b), x, t, 1, ell) -
                              delta_ell_apply(Vfn(a, b), x, t, 0, ell) + com[a][b];
            worst = std::max(worst, max_abs(r));
        }
    return worst;
}

PkdvChain pkdv_chain(double kappa) {
    if (kappa == 0.0) throw std::domain_error("pkdv_chain: kappa = 0 pole");
    PkdvChain c;
    c.omega = kappa * kappa * kappa;
    c.alpha1 = -2.0;
    c.rho1 = -3.0 * kappa;
    c.rho2 = 6.0 * kappa;
    c.w22_factor = I / (2.0 * kappa);
    return c;
}

SolitonParams continuous_soliton(double u0, double A, double B, double kappa) {
    const PkdvChain c = pkdv_chain(kappa);
    return SolitonParams(u0, A, B, c.rho1, c.rho2);
}

double reconstruct_continuous(const SolitonParams& sp, double kappa, double epsilon, double x,
                              double t) {
    if (kappa == 0.0) throw std::domain_error("reconstruct_continuous: kappa = 0 pole");
    const PkdvChain chain = pkdv_chain(kappa);
    const double xi = epsilon * (x - 3.0 * kappa * kappa * t);
    const double tau = epsilon * epsilon * t;
    const Cplx w11 = gray_soliton(sp, xi, tau);
    const Cplx carrier = std::exp(I * (kappa * x - chain.omega * t));
    const double w10 = chain.alpha1 * soliton_sq_antideriv(sp, xi, tau);
    const Cplx w22 = chain.w22_factor * w11 * w11;
    const Cplx w = epsilon * (w11 * carrier + std::conj(w11 * carrier) + w10) +
                   epsilon * epsilon * (w22 * carrier * carrier +
                                        std::conj(w22 * carrier * carrier));
    return w.real();
}

double pkdv_residual_fd(const SolitonParams& sp, double kappa, double epsilon, double x_lo,
                        double x_hi, int nx, double t_lo, double t_hi, int nt, double h_fd) {
    auto w = [&](double x, double t) { return reconstruct_continuous(sp, kappa, epsilon, x, t); };
    double worst = 0;
    const double h = h_fd;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nt; ++j) {
            const double x = x_lo + (x_hi - x_lo) * i / std::max(1, nx - 1);
            const double t = t_lo + (t_hi - t_lo) * j / std::max(1, nt - 1);
            const double wt = (w(x, t + h) - w(x, t - h)) / (2.0 * h);
            const double wx = (-w(x + 2 * h, t) + 8 * w(x + h, t) - 8 * w(x - h, t) +
                               w(x - 2 * h, t)) /
                              (12.0 * h);
            const double wxxx = (-w(x + 3 * h, t) + 8 * w(x + 2 * h, t) - 13 * w(x + h, t) +
                                 13 * w(x - h, t) - 8 * w(x - 2 * h, t) + w(x - 3 * h, t)) /
                                (8.0 * h * h * h);
            worst = std::max(worst, std::abs(wt - wxxx - 3.0 * wx * wx));
        }
    return worst;
}

}  // namespace latms::nls
