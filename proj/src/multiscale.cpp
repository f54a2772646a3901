#include "latmscale/multiscale.hpp"

#include <algorithm>
#include <future>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace latms::ms {

namespace {

constexpr Cplx I{0.0, 1.0};

Cplx expi(double x) { return std::exp(I * x); }

void check_denominator(Cplx d, const char* name) {
    if (std::abs(d) < 1e-14)
        throw std::domain_error(std::string("multiscale: vanishing factor ") + name);
}

}  // namespace

double theta_rule(const lpkdv::LpkdvParams& lp, double kappa) {
    return -std::atan((lp.zeta * std::sin(kappa)) / (lp.zeta * std::cos(kappa) - lp.mu));
}

std::pair<Cplx, Cplx> solve_M_coefficients(const lpkdv::LpkdvParams& lp, double kappa, int gamma,
                                           Cplx S) {
    const Cplx E = expi(kappa);
    check_denominator(lp.mu * E - lp.zeta, "mu e^{ik} - zeta");
    Cplx M1 = static_cast<double>(gamma) * S * (lp.mu - lp.zeta * E);
    Cplx M1t = S * E * (lp.zeta * lp.zeta - lp.mu * lp.mu) / (lp.mu * E - lp.zeta);
    return {M1, M1t};
}

std::pair<Cplx, Cplx> solve_M_coefficients_onshell_form(const lpkdv::LpkdvParams& lp,
                                                        double kappa, double omega, int gamma,
                                                        Cplx S) {
    const Cplx E = expi(kappa);
    const Cplx W = expi(-omega);
    Cplx M1 = static_cast<double>(gamma) * S * W * (lp.mu * E - lp.zeta);
    Cplx M1t = -S * E * (lp.mu * W + lp.zeta);
    return {M1, M1t};
}

ReductionParams ReductionParams::make(double p, double q, double kappa, int gamma, double r,
                                      double M2t, int N, int ell,
                                      const ReductionOptions& opts) {
    if (gamma != 1 && gamma != -1)
        throw std::invalid_argument("ReductionParams: gamma must be +1 or -1");
    if (r <= 0) throw std::invalid_argument("ReductionParams: r must be positive");
    if (M2t < 1) throw std::invalid_argument("ReductionParams: M2~ must be >= 1");
    if (N < 1) throw std::invalid_argument("ReductionParams: N must be >= 1");
    if (ell < 1) throw std::invalid_argument("ReductionParams: ell must be >= 1");

    ReductionParams rp{lpkdv::LpkdvParams(p, q)};
    rp.kappa = kappa;
    rp.omega = lpkdv::dispersion(kappa, rp.lp);
    rp.gamma = gamma;
    rp.M2t = M2t;
    rp.N = N;
    rp.ell = ell;
    rp.theta = theta_rule(rp.lp, kappa);

    auto build = [&](double rr) {
        rp.r = rr;
        rp.S = rr * expi(rp.theta);
        std::tie(rp.M1, rp.M1t) = solve_M_coefficients(rp.lp, kappa, gamma, rp.S);
        if (rp.M1.real() < 0) {
            // Flip the S branch by pi; the theta rule fixes the phase only mod pi.
            rp.theta += std::numbers::pi;
            rp.S = rr * expi(rp.theta);
            std::tie(rp.M1, rp.M1t) = solve_M_coefficients(rp.lp, kappa, gamma, rp.S);
            rp.s_branch_flipped = true;
        }
    };
    build(r);

    if (opts.integerize) {
        const double target = std::max(1.0, std::round(rp.M1.real()));
        build(r * target / rp.M1.real());
        rp.integerize_mismatch = std::abs(rp.M1t.real() - std::round(rp.M1t.real()));
    }

    const double scale = std::max({1.0, std::abs(rp.M1), std::abs(rp.M1t)});
    if (std::abs(rp.M1.imag()) > opts.im_tol * scale ||
        std::abs(rp.M1t.imag()) > opts.im_tol * scale)
        throw std::domain_error("ReductionParams: M1 or M1~ not real under the theta rule");
    rp.m1t_positive = rp.M1t.real() > 0;
    return rp;
}

std::pair<Cplx, Cplx> alpha_coefficients(const ReductionParams& rp) {
    const double mu = rp.lp.mu, zeta = rp.lp.zeta;
    const Cplx E = expi(rp.kappa);
    check_denominator(1.0 - E, "1 - e^{ik} (alpha2 pole at kappa = 0)");
    check_denominator(mu - zeta * E, "mu - zeta e^{ik}");
    Cplx alpha1 = -2.0 * static_cast<double>(rp.gamma) * (1.0 + E) * (1.0 + E) /
                  (rp.S * E * (mu + zeta) * (mu - zeta * E));
    Cplx alpha2 = (1.0 + E) / ((1.0 - E) * (mu + zeta));
    return {alpha1, alpha2};
}

RhoForms rho_forms(const ReductionParams& rp) {
    const double mu = rp.lp.mu, zeta = rp.lp.zeta, k = rp.kappa;
    const Cplx E = expi(k);
    const Cplx E2 = expi(2 * k);
    const Cplx D2 = mu * E - zeta;
    check_denominator(D2, "mu e^{ik} - zeta");
    check_denominator(zeta * E - mu, "zeta e^{ik} - mu");

    RhoForms f;
    f.complex1 = I * zeta * mu * rp.S * rp.S * E * (zeta * zeta - mu * mu) * (E2 - 1.0) /
                 (2.0 * rp.M2t * D2 * D2);
    f.complex2 = I * zeta * mu * (mu - zeta) * (E2 - 1.0) * std::pow(E + 1.0, 4) /
                 (rp.M2t * E * (mu + zeta) * D2 * D2 * (zeta * E - mu) * (zeta * E - mu));

    const double R = zeta * zeta + mu * mu - 2.0 * zeta * mu * std::cos(k);
    f.real1 = -mu * zeta * rp.r * rp.r * (zeta * zeta - mu * mu) * std::sin(k) / (rp.M2t * R);
    f.real2 = 8.0 * zeta * mu * (zeta - mu) * std::pow(1.0 + std::cos(k), 2) * std::sin(k) /
              (rp.M2t * (mu + zeta) * R * R);
    return f;
}

std::pair<double, double> rho_coefficients(const ReductionParams& rp, double agree_tol) {
    const RhoForms f = rho_forms(rp);
    const double scale1 = std::max(1.0, std::abs(f.real1));
    const double scale2 = std::max(1.0, std::abs(f.real2));
    if (std::abs(f.complex1 - f.real1) > agree_tol * scale1 ||
        std::abs(f.complex2 - f.real2) > agree_tol * scale2)
        throw std::runtime_error(
            "rho_coefficients: complex and real closed forms disagree (branch mistake)");
    return {f.real1, f.real2};
}

SigmaCoefficients sigma_coefficients(const ReductionParams& rp) {
    const double mu = rp.lp.mu, zeta = rp.lp.zeta;
    const double g = rp.gamma;
    const Cplx E = expi(rp.kappa);
    const Cplx E2 = expi(2 * rp.kappa);
    const Cplx D1 = mu - zeta * E;
    const Cplx D2 = mu * E - zeta;
    check_denominator(D1, "mu - zeta e^{ik}");
    check_denominator(D2, "mu e^{ik} - zeta");
    check_denominator(Cplx(mu + zeta), "mu + zeta");
    check_denominator(Cplx(mu - zeta), "mu - zeta");

    SigmaCoefficients sc;
    auto& s = sc.sigma;
    s[1] = g * rp.S * E * D1 * (mu * mu - zeta * zeta) / D2;
    s[2] = -g * s[1];
    s[3] = 0.5 * g * rp.S * D1 * s[1];
    s[4] = s[1] * s[1] / (2.0 * D1);
    s[5] = -g * mu * s[1] * s[1] / (mu * mu - zeta * zeta);
    s[6] = rp.M2t * D1;
    s[7] = s[1] * (E2 - 1.0) / (E * (mu + zeta));
    s[8] = rp.S * E * (mu * mu - zeta * zeta) * (mu + zeta) * (1.0 - E2) / (D2 * D2);
    s[9] = zeta * mu * (E2 - 1.0) * (E2 - 1.0) * (E + 1.0) * (E + 1.0) * (mu - zeta) /
           (E * D1 * D2 * D2);

    std::tie(sc.alpha1, sc.alpha2) = alpha_coefficients(rp);
    std::tie(sc.rho1, sc.rho2) = rho_coefficients(rp);
    return sc;
}

// ---- operator assembly ---------------------------------------------------

ops::OperatorSeries<Cplx> linear_part_expansion(const ReductionParams& rp, int trunc) {
    using S = ops::OperatorSeries<Cplx>;
    const std::vector<Cplx> Mt = {rp.M1t, Cplx(rp.M2t), Cplx(0.0)};
    S tn = ops::shift_expansion<Cplx>(ops::ShiftKind::Tn, rp.M1, Mt, trunc, rp.ell);
    S tm = ops::shift_expansion<Cplx>(ops::ShiftKind::Tm, rp.M1, Mt, trunc, rp.ell);
    S tnm = ops::shift_expansion<Cplx>(ops::ShiftKind::TnTm, rp.M1, Mt, trunc, rp.ell);
    S one = S::identity(trunc, rp.ell);
    return (tnm - one).scaled(Cplx(rp.lp.mu)) + (tn - tm).scaled(Cplx(rp.lp.zeta));
}

ops::OperatorSeries<CRational> linear_part_expansion_exact(const Rational& mu,
                                                           const Rational& zeta,
                                                           const Rational& M1,
                                                           const Rational& M1t,
                                                           const Rational& M2t, int trunc,
                                                           int ell) {
    using S = ops::OperatorSeries<CRational>;
    const std::vector<CRational> Mt = {CRational(M1t), CRational(M2t), CRational(0)};
    S tn = ops::shift_expansion<CRational>(ops::ShiftKind::Tn, CRational(M1), Mt, trunc, ell);
    S tm = ops::shift_expansion<CRational>(ops::ShiftKind::Tm, CRational(M1), Mt, trunc, ell);
    S tnm = ops::shift_expansion<CRational>(ops::ShiftKind::TnTm, CRational(M1), Mt, trunc, ell);
    S one = S::identity(trunc, ell);
    return (tnm - one).scaled(CRational(mu)) + (tn - tm).scaled(CRational(zeta));
}

ops::OperatorSeries<Cplx> linear_operator_L(int i, const ReductionParams& rp) {
    return ops::grade_slice(linear_part_expansion(rp, std::max(i, 3)), i);
}

ops::OperatorSeries<CRational> linear_operator_L_exact(int i, const Rational& mu,
                                                       const Rational& zeta, const Rational& M1,
                                                       const Rational& M1t, const Rational& M2t,
                                                       int ell) {
    return ops::grade_slice(linear_part_expansion_exact(mu, zeta, M1, M1t, M2t, std::max(i, 3), ell),
                            i);
}

ops::OperatorSeries<Cplx> harmonic_slice_L(int i, int alpha, const ReductionParams& rp) {
    const std::map<std::string, Cplx> phases = {
        {"n", expi(alpha * rp.kappa)},
        {"m", expi(-alpha * rp.omega)},
    };
    return ops::substitute_fast_phases(linear_operator_L(i, rp), phases);
}

Cplx L0_symbol(int alpha, const ReductionParams& rp) {
    const double mu = rp.lp.mu, zeta = rp.lp.zeta;
    const Cplx tn = expi(alpha * rp.kappa);
    const Cplx tm = expi(-alpha * rp.omega);
    return mu * (tn * tm - 1.0) + zeta * (tn - tm);
}

namespace {

/// Order-k slice of (Tn - Tm) or (TnTm - 1) projected onto harmonic alpha.
/// These are the two factors of the nonlinear part of the quad equation.
ops::OperatorSeries<Cplx> nonlinear_factor_slice(bool product_factor, int k, int alpha,
                                                 const ReductionParams& rp) {
    using S = ops::OperatorSeries<Cplx>;
    const int trunc = 3;
    const std::vector<Cplx> Mt = {rp.M1t, Cplx(rp.M2t), Cplx(0.0)};
    S tn = ops::shift_expansion<Cplx>(ops::ShiftKind::Tn, rp.M1, Mt, trunc, rp.ell);
    S tm = ops::shift_expansion<Cplx>(ops::ShiftKind::Tm, rp.M1, Mt, trunc, rp.ell);
    S tnm = ops::shift_expansion<Cplx>(ops::ShiftKind::TnTm, rp.M1, Mt, trunc, rp.ell);
    S one = S::identity(trunc, rp.ell);
    S factor = product_factor ? (tnm - one) : (tn - tm);
    const std::map<std::string, Cplx> phases = {
        {"n", expi(alpha * rp.kappa)},
        {"m", expi(-alpha * rp.omega)},
    };
    return ops::substitute_fast_phases(ops::grade_slice(factor, k), phases);
}

Cplx scalar_term(const ops::OperatorSeries<Cplx>& s) { return s.coeff(ops::mono()); }

/// Assembles the order-1/N^3 harmonic-1 equation purely from the operator
/// calculus: sigma1..sigma6 come from the alpha=1 slices of L1 and L2,
/// sigma7..sigma9 from the nonlinear harmonic pairings
///   A_1^{(1)} B_2^{(0)}, A_2^{(0)} B_1^{(1)}, A_1^{(-1)} B_2^{(2)},
///   A_2^{(2)} B_1^{(-1)}  with A = (Tn-Tm)u, B = (TnTm-1)u,
/// and the alpha closures from the order-1/N^2 equations themselves.
SigmaCoefficients assemble_sigma_core(const ReductionParams& rp) {
    SigmaCoefficients sc;
    auto& s = sc.sigma;

    const auto L1a1 = harmonic_slice_L(1, 1, rp);
    s[1] = L1a1.coeff(ops::mono().with_del("n1", 1));
    s[2] = L1a1.coeff(ops::mono().with_del("m1", 1));
    const auto L2a1 = harmonic_slice_L(2, 1, rp);
    s[3] = L2a1.coeff(ops::mono().with_del("n1", 2));
    s[4] = L2a1.coeff(ops::mono().with_del("m1", 2));
    s[5] = L2a1.coeff(ops::mono().with_del("n1", 1).with_del("m1", 1));
    s[6] = L2a1.coeff(ops::mono().with_del("m2", 1));

    const Cplx A0p1 = scalar_term(nonlinear_factor_slice(false, 0, 1, rp));
    const Cplx B0p1 = scalar_term(nonlinear_factor_slice(true, 0, 1, rp));
    const auto A1a0 = nonlinear_factor_slice(false, 1, 0, rp);
    const auto B1a0 = nonlinear_factor_slice(true, 1, 0, rp);
    s[7] = A0p1 * B1a0.coeff(ops::mono().with_del("n1", 1)) +
           B0p1 * A1a0.coeff(ops::mono().with_del("n1", 1));
    s[8] = A0p1 * B1a0.coeff(ops::mono().with_del("m1", 1)) +
           B0p1 * A1a0.coeff(ops::mono().with_del("m1", 1));
    const Cplx A0m1 = scalar_term(nonlinear_factor_slice(false, 0, -1, rp));
    const Cplx B0m1 = scalar_term(nonlinear_factor_slice(true, 0, -1, rp));
    const Cplx A0p2 = scalar_term(nonlinear_factor_slice(false, 0, 2, rp));
    const Cplx B0p2 = scalar_term(nonlinear_factor_slice(true, 0, 2, rp));
    s[9] = A0m1 * B0p2 + A0p2 * B0m1;

    const auto L1a0 = harmonic_slice_L(1, 0, rp);
    const Cplx lhs0 = L1a0.coeff(ops::mono().with_del("n1", 1)) +
                      static_cast<double>(rp.gamma) * L1a0.coeff(ops::mono().with_del("m1", 1));
    sc.alpha1 = (A0p1 * B0m1 + A0m1 * B0p1) / lhs0;
    sc.alpha2 = (A0p1 * B0p1) / L0_symbol(2, rp);
    return sc;
}

}  // namespace

SigmaCoefficients sigma_from_assembly(const ReductionParams& rp) {
    SigmaCoefficients sc = assemble_sigma_core(rp);
    const auto [rho1, rho2] = rho_from_secularity(rp);
    sc.rho1 = rho1.real();
    sc.rho2 = rho2.real();
    return sc;
}

std::pair<Cplx, Cplx> rho_from_secularity(const ReductionParams& rp) {
    const SigmaCoefficients sc = assemble_sigma_core(rp);
    const auto& s = sc.sigma;
    const double g = rp.gamma;
    const Cplx lhs2 = s[3] + s[4] + g * s[5];  // coefficient of d^2/dn2^2 on u_1^{(1)}
    const Cplx nl = (s[7] + g * s[8]) * sc.alpha1 + s[9] * sc.alpha2;
    check_denominator(s[6], "sigma6 = M2~ (mu - zeta e^{ik})");
    return {-I * lhs2 / s[6], I * nl / s[6]};
}

// ---- determining equations on sampled fields ------------------------------

Field determining_residual_order2(const Order2Fields& fields, const ReductionParams& rp,
                                  int alpha) {
    auto need = [&](const std::optional<Field>& f, const char* name) -> const Field& {
        if (!f) throw std::domain_error(std::string("determining_residual_order2: missing ") + name);
        return *f;
    };
    const Cplx A0p1 = scalar_term(nonlinear_factor_slice(false, 0, 1, rp));
    const Cplx B0p1 = scalar_term(nonlinear_factor_slice(true, 0, 1, rp));
    const Cplx A0m1 = scalar_term(nonlinear_factor_slice(false, 0, -1, rp));
    const Cplx B0m1 = scalar_term(nonlinear_factor_slice(true, 0, -1, rp));

    if (alpha == 1) {
        const Field& u11 = need(fields.u11, "u_1^{(1)}");
        return ops::stencil_apply(harmonic_slice_L(1, 1, rp), u11);
    }
    if (alpha == 0) {
        const Field& u10 = need(fields.u10, "u_1^{(0)}");
        const Field& u11 = need(fields.u11, "u_1^{(1)}");
        Field lhs = ops::stencil_apply(harmonic_slice_L(1, 0, rp), u10);
        const Cplx factor = A0p1 * B0m1 + A0m1 * B0p1;
        Field out(lhs.axes(), lhs.boundary());
        out.for_each_index([&](const std::vector<int>& idx) {
            if (!lhs.valid(idx) || !u11.valid(idx)) {
                out.mark_invalid(idx);
                return;
            }
            const Cplx v = u11.at(idx);
            out.set(idx, lhs.at(idx) - factor * std::norm(v));
        });
        return out;
    }
    if (alpha == 2) {
        const Field& u22 = need(fields.u22, "u_2^{(2)}");
        const Field& u11 = need(fields.u11, "u_1^{(1)}");
        const Cplx sym = L0_symbol(2, rp);
        const Cplx factor = A0p1 * B0p1;
        Field out(u22.axes(), u22.boundary());
        out.for_each_index([&](const std::vector<int>& idx) {
            if (!u22.valid(idx) || !u11.valid(idx)) {
                out.mark_invalid(idx);
                return;
            }
            const Cplx v = u11.at(idx);
            out.set(idx, sym * u22.at(idx) - factor * v * v);
        });
        return out;
    }
    throw std::invalid_argument("determining_residual_order2: alpha must be 0, 1 or 2");
}

SecularitySplitResult secularity_split(const SlowFieldEval& u11,
                                       const std::optional<SlowFieldEval>& u21,
                                       const ReductionParams& rp, double n2_lo, double n2_hi,
                                       int n_samples, double m2) {
    const SigmaCoefficients sc = sigma_coefficients(rp);
    const auto& s = sc.sigma;
    const double g = rp.gamma;
    const Cplx lin2 = s[3] + s[4] + g * s[5];
    const Cplx nl = (s[7] + g * s[8]) * sc.alpha1 + s[9] * sc.alpha2;

    SecularitySplitResult res;
    for (int i = 0; i < n_samples; ++i) {
        const double n2 = n2_lo + (n2_hi - n2_lo) * i / (n_samples - 1);
        const Cplx u = u11.value(n2, m2);
        const Cplx d2 = u11.d2_n2(n2, m2);
        const Cplx dm = u11.d_m2(n2, m2);
        const Cplx r16 = I * dm - sc.rho1 * d2 - sc.rho2 * u * std::norm(u);
        res.max_reduced_residual = std::max(res.max_reduced_residual, std::abs(r16));
        const Cplx r15 = lin2 * d2 + s[6] * dm - nl * u * std::norm(u);
        res.max_equivalence_gap = std::max(res.max_equivalence_gap, std::abs(r15 + I * s[6] * r16));
        if (u21) {
            const Cplx lhs = (s[1] + g * s[2]) * u21->d_n2(n2, m2);
            res.max_secular_lhs = std::max(res.max_secular_lhs, std::abs(lhs));
        }
    }
    return res;
}

// ---- reconstruction --------------------------------------------------------

AssembledField assemble_approximation_closed(
    const ReductionParams& rp, const SlowFieldEval& u11,
    const std::function<double(double, double)>& sq_antideriv, const AssemblyWindow& window) {
    const auto [alpha1, alpha2] = alpha_coefficients(rp);
    const double M1r = rp.M1.real(), M1tr = rp.M1t.real();
    const double g = rp.gamma;
    const double N = rp.N;

    const long long n_lo = static_cast<long long>(std::floor(-window.n2_half_width * N / M1r));
    const long long n_hi = static_cast<long long>(std::ceil(window.n2_half_width * N / M1r));
    const int n_size = static_cast<int>(n_hi - n_lo + 1);

    AssembledField out;
    out.n_lo = n_lo;
    out.u = Field({{"n", n_size}, {"m", window.m_rows}}, ops::Boundary::Clamped);
    out.u.for_each_index([&](const std::vector<int>& idx) {
        const double n = static_cast<double>(n_lo + idx[0]);
        const double m = idx[1];
        const double n2 = (n * M1r + g * m * M1tr) / N;
        const double m2 = m * rp.M2t / (N * N);
        const Cplx E = expi(rp.kappa * n - rp.omega * m);
        const Cplx s = u11.value(n2, m2);
        const Cplx carrier = s * E;
        const Cplx second = alpha2 * s * s * E * E;
        const Cplx mean = alpha1 * sq_antideriv(n2, m2);
        const Cplx u = (carrier + std::conj(carrier) + mean) / N +
                       (second + std::conj(second)) / (N * N);
        out.u.set(idx, u);
        out.max_abs = std::max(out.max_abs, std::abs(u));
    });
    return out;
}

SampledAssembly assemble_approximation(const HarmonicField& u11, const ReductionParams& rp,
                                       const AssemblyWindow& window) {
    if (u11.alpha != 1 || u11.k != 1)
        throw std::invalid_argument("assemble_approximation: expects the u_1^{(1)} harmonic");
    const Field& grid = u11.data;
    const int a_n2 = grid.axis_position("n2");
    const int a_m2 = grid.axis_position("m2");
    if (a_n2 < 0 || a_m2 < 0)
        throw std::invalid_argument("assemble_approximation: u11 must live on (n2, m2)");
    const int Sn = grid.axes()[a_n2].size;
    const int Sm = grid.axes()[a_m2].size;
    const double n2_origin = -0.5 * (Sn - 1);  // integer slow lattice, centered

    // Delta-antiderivative of |u11|^2 along n2 (zero-mean per m2 row).
    std::vector<std::vector<double>> anti(static_cast<std::size_t>(Sm),
                                          std::vector<double>(static_cast<std::size_t>(Sn), 0.0));
    for (int jm = 0; jm < Sm; ++jm) {
        double run = 0;
        for (int jn = 0; jn < Sn; ++jn) {
            anti[jm][jn] = run;
            run += std::norm(grid.at(a_n2 == 0 ? std::vector<int>{jn, jm}
                                               : std::vector<int>{jm, jn}));
        }
        double mean = 0;
        for (double v : anti[jm]) mean += v;
        mean /= Sn;
        for (double& v : anti[jm]) v -= mean;
    }

    SampledAssembly result;
    auto& out = result.field;
    const auto [alpha1, alpha2] = alpha_coefficients(rp);
    const double M1r = rp.M1.real(), M1tr = rp.M1t.real();
    const double g = rp.gamma;
    const double N = rp.N;
    const long long n_lo =
        static_cast<long long>(std::floor(-window.n2_half_width * N / M1r));
    const long long n_hi = static_cast<long long>(std::ceil(window.n2_half_width * N / M1r));
    out.n_lo = n_lo;
    out.u = Field({{"n", static_cast<int>(n_hi - n_lo + 1)}, {"m", window.m_rows}},
                  ops::Boundary::Clamped);
    out.u.for_each_index([&](const std::vector<int>& idx) {
        const double n = static_cast<double>(n_lo + idx[0]);
        const double m = idx[1];
        const double n2 = (n * M1r + g * m * M1tr) / N;
        const double m2 = m * rp.M2t / (N * N);
        int jn = static_cast<int>(std::llround(n2 - n2_origin));
        int jm = static_cast<int>(std::llround(m2));
        jn = std::clamp(jn, 0, Sn - 1);
        jm = std::clamp(jm, 0, Sm - 1);
        result.max_sample_offset =
            std::max(result.max_sample_offset,
                     std::max(std::abs(n2 - (n2_origin + jn)), std::abs(m2 - jm)));
        const Cplx s = grid.at(a_n2 == 0 ? std::vector<int>{jn, jm} : std::vector<int>{jm, jn});
        const Cplx E = expi(rp.kappa * n - rp.omega * m);
        const Cplx carrier = s * E;
        const Cplx second = alpha2 * s * s * E * E;
        const Cplx mean = alpha1 * anti[jm][jn];
        const Cplx u = (carrier + std::conj(carrier) + mean) / N +
                       (second + std::conj(second)) / (N * N);
        out.u.set(idx, u);
        out.max_abs = std::max(out.max_abs, std::abs(u));
    });
    return result;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return std::nan("");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0 || y[i] <= 0) return std::nan("");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceResult convergence_sweep(double p, double q, double kappa, int gamma, double r,
                                    double M2t, int ell, const std::vector<int>& Ns,
                                    const SlowFieldEval& u11,
                                    const std::function<double(double, double)>& sq_antideriv,
                                    const AssemblyWindow& window, int threads) {
    auto run_one = [&](int N) {
        const ReductionParams rp = ReductionParams::make(p, q, kappa, gamma, r, M2t, N, ell);
        const AssembledField af = assemble_approximation_closed(rp, u11, sq_antideriv, window);
        const Field resid = lpkdv::lpkdv_residual(af.u, rp.lp);
        double worst = 0;
        resid.for_each_index([&](const std::vector<int>& idx) {
            if (resid.valid(idx)) worst = std::max(worst, std::abs(resid.at(idx)));
        });
        ConvergenceRow row;
        row.N = N;
        row.max_abs_residual = worst;
        row.max_abs_u = af.max_abs;
        row.rel_residual = af.max_abs > 0 ? worst / af.max_abs : 0.0;
        return row;
    };

    ConvergenceResult res;
    res.rows.resize(Ns.size());
    if (threads > 1 && Ns.size() > 1) {
        std::vector<std::future<ConvergenceRow>> futures;
        std::size_t next = 0;
        while (next < Ns.size()) {
            const std::size_t batch =
                std::min<std::size_t>(static_cast<std::size_t>(threads), Ns.size() - next);
            futures.clear();
            for (std::size_t i = 0; i < batch; ++i)
                futures.push_back(
                    std::async(std::launch::async, run_one, Ns[next + i]));
            for (std::size_t i = 0; i < batch; ++i) res.rows[next + i] = futures[i].get();
            next += batch;
        }
    } else {
        for (std::size_t i = 0; i < Ns.size(); ++i) res.rows[i] = run_one(Ns[i]);
    }

    std::vector<double> xs, ys;
    for (const auto& row : res.rows) {
        xs.push_back(row.N);
        ys.push_back(row.rel_residual);
    }
    res.slope = -loglog_slope(xs, ys);
    return res;
}

}  // namespace latms::ms
