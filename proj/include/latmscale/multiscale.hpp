#pragma once

#include "latmscale/grid.hpp"
#include "latmscale/lpkdv.hpp"

#include <array>
#include <functional>
#include <optional>

namespace latms::ms {

using Cplx = std::complex<double>;
using Field = ops::GridFunction<Cplx>;

struct ReductionOptions {
    bool integerize = false;   // rescale r so M1 lands on the nearest positive integer
    double im_tol = 1e-10;     // admissible imaginary part of M1, M1~ after the theta rule
};

/// Everything the order-by-order reduction needs. Built by make(), which
/// computes omega from the dispersion relation, S from the theta rule
/// (flipping its sign when needed so that Re M1 > 0) and validates that the
/// resulting M1, M1~ are real.
struct ReductionParams {
    lpkdv::LpkdvParams lp;
    double kappa = 0;
    double omega = 0;
    int gamma = 1;
    double r = 1;
    double theta = 0;
    Cplx S{};
    Cplx M1{}, M1t{};
    double M2t = 1;
    int N = 16;
    int ell = 6;
    bool s_branch_flipped = false;
    bool m1t_positive = true;
    double integerize_mismatch = 0;

    static ReductionParams make(double p, double q, double kappa, int gamma, double r,
                                double M2t, int N, int ell, const ReductionOptions& opts = {});
};

/// theta = -atan((zeta sin kappa)/(zeta cos kappa - mu)), the phase that makes
/// M1 and M1~ real.
double theta_rule(const lpkdv::LpkdvParams& lp, double kappa);

/// M1 = gamma S (mu - zeta e^{i kappa}),  M1~ = S e^{i kappa}(zeta^2-mu^2)/(mu e^{i kappa}-zeta).
std::pair<Cplx, Cplx> solve_M_coefficients(const lpkdv::LpkdvParams& lp, double kappa, int gamma,
                                           Cplx S);

/// Pre-dispersion form M1 = gamma S e^{-i omega}(mu e^{i kappa}-zeta),
/// M1~ = -S e^{i kappa}(mu e^{-i omega}+zeta); equals the other form on shell.
std::pair<Cplx, Cplx> solve_M_coefficients_onshell_form(const lpkdv::LpkdvParams& lp,
                                                        double kappa, double omega, int gamma,
                                                        Cplx S);

/// Closed forms of the order-1/N^2 closures:
///   alpha1 = -2 gamma (1+e^{ik})^2 / (S e^{ik} (mu+zeta)(mu - zeta e^{ik}))
///   alpha2 = (1+e^{ik}) / ((1-e^{ik})(mu+zeta))
std::pair<Cplx, Cplx> alpha_coefficients(const ReductionParams& rp);

struct SigmaCoefficients {
    std::array<Cplx, 10> sigma{};  // 1-based, sigma[0] unused
    Cplx alpha1{}, alpha2{};
    double rho1 = 0, rho2 = 0;
};

/// The nine closed-form coefficients of the order-1/N^3, harmonic-1 equation,
/// together with alpha1, alpha2 and the reduced-equation coefficients.
SigmaCoefficients sigma_coefficients(const ReductionParams& rp);

struct RhoForms {
    Cplx complex1{}, complex2{};  // complex closed forms
    double real1 = 0, real2 = 0;  // trigonometric closed forms
};
RhoForms rho_forms(const ReductionParams& rp);

/// Returns (rho1, rho2) from the real closed forms after checking that the
/// complex forms agree within agree_tol; throws on disagreement.
std::pair<double, double> rho_coefficients(const ReductionParams& rp, double agree_tol = 1e-10);

// ---- operator assembly -------------------------------------------------

/// The linear part mu(TnTm-1)+zeta(Tn-Tm) under the multi-lattice shift
/// expansions, through 1/N^trunc.
ops::OperatorSeries<Cplx> linear_part_expansion(const ReductionParams& rp, int trunc);
ops::OperatorSeries<CRational> linear_part_expansion_exact(const Rational& mu,
                                                           const Rational& zeta,
                                                           const Rational& M1,
                                                           const Rational& M1t,
                                                           const Rational& M2t, int trunc,
                                                           int ell);

/// L_i, the 1/N^i slice of the expansion above.
ops::OperatorSeries<Cplx> linear_operator_L(int i, const ReductionParams& rp);
ops::OperatorSeries<CRational> linear_operator_L_exact(int i, const Rational& mu,
                                                       const Rational& zeta, const Rational& M1,
                                                       const Rational& M1t, const Rational& M2t,
                                                       int ell);

/// L_i with the fast shifts projected onto harmonic alpha of the carrier.
ops::OperatorSeries<Cplx> harmonic_slice_L(int i, int alpha, const ReductionParams& rp);

/// Scalar symbol of L_0 on harmonic alpha.
Cplx L0_symbol(int alpha, const ReductionParams& rp);

/// Sigma coefficients re-derived by assembling the order-1/N^3 harmonic-1
/// determining equation from the operator calculus (linear slices plus the
/// nonlinear harmonic pairings). Independent of sigma_coefficients.
SigmaCoefficients sigma_from_assembly(const ReductionParams& rp);

/// (rho1, rho2) from the assembled sigmas and closures, via the secularity
/// reduction. Independent of the closed forms in rho_coefficients.
std::pair<Cplx, Cplx> rho_from_secularity(const ReductionParams& rp);

// ---- determining equations on sampled fields ----------------------------

/// One harmonic amplitude u_k^{(alpha)} sampled over slow indices.
struct HarmonicField {
    int alpha = 0;
    int k = 1;
    Field data;
};

struct Order2Fields {
    std::optional<Field> u10;  // u_1^{(0)} over (n1, m1)
    std::optional<Field> u11;  // u_1^{(1)} over (n1, m1)
    std::optional<Field> u22;  // u_2^{(2)} over (n1, m1)
};

/// Left minus right side of the order-1/N^2 determining equation for the
/// selected harmonic, with formal deltas realized as forward stencils at the
/// reduction's slow-varyness order.
Field determining_residual_order2(const Order2Fields& fields, const ReductionParams& rp,
                                  int alpha);

// ---- slow fields given in closed form -----------------------------------

/// A slow-lattice field known analytically together with the derivatives the
/// order-by-order equations need.
struct SlowFieldEval {
    std::function<Cplx(double n2, double m2)> value;
    std::function<Cplx(double, double)> d_n2;
    std::function<Cplx(double, double)> d2_n2;
    std::function<Cplx(double, double)> d_m2;
};

struct SecularitySplitResult {
    double max_secular_lhs = 0;      // (sigma1 d_n1 + sigma2 d_m1) u_2^{(1)}
    double max_reduced_residual = 0; // reduced dNLS residual on u_1^{(1)}
    double max_equivalence_gap = 0;  // |R(3.15) + i sigma6 R(3.16)| cellwise
};

/// Evaluates the secularity split on closed-form fields over a slab of the
/// slow lattice: u21 may be empty (treated as zero). Derivatives are exact.
SecularitySplitResult secularity_split(const SlowFieldEval& u11,
                                       const std::optional<SlowFieldEval>& u21,
                                       const ReductionParams& rp, double n2_lo, double n2_hi,
                                       int n_samples, double m2);

// ---- reconstruction ------------------------------------------------------

struct AssemblyWindow {
    double n2_half_width = 6.0;  // slow window around the n2 origin
    int m_rows = 4;              // fast rows in m
};

struct AssembledField {
    Field u;            // real-valued approximation sampled on the fast box
    long long n_lo = 0; // fast index of the first column
    double max_abs = 0; // max |u| over the box
};

/// Lowest-order reconstruction
///   u = (1/N)[u11 E + cc + u10] + (1/N^2)[alpha2 u11^2 E^2 + cc],
/// E = e^{i(kappa n - omega m)}, with slow arguments n2 = (n M1 + gamma m M1~)/N
/// and m2 = m M2~/N^2 evaluated exactly. sq_antideriv must be the n2
/// antiderivative of |u11|^2 (the u10 closure is alpha1 times it).
AssembledField assemble_approximation_closed(
    const ReductionParams& rp, const SlowFieldEval& u11,
    const std::function<double(double n2, double m2)>& sq_antideriv,
    const AssemblyWindow& window = {});

/// Grid-sampled variant: u11 given on an integer (n2, m2) slow lattice;
/// fast points map to the nearest slow sample (largest mapping offset is
/// recorded). The u10 closure uses the cumulative-sum antiderivative.
struct SampledAssembly {
    AssembledField field;
    double max_sample_offset = 0;
};
SampledAssembly assemble_approximation(const HarmonicField& u11, const ReductionParams& rp,
                                       const AssemblyWindow& window = {});

struct ConvergenceRow {
    int N = 0;
    double max_abs_residual = 0;
    double max_abs_u = 0;
    double rel_residual = 0;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double slope = 0;  // least-squares log-log slope of rel_residual vs N
};

/// Sweeps N, reassembling the approximation and measuring the lpKdV residual
/// of the reconstructed field; the fitted slope is the artifact's core
/// quantitative check. threads > 1 runs the independent N rows concurrently;
/// results are gathered in list order either way.
ConvergenceResult convergence_sweep(double p, double q, double kappa, int gamma, double r,
                                    double M2t, int ell, const std::vector<int>& Ns,
                                    const SlowFieldEval& u11,
                                    const std::function<double(double, double)>& sq_antideriv,
                                    const AssemblyWindow& window = {}, int threads = 1);

/// Least-squares slope of log(y) against log(x); NaN when any y is zero.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace latms::ms
