// Batch front end: reduction coefficient reports, dispersion tables,
// reconstruction convergence sweeps, soliton validation, the continuous
// comparison chain, and operator-series dumps.

#include "CLI11.hpp"

#include "latmscale/multiscale.hpp"
#include "latmscale/nls.hpp"
#include "latmscale/report.hpp"

#include <cmath>
#include <complex>
#include <cstdlib>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

using namespace latms;
using Cplx = std::complex<double>;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitCheckFailed = 2;

struct Tolerances {
    std::map<std::string, double> values = {
        {"m_imag", 1e-10},           // imaginary parts of M1, M1~
        {"coeff_identity", 1e-10},   // closed forms vs assembled coefficients
        {"dispersion_symbol", 1e-10},
        {"dnls_closed", 1e-10},      // soliton residual, closed-form mode
        {"zc_slope_lo", 1.8},
        {"zc_slope_hi", 2.2},
        {"zc_floor_factor", 10.0},
        {"conv_slope_lo", 1.7},
        {"conv_slope_hi", 2.3},
        {"pkdv_slope_min", 2.0},
    };

    double get(const std::string& name) const { return values.at(name); }

    void apply_overrides(const std::vector<std::string>& overrides) {
        for (const auto& ov : overrides) {
            const auto eq = ov.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("tol-override must be NAME=VALUE: " + ov);
            const std::string name = ov.substr(0, eq);
            if (values.find(name) == values.end())
                throw std::invalid_argument("unknown tolerance: " + name);
            values[name] = std::stod(ov.substr(eq + 1));
        }
    }
};

struct ReductionCli {
    double p = 2.0, q = 1.0;
    double kappa = std::numbers::pi / 2;
    int gamma = 1;
    double r = 1.0;
    double M2t = 1.0;
    int N = 16;
    int ell = 6;
    bool integerize = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--p", p, "lpKdV parameter p")->capture_default_str();
        cmd->add_option("--q", q, "lpKdV parameter q")->capture_default_str();
        cmd->add_option("--kappa", kappa, "carrier wavenumber")->capture_default_str();
        cmd->add_option("--gamma", gamma, "characteristic direction, +1 or -1")
            ->capture_default_str();
        cmd->add_option("--r", r, "modulus of S")->capture_default_str();
        cmd->add_option("--m2t", M2t, "slow-time integer M2~")->capture_default_str();
        cmd->add_option("--N", N, "scale separation parameter")->capture_default_str();
        cmd->add_option("--ell", ell, "slow-varyness order")->capture_default_str();
        cmd->add_flag("--integerize", integerize, "rescale r so M1 hits an integer");
    }

    ms::ReductionParams make() const {
        if (std::abs(std::sin(kappa / 2)) < 1e-12)
            throw std::invalid_argument("kappa = 0 (mod 2 pi) hits the alpha2 pole");
        ms::ReductionOptions opts;
        opts.integerize = integerize;
        return ms::ReductionParams::make(p, q, kappa, gamma, r, M2t, N, ell, opts);
    }
};

struct SolitonCli {
    double u0 = 1.0, A = 0.3, B = 1.0;
    void attach(CLI::App* cmd) {
        cmd->add_option("--u0", u0, "soliton amplitude scale")->capture_default_str();
        cmd->add_option("--A", A, "grayness parameter (0 = dark)")->capture_default_str();
        cmd->add_option("--B", B, "background parameter")->capture_default_str();
    }
};

int env_threads() {
    const char* v = std::getenv("LATMSCALE_THREADS");
    if (!v) return 1;
    const int n = std::atoi(v);
    return n > 0 ? n : 1;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        io::write_file(out_path, content);
}

io::JValue complex_json(Cplx z) { return io::JValue::complex(z); }

struct CheckSet {
    io::JValue checks = io::JValue::object();
    bool all_ok = true;

    void add(const std::string& name, bool ok, double measured, double bound) {
        io::JValue c = io::JValue::object();
        c.set("pass", ok);
        c.set("measured", measured);
        c.set("bound", bound);
        checks.set(name, std::move(c));
        all_ok = all_ok && ok;
    }
    void add_below(const std::string& name, double measured, double bound) {
        add(name, measured <= bound, measured, bound);
    }
};

// ---- coeffs ---------------------------------------------------------------

int cmd_coeffs(const ReductionCli& red, const Tolerances& tol, const std::string& out) {
    const auto rp = red.make();
    const auto sc = ms::sigma_coefficients(rp);
    const auto assembled = ms::sigma_from_assembly(rp);
    const auto forms = ms::rho_forms(rp);
    const auto [sr1, sr2] = ms::rho_from_secularity(rp);

    CheckSet checks;
    const double mscale = std::max(1.0, std::abs(rp.M1));
    checks.add_below("m1_imag", std::abs(rp.M1.imag()), tol.get("m_imag") * mscale);
    checks.add_below("m1t_imag", std::abs(rp.M1t.imag()), tol.get("m_imag") * mscale);

    const auto [f1, f1t] = ms::solve_M_coefficients_onshell_form(rp.lp, rp.kappa, rp.omega,
                                                                 rp.gamma, rp.S);
    checks.add_below("m_forms_agree",
                     std::max(std::abs(f1 - rp.M1), std::abs(f1t - rp.M1t)),
                     tol.get("coeff_identity") * mscale);

    double sigma_gap = 0;
    for (int i = 1; i <= 9; ++i)
        sigma_gap = std::max(sigma_gap, std::abs(sc.sigma[i] - assembled.sigma[i]) /
                                            std::max(1.0, std::abs(sc.sigma[i])));
    checks.add_below("sigma_assembly_match", sigma_gap, tol.get("coeff_identity"));

    const double g = rp.gamma;
    const Cplx E = std::exp(Cplx(0, rp.kappa));
    double inter_gap = 0;
    auto gap = [&](Cplx a, Cplx b) {
        inter_gap = std::max(inter_gap, std::abs(a - b) / std::max(1.0, std::abs(a)));
    };
    gap(sc.sigma[2], -g * sc.sigma[1]);
    gap(sc.sigma[3], 0.5 * g * rp.S * (rp.lp.mu - rp.lp.zeta * E) * sc.sigma[1]);
    gap(sc.sigma[4], sc.sigma[1] * sc.sigma[1] / (2.0 * (rp.lp.mu - rp.lp.zeta * E)));
    gap(sc.sigma[5], -g * rp.lp.mu * sc.sigma[1] * sc.sigma[1] /
                         (rp.lp.mu * rp.lp.mu - rp.lp.zeta * rp.lp.zeta));
    gap(sc.sigma[6], rp.M2t * (rp.lp.mu - rp.lp.zeta * E));
    checks.add("sigma_interrelations", inter_gap < 1e-12, inter_gap, 1e-12);

    checks.add_below("alpha_assembly_match",
                     std::max(std::abs(sc.alpha1 - assembled.alpha1),
                              std::abs(sc.alpha2 - assembled.alpha2)),
                     tol.get("coeff_identity") * std::max(1.0, std::abs(sc.alpha1)));

    checks.add_below("rho_forms_agree",
                     std::max(std::abs(forms.complex1 - forms.real1),
                              std::abs(forms.complex2 - forms.real2)),
                     tol.get("coeff_identity") * std::max(1.0, std::abs(forms.real1)));
    checks.add_below("rho_secularity_match",
                     std::max(std::abs(sr1 - sc.rho1), std::abs(sr2 - sc.rho2)),
                     tol.get("coeff_identity") * std::max(1.0, std::abs(sc.rho1)));
    checks.add_below("rho_imag",
                     std::max(std::abs(sr1.imag()), std::abs(sr2.imag())),
                     tol.get("m_imag"));
    checks.add("defocusing", sc.rho1 * sc.rho2 < 0, sc.rho1 * sc.rho2, 0.0);

    io::JValue doc = io::JValue::object();
    io::JValue inputs = io::JValue::object();
    inputs.set("p", red.p).set("q", red.q).set("mu", rp.lp.mu).set("zeta", rp.lp.zeta);
    inputs.set("kappa", rp.kappa).set("omega", rp.omega).set("gamma", rp.gamma);
    inputs.set("r", rp.r).set("theta", rp.theta).set("M2t", rp.M2t);
    inputs.set("N", rp.N).set("ell", rp.ell);
    doc.set("inputs", std::move(inputs));
    doc.set("S", complex_json(rp.S));
    doc.set("M1", complex_json(rp.M1));
    doc.set("M1t", complex_json(rp.M1t));
    doc.set("m1t_positive", rp.m1t_positive);
    doc.set("s_branch_flipped", rp.s_branch_flipped);
    if (red.integerize) doc.set("integerize_mismatch", rp.integerize_mismatch);
    doc.set("alpha1", complex_json(sc.alpha1));
    doc.set("alpha2", complex_json(sc.alpha2));
    io::JValue sig = io::JValue::array();
    for (int i = 1; i <= 9; ++i) sig.push(complex_json(sc.sigma[i]));
    doc.set("sigma", std::move(sig));
    doc.set("rho1", sc.rho1);
    doc.set("rho2", sc.rho2);
    doc.set("rho1_complex_form", complex_json(forms.complex1));
    doc.set("rho2_complex_form", complex_json(forms.complex2));
    doc.set("defocusing", sc.rho1 * sc.rho2 < 0);
    doc.set("checks", std::move(checks.checks));
    doc.set("all_checks_pass", checks.all_ok);
    emit(out, doc.dump());
    return checks.all_ok ? kExitOk : kExitCheckFailed;
}

// ---- dispersion -------------------------------------------------------------

int cmd_dispersion(double p, double q, const std::vector<double>& grid_spec,
                   const Tolerances& tol, const std::string& out) {
    if (grid_spec.size() != 3 || grid_spec[2] < 2)
        throw std::invalid_argument("--kappa-grid wants LO HI COUNT with COUNT >= 2");
    const lpkdv::LpkdvParams lp(p, q);
    const int count = static_cast<int>(grid_spec[2]);
    io::CsvWriter csv({"kappa", "omega", "abs_linear_symbol"});
    bool ok = true;
    for (int i = 0; i < count; ++i) {
        const double kappa = grid_spec[0] + (grid_spec[1] - grid_spec[0]) * i / (count - 1);
        const double omega = lpkdv::dispersion(kappa, lp);
        const double sym = std::abs(lpkdv::linear_symbol(kappa, omega, lp));
        ok = ok && sym < tol.get("dispersion_symbol");
        csv.add_row({io::CsvWriter::cell(kappa), io::CsvWriter::cell(omega),
                     io::CsvWriter::cell(sym)});
    }
    emit(out, csv.str());
    return ok ? kExitOk : kExitCheckFailed;
}

// ---- convergence ------------------------------------------------------------

int cmd_convergence(const ReductionCli& red, const SolitonCli& sol,
                    const std::vector<int>& Ns, double window, int m_rows,
                    const Tolerances& tol, const std::string& out) {
    if (Ns.size() < 3) throw std::invalid_argument("--N-list wants at least 3 entries");
    const auto rp = red.make();
    const auto [rho1, rho2] = ms::rho_coefficients(rp);

    ms::SlowFieldEval eval;
    std::function<double(double, double)> anti;
    if (sol.u0 == 0.0) {
        eval.value = [](double, double) { return Cplx(0); };
        eval.d_n2 = eval.value;
        eval.d2_n2 = eval.value;
        eval.d_m2 = eval.value;
        anti = [](double, double) { return 0.0; };
    } else {
        const nls::SolitonParams sp(sol.u0, sol.A, sol.B, rho1, rho2);
        eval = nls::soliton_eval(sp);
        anti = [sp](double n2, double m2) { return nls::soliton_sq_antideriv(sp, n2, m2); };
    }

    const auto res = ms::convergence_sweep(red.p, red.q, red.kappa, red.gamma, red.r, red.M2t,
                                           red.ell, Ns, eval, anti,
                                           {window, m_rows}, env_threads());
    io::CsvWriter csv({"N", "max_abs_residual", "max_abs_u", "rel_residual"});
    for (const auto& row : res.rows)
        csv.add_row({io::CsvWriter::cell(row.N), io::CsvWriter::cell(row.max_abs_residual),
                     io::CsvWriter::cell(row.max_abs_u), io::CsvWriter::cell(row.rel_residual)});
    csv.add_comment("slope fit: least squares on log(rel_residual) vs log(N)");
    csv.add_comment("fitted_slope = " + io::CsvWriter::cell(res.slope));
    emit(out, csv.str());

    if (std::isnan(res.slope)) return kExitOk;  // all-zero residuals: nothing to check
    const bool ok = res.slope >= tol.get("conv_slope_lo") && res.slope <= tol.get("conv_slope_hi");
    return ok ? kExitOk : kExitCheckFailed;
}

// ---- soliton-validate ---------------------------------------------------------

int cmd_soliton_validate(const ReductionCli& red, const SolitonCli& sol,
                         std::optional<double> rho1_cli, std::optional<double> rho2_cli,
                         double eta_re, const std::string& format, const Tolerances& tol,
                         const std::string& out) {
    double rho1, rho2;
    io::JValue doc = io::JValue::object();
    if (rho1_cli && rho2_cli) {
        rho1 = *rho1_cli;
        rho2 = *rho2_cli;
    } else {
        const auto rp = red.make();
        std::tie(rho1, rho2) = ms::rho_coefficients(rp);
    }
    if (!(rho1 * rho2 < 0))
        throw std::invalid_argument("focusing-sign input rejected: rho1*rho2 >= 0");
    const nls::SolitonParams sp(sol.u0, sol.A, sol.B, rho1, rho2);

    double residual = 0;
    for (int i = 0; i < 200; ++i) {
        const double n2 = -10.0 + 20.0 * i / 199.0;
        residual = std::max(residual, std::abs(nls::dnls_residual_closed_form(sp, n2, 0.37)));
    }

    const auto u = nls::lax_normalized_soliton(sp);
    const Cplx eta(eta_re, 0.0);
    std::vector<double> hs = {0.1, 0.05, 0.025}, vals;
    for (double h : hs)
        vals.push_back(nls::zero_curvature_max_central(u, eta, h, -4, 4, 33, -1, 1, 9));
    const double slope = std::log2(vals[0] / vals[2]) / 2.0;
    const double floor2 = nls::zero_curvature_max_stencil(u, eta, 2, -4, 4, 33, -1, 1, 9);

    if (format == "csv") {
        // residual-vs-h curve of the zero-curvature check
        io::CsvWriter csv({"h", "zero_curvature_residual"});
        for (std::size_t i = 0; i < hs.size(); ++i)
            csv.add_row({io::CsvWriter::cell(hs[i]), io::CsvWriter::cell(vals[i])});
        csv.add_comment("classification = " + std::string(sp.is_dark() ? "dark" : "gray"));
        csv.add_comment("fitted_slope = " + io::CsvWriter::cell(slope));
        csv.add_comment("stencil_floor_ell2 = " + io::CsvWriter::cell(floor2));
        emit(out, csv.str());
        return kExitOk;
    }

    CheckSet checks;
    checks.add_below("dnls_closed_form_residual", residual, tol.get("dnls_closed"));
    checks.add("zc_slope_in_window",
               slope >= tol.get("zc_slope_lo") && slope <= tol.get("zc_slope_hi"), slope,
               tol.get("zc_slope_hi"));
    checks.add("zc_stencil_floor_exceeds",
               floor2 > tol.get("zc_floor_factor") * vals[2], floor2,
               tol.get("zc_floor_factor") * vals[2]);

    const auto ln = nls::lax_normalization(rho1, rho2);
    doc.set("classification", sp.is_dark() ? "dark" : "gray");
    doc.set("rho1", rho1);
    doc.set("rho2", rho2);
    io::JValue spj = io::JValue::object();
    spj.set("u0", sp.u0).set("A", sp.A).set("B", sp.B);
    spj.set("eta0", sp.eta0).set("eta1", sp.eta1).set("eta2", sp.eta2).set("ue", sp.ue);
    doc.set("soliton", std::move(spj));
    io::JValue lnj = io::JValue::object();
    lnj.set("amp", ln.amp).set("time", ln.time);
    doc.set("lax_normalization", std::move(lnj));
    doc.set("dnls_closed_form_residual", residual);
    doc.set("zero_curvature_slope", slope);
    doc.set("zero_curvature_stencil_floor_ell2", floor2);
    doc.set("checks", std::move(checks.checks));
    doc.set("all_checks_pass", checks.all_ok);
    emit(out, doc.dump());
    return checks.all_ok ? kExitOk : kExitCheckFailed;
}

// ---- compare-continuous -------------------------------------------------------

int cmd_compare_continuous(double kappa, const SolitonCli& sol, double lattice_p,
                           double lattice_q, const std::vector<double>& eps_list,
                           const std::string& format, const Tolerances& tol,
                           const std::string& out) {
    const auto chain = nls::pkdv_chain(kappa);
    const auto sp = nls::continuous_soliton(sol.u0, sol.A, sol.B, kappa);

    std::vector<double> vals;
    for (double e : eps_list)
        vals.push_back(nls::pkdv_residual_fd(sp, kappa, e, -3, 3, 41, -0.5, 0.5, 7, 0.02));
    // residual ~ eps^s: the log-log fit against eps is the order directly
    const double slope = ms::loglog_slope(eps_list, vals);

    const lpkdv::LpkdvParams lp(lattice_p, lattice_q);
    const double lattice_phase_velocity = lpkdv::dispersion(kappa, lp) / kappa;
    const double continuous_phase_velocity = chain.omega / kappa;

    const bool ok = slope >= tol.get("pkdv_slope_min");

    if (format == "csv") {
        io::CsvWriter csv({"epsilon", "max_abs_pkdv_residual"});
        for (std::size_t i = 0; i < eps_list.size(); ++i)
            csv.add_row({io::CsvWriter::cell(eps_list[i]), io::CsvWriter::cell(vals[i])});
        csv.add_comment("fitted_slope = " + io::CsvWriter::cell(slope));
        emit(out, csv.str());
    } else {
        io::JValue doc = io::JValue::object();
        doc.set("kappa", kappa);
        doc.set("omega", chain.omega);
        doc.set("alpha1", chain.alpha1);
        doc.set("rho1", chain.rho1);
        doc.set("rho2", chain.rho2);
        doc.set("w22_factor", complex_json(chain.w22_factor));
        doc.set("defocusing_product", chain.rho1 * chain.rho2);
        doc.set("lattice_phase_velocity", lattice_phase_velocity);
        doc.set("continuous_phase_velocity", continuous_phase_velocity);
        io::JValue rows = io::JValue::array();
        for (std::size_t i = 0; i < eps_list.size(); ++i) {
            io::JValue row = io::JValue::object();
            row.set("epsilon", eps_list[i]);
            row.set("max_abs_pkdv_residual", vals[i]);
            rows.push(std::move(row));
        }
        doc.set("residual_sweep", std::move(rows));
        doc.set("fitted_slope", slope);
        doc.set("slope_check_pass", ok);
        emit(out, doc.dump());
    }
    return ok ? kExitOk : kExitCheckFailed;
}

// ---- series-dump ----------------------------------------------------------------

std::string monomial_key(const ops::OperatorMonomial& m) {
    std::string s;
    for (const auto& [name, off] : m.shifts) {
        s += "T[" + name + "]";
        if (off != 1) s += "^" + std::to_string(off);
        s += " ";
    }
    for (const auto& [name, p] : m.ops) {
        s += (p.kind == ops::OpKind::Del ? std::string("d") : std::string(ops::variant_tag(p.variant)));
        s += "[" + name + "]";
        if (p.exp != 1) s += "^" + std::to_string(p.exp);
        s += " ";
    }
    if (!s.empty()) s.pop_back();
    return s.empty() ? "1" : s;
}

int cmd_series_dump(const ReductionCli& red, const std::string& which, int trunc, bool pretty_out,
                    long long omega_num, long long omega_den, int max_order,
                    const std::string& out) {
    // exact lattice-change coefficient tables
    if (which == "P" || which == "Q") {
        if (omega_den == 0) throw std::invalid_argument("omega denominator must be nonzero");
        const Rational omega(omega_num, omega_den);
        io::CsvWriter csv({"i", "j", "omega_num", "omega_den", "value_num", "value_den"});
        for (int i = 0; i <= max_order; ++i)
            for (int j = 0; j <= i; ++j) {
                const Rational v = which == "P" ? exact::lattice_coeff_P(i, j, omega)
                                                : exact::lattice_coeff_Q(i, j, omega);
                std::ostringstream num, den;
                num << boost::multiprecision::numerator(v);
                den << boost::multiprecision::denominator(v);
                csv.add_row({std::to_string(i), std::to_string(j),
                             std::to_string(omega_num), std::to_string(omega_den), num.str(),
                             den.str()});
            }
        emit(out, csv.str());
        return kExitOk;
    }

    const auto rp = red.make();
    ops::OperatorSeries<Cplx> series;
    const std::vector<Cplx> Mt = {rp.M1t, Cplx(rp.M2t), Cplx(0.0)};
    if (which == "Tn")
        series = ops::shift_expansion<Cplx>(ops::ShiftKind::Tn, rp.M1, Mt, trunc, rp.ell);
    else if (which == "Tm")
        series = ops::shift_expansion<Cplx>(ops::ShiftKind::Tm, rp.M1, Mt, trunc, rp.ell);
    else if (which == "TnTm")
        series = ops::shift_expansion<Cplx>(ops::ShiftKind::TnTm, rp.M1, Mt, trunc, rp.ell);
    else if (which == "L0" || which == "L1" || which == "L2" || which == "L3")
        series = ms::linear_operator_L(which[1] - '0', rp);
    else
        throw std::invalid_argument("series-dump: unknown operator " + which);

    if (pretty_out) {
        emit(out, ops::pretty(series) + "\n");
        return kExitOk;
    }
    io::JValue doc = io::JValue::object();
    doc.set("operator", which);
    doc.set("trunc_invN", trunc);
    doc.set("ell", rp.ell);
    io::JValue terms = io::JValue::array();
    for (const auto& [m, c] : series.terms()) {
        io::JValue t = io::JValue::object();
        t.set("monomial", monomial_key(m));
        t.set("invN_power", m.invN);
        t.set("re", c.real());
        t.set("im", c.imag());
        terms.push(std::move(t));
    }
    doc.set("terms", std::move(terms));
    emit(out, doc.dump());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice-potential-KdV multiscale reduction toolkit"};
    app.set_config("--config", "", "key=value config file with [subcommand] sections");
    app.require_subcommand(1);

    std::string out_path;
    std::vector<std::string> tol_overrides;
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_option("--tol-override", tol_overrides, "NAME=VALUE tolerance override")
        ->take_all();

    ReductionCli red;
    SolitonCli sol;

    auto* coeffs = app.add_subcommand("coeffs", "full coefficient report with identity checks");
    red.attach(coeffs);

    auto* disp = app.add_subcommand("dispersion", "(kappa, omega) table");
    double dp = 2.0, dq = 1.0;
    std::vector<double> kappa_grid = {0.1, 3.0, 30};
    disp->add_option("--p", dp, "lpKdV parameter p")->capture_default_str();
    disp->add_option("--q", dq, "lpKdV parameter q")->capture_default_str();
    disp->add_option("--kappa-grid", kappa_grid, "LO HI COUNT")->expected(3);

    auto* conv = app.add_subcommand("convergence", "lpKdV residual of the reconstruction vs N");
    red.attach(conv);
    sol.attach(conv);
    std::vector<int> n_list = {8, 16, 32, 64, 128};
    double window = 6.0;
    int m_rows = 4;
    conv->add_option("--N-list", n_list, "N values (>= 3)")->expected(-1);
    conv->add_option("--window", window, "slow half-width of the fast box")
        ->capture_default_str();
    conv->add_option("--m-rows", m_rows, "fast rows in m")->capture_default_str();

    auto* sval = app.add_subcommand("soliton-validate",
                                    "gray/dark soliton residual and Lax checks");
    red.attach(sval);
    sol.attach(sval);
    std::optional<double> rho1_cli, rho2_cli;
    double eta_re = 0.3;
    std::string sval_format = "json";
    sval->add_option("--rho1", rho1_cli, "override rho1 (else from the reduction)");
    sval->add_option("--rho2", rho2_cli, "override rho2 (else from the reduction)");
    sval->add_option("--eta", eta_re, "spectral parameter (real)")->capture_default_str();
    sval->add_option("--format", sval_format, "json|csv (csv: residual-vs-h curve)")
        ->capture_default_str();

    auto* cmp = app.add_subcommand("compare-continuous",
                                   "continuous pKdV chain and reconstruction residuals");
    sol.attach(cmp);
    double cmp_kappa = 1.0, cmp_p = 2.0, cmp_q = 1.0;
    std::vector<double> eps_list = {0.1, 0.05, 0.025};
    std::string cmp_format = "json";
    cmp->add_option("--kappa", cmp_kappa, "carrier wavenumber")->capture_default_str();
    cmp->add_option("--p", cmp_p, "lattice p for the phase comparison")->capture_default_str();
    cmp->add_option("--q", cmp_q, "lattice q for the phase comparison")->capture_default_str();
    cmp->add_option("--eps-list", eps_list, "epsilon sweep")->expected(-1);
    cmp->add_option("--format", cmp_format, "json|csv")->capture_default_str();

    auto* dump = app.add_subcommand("series-dump", "operator series as JSON or text");
    red.attach(dump);
    std::string which = "TnTm";
    int trunc = 3;
    bool pretty_out = false;
    long long omega_num = 1, omega_den = 2;
    int max_order = 8;
    dump->add_option("--which", which, "Tn|Tm|TnTm|L0|L1|L2|L3 or P|Q for coefficient tables")
        ->capture_default_str();
    dump->add_option("--trunc", trunc, "1/N truncation order")->capture_default_str();
    dump->add_flag("--pretty", pretty_out, "canonical text instead of JSON");
    dump->add_option("--omega-num", omega_num, "lattice ratio numerator (P/Q tables)")
        ->capture_default_str();
    dump->add_option("--omega-den", omega_den, "lattice ratio denominator (P/Q tables)")
        ->capture_default_str();
    dump->add_option("--max-order", max_order, "largest i for P/Q tables")
        ->capture_default_str();

    // allow --out / --tol-override after the subcommand name
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        Tolerances tol;
        tol.apply_overrides(tol_overrides);
        if (coeffs->parsed()) return cmd_coeffs(red, tol, out_path);
        if (disp->parsed()) return cmd_dispersion(dp, dq, kappa_grid, tol, out_path);
        if (conv->parsed())
            return cmd_convergence(red, sol, n_list, window, m_rows, tol, out_path);
        if (sval->parsed())
            return cmd_soliton_validate(red, sol, rho1_cli, rho2_cli, eta_re, sval_format, tol, out_path);
        if (cmp->parsed())
            return cmd_compare_continuous(cmp_kappa, sol, cmp_p, cmp_q, eps_list, cmp_format,
                                          tol, out_path);
        if (dump->parsed())
            return cmd_series_dump(red, which, trunc, pretty_out, omega_num, omega_den, max_order, out_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitValidation;
}
