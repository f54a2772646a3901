#include "latmscale/lpkdv.hpp"
#include "latmscale/report.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace latms::lpkdv {

namespace {

constexpr Cplx I{0.0, 1.0};

void check_fast_grid(const Field& u) {
    if (u.axis_position("n") < 0 || u.axis_position("m") < 0)
        throw std::domain_error("lpkdv: field must carry fast indices n and m");
    if (u.axes()[u.axis_position("n")].size < 2 || u.axes()[u.axis_position("m")].size < 2)
        throw std::domain_error("lpkdv: need at least a 2x2 box");
}

template <class F>
Field cell_sweep(const Field& u, F&& op) {
    check_fast_grid(u);
    const int an = u.axis_position("n");
    const int am = u.axis_position("m");
    auto axes = u.axes();
    axes[an].size -= 1;
    axes[am].size -= 1;
    Field out(axes, u.boundary());
    out.for_each_index([&](const std::vector<int>& idx) {
        auto p00 = idx, p10 = idx, p01 = idx, p11 = idx;
        p10[an] += 1;
        p01[am] += 1;
        p11[an] += 1;
        p11[am] += 1;
        if (!(u.valid(p00) && u.valid(p10) && u.valid(p01) && u.valid(p11))) {
            out.mark_invalid(idx);
            return;
        }
        out.set(idx, op(u.at(p00), u.at(p10), u.at(p01), u.at(p11)));
    });
    return out;
}

}  // namespace

LpkdvParams::LpkdvParams(double p_, double q_) : p(p_), q(q_), mu(p_ - q_), zeta(p_ + q_) {
    if (mu == 0.0) throw std::invalid_argument("LpkdvParams: p == q (mu vanishes)");
    if (zeta == 0.0) throw std::invalid_argument("LpkdvParams: p == -q (zeta vanishes)");
}

Field lpkdv_residual(const Field& u, const LpkdvParams& params) {
    const double mu = params.mu, zeta = params.zeta;
    return cell_sweep(u, [&](Cplx u00, Cplx u10, Cplx u01, Cplx u11) {
        return (mu + u01 - u10) * (zeta - u11 + u00) - mu * zeta;
    });
}

Field linear_part_residual(const Field& u, const LpkdvParams& params) {
    const double mu = params.mu, zeta = params.zeta;
    return cell_sweep(u, [&](Cplx u00, Cplx u10, Cplx u01, Cplx u11) {
        return mu * (u11 - u00) + zeta * (u10 - u01);
    });
}

Field nonlinear_part_residual(const Field& u) {
    return cell_sweep(
        u, [&](Cplx u00, Cplx u10, Cplx u01, Cplx u11) { return (u10 - u01) * (u11 - u00); });
}

double dispersion(double kappa, const LpkdvParams& params) {
    const double ratio = (params.zeta + params.mu) / (params.zeta - params.mu);
    const double half = 0.5 * kappa;
    const double c = std::cos(half);
    if (c == 0.0) return -std::numbers::pi * (ratio > 0 ? 1.0 : -1.0) * (std::sin(half) > 0 ? 1.0 : -1.0);
    return -2.0 * std::atan(ratio * std::tan(half));
}

Cplx linear_symbol(double kappa, double omega, const LpkdvParams& params) {
    return params.mu * (std::exp(I * (kappa - omega)) - 1.0) +
           params.zeta * (std::exp(I * kappa) - std::exp(-I * omega));
}

Field plane_wave(double kappa, double omega, int n_size, int m_size) {
    Field u({{"n", n_size}, {"m", m_size}}, ops::Boundary::Clamped);
    u.for_each_index([&](const std::vector<int>& idx) {
        u.set(idx, std::exp(I * (kappa * idx[0] - omega * idx[1])));
    });
    return u;
}

std::string field_csv(const Field& f) {
    const int an = f.axis_position("n");
    const int am = f.axis_position("m");
    if (an < 0 || am < 0) throw std::domain_error("field_csv: field must live on (n, m)");
    io::CsvWriter csv({"n", "m", "re", "im"});
    f.for_each_index([&](const std::vector<int>& idx) {
        if (!f.valid(idx)) return;
        const Cplx v = f.at(idx);
        csv.add_row({io::CsvWriter::cell(idx[an]), io::CsvWriter::cell(idx[am]),
                     io::CsvWriter::cell(v.real()), io::CsvWriter::cell(v.imag())});
    });
    return csv.str();
}

}  // namespace latms::lpkdv
