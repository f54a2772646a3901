#pragma once

#include "latmscale/combinatorics.hpp"
#include "latmscale/rational.hpp"

#include <algorithm>
#include <complex>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace latms::ops {

enum class IndexKind { Fast, Slow };

/// A named lattice direction. Fast indices carry plain integer shifts,
/// slow ones carry difference/derivative operators and a scale level
/// (level i means the direction varies on the 1/N^i scale).
struct LatticeIndex {
    std::string name;
    IndexKind kind = IndexKind::Fast;
    int level = 0;

    static LatticeIndex fast(std::string n) { return {std::move(n), IndexKind::Fast, 0}; }
    static LatticeIndex slow(std::string n, int level) {
        return {std::move(n), IndexKind::Slow, level};
    }
};

enum class DiffVariant { Forward, Backward, Symmetric };

enum class OpKind {
    Delta,  // finite-difference operator of some variant
    Del     // formal derivative (log of the unit shift)
};

struct IndexPower {
    OpKind kind = OpKind::Del;
    DiffVariant variant = DiffVariant::Forward;  // used when kind == Delta
    int exp = 0;

    friend bool operator==(const IndexPower& a, const IndexPower& b) {
        return a.kind == b.kind && a.exp == b.exp &&
               (a.kind == OpKind::Del || a.variant == b.variant);
    }
    friend bool operator<(const IndexPower& a, const IndexPower& b) {
        if (a.kind != b.kind) return a.kind < b.kind;
        if (a.kind == OpKind::Delta && a.variant != b.variant) return a.variant < b.variant;
        return a.exp < b.exp;
    }
};

/// One product of fast shifts and per-index operator powers, graded by a
/// power of 1/N. Operators on distinct indices commute; the maps give a
/// canonical ordering by index name.
struct OperatorMonomial {
    std::map<std::string, int> shifts;       // fast partial shifts, name -> offset
    std::map<std::string, IndexPower> ops;   // slow-index operator powers
    int invN = 0;

    friend bool operator==(const OperatorMonomial& a, const OperatorMonomial& b) {
        return a.invN == b.invN && a.shifts == b.shifts && a.ops == b.ops;
    }
    friend bool operator<(const OperatorMonomial& a, const OperatorMonomial& b) {
        if (a.invN != b.invN) return a.invN < b.invN;
        if (a.shifts != b.shifts)
            return std::lexicographical_compare(a.shifts.begin(), a.shifts.end(),
                                                b.shifts.begin(), b.shifts.end());
        return std::lexicographical_compare(a.ops.begin(), a.ops.end(), b.ops.begin(),
                                            b.ops.end());
    }

    bool is_identity() const { return shifts.empty() && ops.empty() && invN == 0; }

    int op_degree(const std::string& index) const {
        auto it = ops.find(index);
        return it == ops.end() ? 0 : it->second.exp;
    }

    OperatorMonomial& with_shift(const std::string& index, int offset) {
        if (offset != 0) {
            shifts[index] += offset;
            if (shifts[index] == 0) shifts.erase(index);
        }
        return *this;
    }
    OperatorMonomial& with_del(const std::string& index, int exp) {
        return with_op(index, {OpKind::Del, DiffVariant::Forward, exp});
    }
    OperatorMonomial& with_delta(const std::string& index, DiffVariant v, int exp) {
        return with_op(index, {OpKind::Delta, v, exp});
    }
    OperatorMonomial& with_invN(int k) {
        invN += k;
        return *this;
    }

    OperatorMonomial& with_op(const std::string& index, IndexPower p) {
        if (p.exp == 0) return *this;
        auto it = ops.find(index);
        if (it == ops.end()) {
            ops.emplace(index, p);
        } else {
            if (it->second.kind != p.kind ||
                (p.kind == OpKind::Delta && it->second.variant != p.variant))
                throw std::invalid_argument("OperatorMonomial: mixed operator kinds on index " +
                                            index);
            it->second.exp += p.exp;
        }
        return *this;
    }

    /// Product of two commuting monomials. Throws when the same index would
    /// carry operators of different kinds.
    static OperatorMonomial product(const OperatorMonomial& a, const OperatorMonomial& b) {
        OperatorMonomial r = a;
        for (const auto& [name, off] : b.shifts) r.with_shift(name, off);
        for (const auto& [name, p] : b.ops) r.with_op(name, p);
        r.invN += b.invN;
        return r;
    }
};

inline OperatorMonomial mono() { return {}; }

constexpr int kUnboundedInvN = 1 << 20;

/// Finite sum of operator monomials with scalar coefficients, truncated both
/// in the 1/N grading (trunc_invN) and in the per-index operator degree
/// (ell, the slow-varyness order).
template <class K>
class OperatorSeries {
  public:
    using Coeff = K;
    using Terms = std::map<OperatorMonomial, K>;

    OperatorSeries() = default;
    OperatorSeries(int trunc_invN, int ell) : trunc_invN_(trunc_invN), ell_(ell) {}

    static OperatorSeries identity(int trunc_invN, int ell) {
        OperatorSeries s(trunc_invN, ell);
        s.add_term(mono(), detail::scalar_traits<K>::from_rational(Rational(1)));
        return s;
    }
    static OperatorSeries zero(int trunc_invN, int ell) { return OperatorSeries(trunc_invN, ell); }

    int trunc_invN() const { return trunc_invN_; }
    int ell() const { return ell_; }
    const Terms& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    /// Truncation-aware insertion; silently drops terms beyond either bound.
    void add_term(const OperatorMonomial& m, const K& c) {
        if (detail::scalar_traits<K>::is_zero(c)) return;
        if (m.invN > trunc_invN_) return;
        for (const auto& [name, p] : m.ops)
            if (p.exp > ell_) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(m, c);
        } else {
            it->second += c;
            if (detail::scalar_traits<K>::is_zero(it->second)) terms_.erase(it);
        }
    }

    K coeff(const OperatorMonomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? K{} : it->second;
    }

    OperatorSeries& operator+=(const OperatorSeries& o) {
        check_compatible(o);
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    OperatorSeries& operator-=(const OperatorSeries& o) {
        check_compatible(o);
        for (const auto& [m, c] : o.terms_) add_term(m, K{} - c);
        return *this;
    }
    friend OperatorSeries operator+(OperatorSeries a, const OperatorSeries& b) { return a += b; }
    friend OperatorSeries operator-(OperatorSeries a, const OperatorSeries& b) { return a -= b; }

    OperatorSeries scaled(const K& f) const {
        OperatorSeries r(trunc_invN_, ell_);
        for (const auto& [m, c] : terms_) r.add_term(m, c * f);
        return r;
    }

    friend bool operator==(const OperatorSeries& a, const OperatorSeries& b) {
        return a.terms_ == b.terms_;
    }

  private:
    void check_compatible(const OperatorSeries& o) const {
        if (ell_ != o.ell_)
            throw std::invalid_argument("OperatorSeries: mismatched slow-varyness orders");
    }

    Terms terms_;
    int trunc_invN_ = kUnboundedInvN;
    int ell_ = 0;
};

template <class K>
OperatorSeries<K> series_multiply(const OperatorSeries<K>& a, const OperatorSeries<K>& b) {
    if (a.ell() != b.ell())
        throw std::invalid_argument("series_multiply: mismatched slow-varyness orders");
    OperatorSeries<K> r(std::min(a.trunc_invN(), b.trunc_invN()), a.ell());
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) {
            if (ma.invN + mb.invN > r.trunc_invN()) continue;
            r.add_term(OperatorMonomial::product(ma, mb), ca * cb);
        }
    return r;
}

template <class K>
OperatorSeries<K> series_pow(const OperatorSeries<K>& a, int e) {
    OperatorSeries<K> r = OperatorSeries<K>::identity(a.trunc_invN(), a.ell());
    for (int i = 0; i < e; ++i) r = series_multiply(r, a);
    return r;
}

/// delta = log of the unit shift, as a series in finite differences of the
/// chosen variant, truncated at degree ell:
///   forward    sum (-1)^{i-1}/i (D+)^i
///   backward   sum 1/i (D-)^i
///   symmetric  sum P_{i-1}(0)/i (Ds)^i
template <class K>
OperatorSeries<K> delta_series(const std::string& index, DiffVariant variant, int ell) {
    OperatorSeries<K> s(kUnboundedInvN, ell);
    for (int i = 1; i <= ell; ++i) {
        Rational c;
        switch (variant) {
            case DiffVariant::Forward:
                c = Rational((i % 2 == 1) ? 1 : -1, i);
                break;
            case DiffVariant::Backward:
                c = Rational(1, i);
                break;
            case DiffVariant::Symmetric:
                c = exact::legendre_at_zero(i - 1) / i;
                break;
        }
        if (c == 0) continue;
        s.add_term(mono().with_delta(index, variant, i),
                   detail::scalar_traits<K>::from_rational(c));
    }
    return s;
}

template <class K>
OperatorSeries<K> fast_shift_series(const std::string& index, int offset, int trunc_invN,
                                    int ell) {
    OperatorSeries<K> s(trunc_invN, ell);
    s.add_term(mono().with_shift(index, offset),
               detail::scalar_traits<K>::from_rational(Rational(1)));
    return s;
}

/// Partial-shift exponential exp(eps * delta_index) with eps = M / N^level,
/// expanded through 1/N^trunc and operator degree ell:
///   sum_i M^i / i! * delta_index^i * (1/N)^{i*level}
template <class K>
OperatorSeries<K> exp_scaled_delta(const std::string& index, const K& M, int level, int trunc,
                                   int ell) {
    if (level < 1) throw std::invalid_argument("exp_scaled_delta: level must be >= 1");
    OperatorSeries<K> s(trunc, ell);
    K mpow = detail::scalar_traits<K>::from_rational(Rational(1));
    for (int i = 0; i * level <= trunc && i <= ell; ++i) {
        if (i > 0) mpow *= M;
        K c = mpow * detail::scalar_traits<K>::from_rational(Rational(1, factorial(i)));
        s.add_term(mono().with_del(index, i).with_invN(i * level), c);
    }
    return s;
}

/// Change of lattice: expresses Delta_src^j as a polynomial in Delta_dst of
/// degree <= ell, with coefficients j! P_{i,j}(omega) / i!. Forward variant.
template <class K>
OperatorSeries<K> change_of_lattice(int j, const Rational& omega, const std::string& dst,
                                    int ell) {
    if (j < 1) throw std::invalid_argument("change_of_lattice: j must be >= 1");
    OperatorSeries<K> s(kUnboundedInvN, ell);
    const BigInt jf = factorial(j);
    for (int i = j; i <= ell; ++i) {
        Rational c = Rational(jf, factorial(i)) * exact::lattice_coeff_P(i, j, omega);
        if (c == 0) continue;
        s.add_term(mono().with_delta(dst, DiffVariant::Forward, i),
                   detail::scalar_traits<K>::from_rational(c));
    }
    return s;
}

/// Inverse of change_of_lattice (Q coefficients).
template <class K>
OperatorSeries<K> change_of_lattice_inverse(int j, const Rational& omega, const std::string& dst,
                                            int ell) {
    if (omega == 0) throw std::domain_error("change_of_lattice_inverse: omega must be nonzero");
    return change_of_lattice<K>(j, Rational(1) / omega, dst, ell);
}

/// Substitutes every formal-derivative power by its finite-difference series
/// of the given variant at the series' stored ell.
template <class K>
OperatorSeries<K> expand_del(const OperatorSeries<K>& s, DiffVariant variant) {
    OperatorSeries<K> r(s.trunc_invN(), s.ell());
    for (const auto& [m, c] : s.terms()) {
        OperatorMonomial base;
        base.shifts = m.shifts;
        base.invN = m.invN;
        OperatorSeries<K> acc(s.trunc_invN(), s.ell());
        acc.add_term(base, c);
        for (const auto& [name, p] : m.ops) {
            if (p.kind == OpKind::Del) {
                acc = series_multiply(acc,
                                      series_pow(delta_series<K>(name, variant, s.ell()), p.exp));
            } else {
                OperatorSeries<K> d(s.trunc_invN(), s.ell());
                d.add_term(mono().with_delta(name, p.variant, p.exp),
                           detail::scalar_traits<K>::from_rational(Rational(1)));
                acc = series_multiply(acc, d);
            }
        }
        r += acc;
    }
    return r;
}

/// The 1/N^i slice of a graded series, returned as a pure operator (invN
/// grading removed).
template <class K>
OperatorSeries<K> grade_slice(const OperatorSeries<K>& s, int i) {
    OperatorSeries<K> r(kUnboundedInvN, s.ell());
    for (const auto& [m, c] : s.terms()) {
        if (m.invN != i) continue;
        OperatorMonomial g = m;
        g.invN = 0;
        r.add_term(g, c);
    }
    return r;
}

/// Replaces each fast shift T_name^k by the scalar phase^k. Used to project
/// an operator onto a single harmonic of a carrier wave.
inline OperatorSeries<std::complex<double>> substitute_fast_phases(
    const OperatorSeries<std::complex<double>>& s,
    const std::map<std::string, std::complex<double>>& phases) {
    OperatorSeries<std::complex<double>> r(s.trunc_invN(), s.ell());
    for (const auto& [m, c] : s.terms()) {
        std::complex<double> f = c;
        OperatorMonomial g;
        g.ops = m.ops;
        g.invN = m.invN;
        for (const auto& [name, off] : m.shifts) {
            auto it = phases.find(name);
            if (it == phases.end())
                throw std::invalid_argument("substitute_fast_phases: no phase for index " + name);
            f *= std::pow(it->second, off);
        }
        r.add_term(g, f);
    }
    return r;
}

inline OperatorSeries<std::complex<double>> to_complex_series(
    const OperatorSeries<CRational>& s) {
    OperatorSeries<std::complex<double>> r(s.trunc_invN(), s.ell());
    for (const auto& [m, c] : s.terms()) r.add_term(m, c.to_complex());
    return r;
}

/// Scalar obtained by substituting every operator with its plane-wave symbol:
/// shifts T -> e^{i theta}, D+ -> e^{i theta}-1, D- -> 1-e^{-i theta},
/// Ds -> i sin(theta), formal delta -> i theta, and 1/N^k -> N^{-k}.
template <class K>
std::complex<double> series_symbol(const OperatorSeries<K>& s,
                                   const std::map<std::string, double>& thetas, double N = 1.0) {
    std::complex<double> total = 0.0;
    const std::complex<double> I(0.0, 1.0);
    for (const auto& [m, c] : s.terms()) {
        std::complex<double> v = detail::scalar_traits<K>::to_complex(c);
        v *= std::pow(N, -m.invN);
        for (const auto& [name, off] : m.shifts) {
            auto it = thetas.find(name);
            if (it == thetas.end())
                throw std::invalid_argument("series_symbol: no angle for index " + name);
            v *= std::exp(I * (it->second * static_cast<double>(off)));
        }
        for (const auto& [name, p] : m.ops) {
            auto it = thetas.find(name);
            if (it == thetas.end())
                throw std::invalid_argument("series_symbol: no angle for index " + name);
            const double th = it->second;
            std::complex<double> base;
            if (p.kind == OpKind::Del) {
                base = I * th;
            } else {
                switch (p.variant) {
                    case DiffVariant::Forward:
                        base = std::exp(I * th) - 1.0;
                        break;
                    case DiffVariant::Backward:
                        base = 1.0 - std::exp(-I * th);
                        break;
                    case DiffVariant::Symmetric:
                        base = I * std::sin(th);
                        break;
                }
            }
            v *= std::pow(base, p.exp);
        }
        total += v;
    }
    return total;
}

enum class ShiftKind { Tn, Tm, TnTm };

/// Multi-lattice expansions of the total shift operators: a fast partial
/// shift times the partial-shift exponentials of every slow direction it
/// drags along (one slow n-direction, trunc slow m-directions with scale
/// levels 1..trunc). Index names are the canonical n, m, n1, m1, m2, ...
template <class K>
OperatorSeries<K> shift_expansion(ShiftKind which, const K& M1, const std::vector<K>& Mtilde,
                                  int trunc, int ell) {
    auto factor_n = [&] {
        return series_multiply(fast_shift_series<K>("n", 1, trunc, ell),
                               exp_scaled_delta<K>("n1", M1, 1, trunc, ell));
    };
    auto factor_m = [&] {
        auto s = fast_shift_series<K>("m", 1, trunc, ell);
        for (int i = 1; i <= trunc && i <= static_cast<int>(Mtilde.size()); ++i) {
            s = series_multiply(
                s, exp_scaled_delta<K>("m" + std::to_string(i), Mtilde[i - 1], i, trunc, ell));
        }
        return s;
    };
    switch (which) {
        case ShiftKind::Tn:
            return factor_n();
        case ShiftKind::Tm:
            return factor_m();
        case ShiftKind::TnTm:
            return series_multiply(factor_n(), factor_m());
    }
    throw std::logic_error("shift_expansion: bad kind");
}

namespace detail_fmt {

inline std::string coeff_str(const CRational& c) { return c.str(); }
inline std::string coeff_str(const std::complex<double>& c) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << c.real() << (c.imag() < 0 ? "" : "+") << c.imag() << "i)";
    return os.str();
}

}  // namespace detail_fmt

inline const char* variant_tag(DiffVariant v) {
    switch (v) {
        case DiffVariant::Forward:
            return "D+";
        case DiffVariant::Backward:
            return "D-";
        case DiffVariant::Symmetric:
            return "Ds";
    }
    return "?";
}

/// Deterministic canonical rendering, ordered by (1/N grade, monomial).
template <class K>
std::string pretty(const OperatorSeries<K>& s) {
    if (s.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : s.terms()) {
        if (!first) os << " + ";
        first = false;
        os << detail_fmt::coeff_str(c);
        for (const auto& [name, off] : m.shifts) {
            os << " T[" << name << "]";
            if (off != 1) os << "^" << off;
        }
        for (const auto& [name, p] : m.ops) {
            os << " " << (p.kind == OpKind::Del ? "d" : variant_tag(p.variant)) << "[" << name
               << "]";
            if (p.exp != 1) os << "^" << p.exp;
        }
        if (m.invN > 0) {
            os << " /N";
            if (m.invN > 1) os << "^" << m.invN;
        }
    }
    return os.str();
}

}  // namespace latms::ops
