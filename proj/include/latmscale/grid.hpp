#pragma once

#include "latmscale/opcalc.hpp"

#include <cassert>
#include <functional>
#include <numeric>
#include <optional>

namespace latms::ops {

enum class Boundary { Periodic, Clamped };

/// Complex- (or exact-rational-) valued field on a finite multi-index box.
/// Cells can be flagged invalid; clamped stencil application marks cells it
/// cannot evaluate instead of extrapolating.
template <class V>
class GridFunction {
  public:
    struct Axis {
        std::string name;
        int size = 0;
    };

    GridFunction() = default;
    GridFunction(std::vector<Axis> axes, Boundary boundary = Boundary::Periodic)
        : axes_(std::move(axes)), boundary_(boundary) {
        std::size_t n = 1;
        for (const auto& a : axes_) {
            if (a.size <= 0) throw std::invalid_argument("GridFunction: axis extent must be > 0");
            n *= static_cast<std::size_t>(a.size);
        }
        data_.assign(n, V{});
    }

    static GridFunction from_function(std::vector<Axis> axes,
                                      const std::function<V(const std::vector<int>&)>& fn,
                                      Boundary boundary = Boundary::Periodic) {
        GridFunction g(std::move(axes), boundary);
        std::vector<int> idx(g.rank(), 0);
        g.for_each_index([&](const std::vector<int>& i) { g.set(i, fn(i)); });
        return g;
    }

    int rank() const { return static_cast<int>(axes_.size()); }
    const std::vector<Axis>& axes() const { return axes_; }
    Boundary boundary() const { return boundary_; }
    std::size_t cell_count() const { return data_.size(); }

    int axis_position(const std::string& name) const {
        for (int i = 0; i < rank(); ++i)
            if (axes_[i].name == name) return i;
        return -1;
    }

    std::size_t flat(const std::vector<int>& idx) const {
        assert(static_cast<int>(idx.size()) == rank());
        std::size_t f = 0;
        for (int d = 0; d < rank(); ++d) {
            assert(idx[d] >= 0 && idx[d] < axes_[d].size);
            f = f * static_cast<std::size_t>(axes_[d].size) + static_cast<std::size_t>(idx[d]);
        }
        return f;
    }

    const V& at(const std::vector<int>& idx) const { return data_[flat(idx)]; }
    void set(const std::vector<int>& idx, V v) { data_[flat(idx)] = std::move(v); }

    bool valid(const std::vector<int>& idx) const {
        return valid_.empty() || valid_[flat(idx)] != 0;
    }
    void mark_invalid(const std::vector<int>& idx) {
        if (valid_.empty()) valid_.assign(data_.size(), 1);
        valid_[flat(idx)] = 0;
    }
    bool all_valid() const { return valid_.empty(); }

    /// Resolves an offset index according to the boundary policy; empty when
    /// the reach leaves the box in clamped mode.
    std::optional<std::vector<int>> resolve(const std::vector<int>& idx,
                                            const std::vector<int>& offset) const {
        std::vector<int> r(rank());
        for (int d = 0; d < rank(); ++d) {
            int v = idx[d] + offset[d];
            const int n = axes_[d].size;
            if (v < 0 || v >= n) {
                if (boundary_ == Boundary::Clamped) return std::nullopt;
                v = ((v % n) + n) % n;
            }
            r[d] = v;
        }
        return r;
    }

    void for_each_index(const std::function<void(const std::vector<int>&)>& fn) const {
        std::vector<int> idx(rank(), 0);
        if (data_.empty()) return;
        while (true) {
            fn(idx);
            int d = rank() - 1;
            while (d >= 0) {
                if (++idx[d] < axes_[d].size) break;
                idx[d] = 0;
                --d;
            }
            if (d < 0) break;
        }
    }

  private:
    std::vector<Axis> axes_;
    std::vector<V> data_;
    std::vector<uint8_t> valid_;
    Boundary boundary_;
};

template <class V>
struct ApplyOptions {
    DiffVariant variant = DiffVariant::Forward;  // realization of formal deltas
    std::optional<V> N;                          // required when the series is 1/N-graded
};

namespace detail_apply {

template <class V>
struct Tap {
    std::vector<int> offset;
    V weight;
};

template <class V>
void convolve_axis(std::vector<Tap<V>>& taps, int axis, DiffVariant variant, int times) {
    using ST = latms::detail::scalar_traits<V>;
    std::vector<std::pair<int, V>> kernel;
    switch (variant) {
        case DiffVariant::Forward:
            kernel = {{1, ST::from_rational(Rational(1))}, {0, ST::from_rational(Rational(-1))}};
            break;
        case DiffVariant::Backward:
            kernel = {{0, ST::from_rational(Rational(1))}, {-1, ST::from_rational(Rational(-1))}};
            break;
        case DiffVariant::Symmetric:
            kernel = {{1, ST::from_rational(Rational(1, 2))},
                      {-1, ST::from_rational(Rational(-1, 2))}};
            break;
    }
    for (int t = 0; t < times; ++t) {
        std::vector<Tap<V>> next;
        for (const auto& tap : taps)
            for (const auto& [off, w] : kernel) {
                Tap<V> n = tap;
                n.offset[axis] += off;
                n.weight *= w;
                next.push_back(std::move(n));
            }
        taps = std::move(next);
    }
}

}  // namespace detail_apply

/// Pointwise stencil application of an operator series to a grid function.
/// Formal deltas are realized through their difference series at the series'
/// stored slow-varyness order.
template <class V>
GridFunction<V> stencil_apply(const OperatorSeries<V>& series_in, const GridFunction<V>& f,
                      const ApplyOptions<V>& opts = {}) {
    using ST = latms::detail::scalar_traits<V>;
    bool has_del = false, has_grading = false;
    for (const auto& [m, c] : series_in.terms()) {
        if (m.invN > 0) has_grading = true;
        for (const auto& [name, p] : m.ops)
            if (p.kind == OpKind::Del) has_del = true;
    }
    if (has_grading && !opts.N)
        throw std::invalid_argument("apply: 1/N-graded series needs an N value");
    const OperatorSeries<V> series =
        has_del ? expand_del(series_in, opts.variant) : series_in;

    // Collect taps, merged by offset.
    std::map<std::vector<int>, V> taps;
    for (const auto& [m, c] : series.terms()) {
        for (const auto& [name, p] : m.ops)
            if (f.axis_position(name) < 0)
                throw std::domain_error("apply: grid lacks index " + name);
        for (const auto& [name, off] : m.shifts)
            if (f.axis_position(name) < 0)
                throw std::domain_error("apply: grid lacks index " + name);

        V w = c;
        if (m.invN > 0) {
            V invN = ST::from_rational(Rational(1)) / *opts.N;
            for (int k = 0; k < m.invN; ++k) w *= invN;
        }
        std::vector<detail_apply::Tap<V>> term_taps{{std::vector<int>(f.rank(), 0), w}};
        for (const auto& [name, off] : m.shifts)
            for (auto& tap : term_taps) tap.offset[f.axis_position(name)] += off;
        for (const auto& [name, p] : m.ops)
            detail_apply::convolve_axis(term_taps, f.axis_position(name), p.variant, p.exp);
        for (auto& tap : term_taps) {
            auto it = taps.find(tap.offset);
            if (it == taps.end())
                taps.emplace(std::move(tap.offset), std::move(tap.weight));
            else
                it->second += tap.weight;
        }
    }

    GridFunction<V> out(f.axes(), f.boundary());
    f.for_each_index([&](const std::vector<int>& idx) {
        V acc{};
        bool ok = true;
        for (const auto& [off, w] : taps) {
            auto src = f.resolve(idx, off);
            if (!src || !f.valid(*src)) {
                ok = false;
                break;
            }
            acc += w * f.at(*src);
        }
        if (ok)
            out.set(idx, std::move(acc));
        else
            out.mark_invalid(idx);
    });
    return out;
}

}  // namespace latms::ops
