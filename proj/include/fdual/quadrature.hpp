#pragma once

// Globally adaptive 7/15-point Gauss-Kronrod quadrature for scalar, complex
// and Eigen-matrix valued integrands.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <type_traits>
#include <vector>

#include "fdual/errors.hpp"

namespace fdual {

struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double t_max_factor = 60.0;  // improper-integral horizon cap, units of 1/max(Gamma, pi T)
    int max_subdivisions = 20000;
};

template <class V>
struct QuadResult {
    V value;
    double error;
    int evaluations;
    bool converged;
};

namespace quad_detail {

inline double norm_of(double x) { return std::abs(x); }
template <class R>
double norm_of(const std::complex<R>& z) {
    return std::abs(z);
}
template <class Derived>
double norm_of(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : static_cast<double>(m.cwiseAbs().maxCoeff());
}

inline constexpr std::array<double, 8> xk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                          0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                          0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                          0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                          0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                          0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                          0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                          0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class V>
struct Panel {
    double a, b;
    V value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
auto gk15(const F& f, double a, double b) {
    using V = std::decay_t<decltype(f(a))>;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const V fc = f(c);
    V k = fc * wk[7];
    V g = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xk[j];
        const V f1 = f(c - dx);
        const V f2 = f(c + dx);
        const V s = f1 + f2;
        k = k + s * wk[j];
        if (j % 2 == 1) g = g + s * wg[j / 2];
    }
    k = k * h;
    g = g * h;
    const V diff = k - g;
    return Panel<V>{a, b, k, norm_of(diff)};
}

}  // namespace quad_detail

// Integrates f over [a, b], pre-split at the given interior breakpoints.
template <class F>
auto integrate(const F& f, double a, double b, const QuadratureConfig& cfg, const std::vector<double>& breaks = {}) {
    using quad_detail::Panel;
    using V = std::decay_t<decltype(f(a))>;
    std::vector<double> pts{a};
    for (double x : breaks)
        if (x > std::min(a, b) && x < std::max(a, b)) pts.push_back(x);
    pts.push_back(b);
    if (b < a) std::sort(pts.begin() + 1, pts.end() - 1, std::greater<>());
    else std::sort(pts.begin() + 1, pts.end() - 1);

    std::priority_queue<Panel<V>> heap;
    int evals = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        heap.push(quad_detail::gk15(f, pts[i], pts[i + 1]));
        evals += 15;
    }
    auto totals = [&heap]() {
        auto copy = heap;
        V sum = copy.top().value;
        double err = copy.top().error;
        copy.pop();
        while (!copy.empty()) {
            sum = sum + copy.top().value;
            err += copy.top().error;
            copy.pop();
        }
        return std::pair<V, double>(sum, err);
    };
    auto [value, error] = totals();
    int splits = 0;
    // Running sums drift; recompute them periodically.
    while (error > std::max(cfg.abs_tol, cfg.rel_tol * quad_detail::norm_of(value))) {
        if (splits >= cfg.max_subdivisions) return QuadResult<V>{value, error, evals, false};
        Panel<V> worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid == worst.a || mid == worst.b) {
            heap.push(worst);
            return QuadResult<V>{value, error, evals, false};
        }
        auto left = quad_detail::gk15(f, worst.a, mid);
        auto right = quad_detail::gk15(f, mid, worst.b);
        evals += 30;
        ++splits;
        value = value - worst.value + left.value + right.value;
        error = error - worst.error + left.error + right.error;
        heap.push(std::move(left));
        heap.push(std::move(right));
        if (splits % 64 == 0) std::tie(value, error) = totals();
    }
    std::tie(value, error) = totals();
    return QuadResult<V>{value, error, evals, true};
}

// Throws quadrature_error when the tolerance is not met.
template <class F>
auto integrate_or_throw(const F& f, double a, double b, const QuadratureConfig& cfg,
                        const std::vector<double>& breaks = {}) {
    auto r = integrate(f, a, b, cfg, breaks);
    if (!r.converged) throw quadrature_error("adaptive quadrature did not converge", r.error);
    return r.value;
}

// Equally spaced breakpoints of width w over [a, b].
inline std::vector<double> panel_breaks(double a, double b, double w, std::size_t max_panels = 100000) {
    std::vector<double> out;
    if (!(w > 0) || !std::isfinite(w)) return out;
    const double len = std::abs(b - a);
    const auto n = static_cast<std::size_t>(std::min<double>(std::ceil(len / w), static_cast<double>(max_panels)));
    for (std::size_t i = 1; i < n; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n));
    return out;
}

}  // namespace fdual
