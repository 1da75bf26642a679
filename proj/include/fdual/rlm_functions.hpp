#pragma once

// Scalar functions of the wide-band resonant level model.
//
// k(t) = 2T sin((eps-mu) t) / sinh(pi T t)
// g(t) = int_0^t e^{-Gamma s/2} k(s) ds
// p(t) = (g(t) + e^{-Gamma t} gbar(t)) / (1 - e^{-Gamma t})
// khat(w) = int_0^inf e^{i w t} k(t) dt, continued via the digamma function.
//
// Dual parameters flip (eps, mu, Gamma) and keep T.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <tuple>
#include <vector>

#include "fdual/digamma.hpp"
#include "fdual/errors.hpp"
#include "fdual/quadrature.hpp"

namespace fdual {

struct ModelParams {
    double epsilon = 0.0;
    double mu = 0.0;
    double temperature = 1.0;
    double gamma = 1.0;

    double detuning() const { return epsilon - mu; }
    auto key() const { return std::make_tuple(epsilon, mu, temperature, gamma); }
    bool operator==(const ModelParams&) const = default;
    bool operator<(const ModelParams& o) const { return key() < o.key(); }
};

inline ModelParams dual_params(const ModelParams& th) {
    return {-th.epsilon, -th.mu, th.temperature, -th.gamma};
}

inline void validate(const ModelParams& th) {
    if (!(th.temperature > 0) || !std::isfinite(th.temperature)) throw config_error("temperature must be positive");
    if (!std::isfinite(th.epsilon) || !std::isfinite(th.mu) || !std::isfinite(th.gamma))
        throw config_error("model parameters must be finite");
}

inline double k_of_t(double t, const ModelParams& th) {
    const double D = th.detuning(), T = th.temperature;
    const double x = std::numbers::pi * T * t;
    if (x < 1e-4) {
        // sinh(x) = x (1 + x^2/6 + x^4/120)
        const double sinc = (t == 0.0) ? D : std::sin(D * t) / t;
        return 2.0 * sinc / (std::numbers::pi * (1.0 + x * x / 6.0 + x * x * x * x / 120.0));
    }
    if (x > 20.0) {
        const double e = std::exp(-x);
        return 4.0 * T * std::sin(D * t) * e / (1.0 - e * e);
    }
    return 2.0 * T * std::sin(D * t) / std::sinh(x);
}

// e^{-Gamma t/2} k(t) with the exponentials merged, finite for either sign of Gamma.
inline double damped_k(double t, const ModelParams& th) {
    const double x = std::numbers::pi * th.temperature * t;
    if (x <= 20.0) return std::exp(-0.5 * th.gamma * t) * k_of_t(t, th);
    const double e = std::exp(-2.0 * x);
    return 4.0 * th.temperature * std::sin(th.detuning() * t) * std::exp(-0.5 * th.gamma * t - x) / (1.0 - e);
}

// Oscillation- and decay-aware panel width for integrals of k.
inline double k_panel_width(const ModelParams& th) {
    const double D = std::abs(th.detuning());
    const double thermal = 1.0 / (std::numbers::pi * th.temperature);
    return D > 0 ? std::min(std::numbers::pi / D, thermal) : thermal;
}

// Panel breaks for integrals of e^{-Gamma s/2} k(s) over [0, t]; panels stop
// once the integrand bound e^{-(pi T + Gamma/2) s} is below 1e-20.
inline std::vector<double> k_breaks(double t, const ModelParams& th) {
    const double rate = std::numbers::pi * th.temperature + 0.5 * th.gamma;
    const double cut = rate > 0 ? std::min(t, 46.0 / rate) : t;
    auto out = panel_breaks(0.0, cut, k_panel_width(th));
    if (cut < t) out.push_back(cut);
    return out;
}

// Strict accuracy for the scalar layer; the GK error estimate is conservative.
inline QuadratureConfig scalar_quadrature(const QuadratureConfig& cfg) {
    QuadratureConfig q = cfg;
    q.abs_tol = std::min(cfg.abs_tol, 1e-13);
    q.rel_tol = std::min(cfg.rel_tol, 1e-13);
    return q;
}

inline double g_of_t(double t, const ModelParams& th, const QuadratureConfig& cfg = {}) {
    if (t < 0) throw config_error("g_of_t: t must be nonnegative");
    if (t == 0.0 || th.detuning() == 0.0) return 0.0;
    auto f = [&](double s) { return damped_k(s, th); };
    return integrate_or_throw(f, 0.0, t, scalar_quadrature(cfg), k_breaks(t, th));
}

inline double g_dual_of_t(double t, const ModelParams& th, const QuadratureConfig& cfg = {}) {
    return g_of_t(t, dual_params(th), cfg);
}

// (1 - e^{-Gamma t}) p = g + e^{-Gamma t} gbar merged under one integral:
// p(t) = int_0^t sinh(Gamma (t-s)/2) k(s) ds / sinh(Gamma t/2).
inline double p_of_t(double t, const ModelParams& th, const QuadratureConfig& cfg = {}) {
    if (t < 0) throw config_error("p_of_t: t must be nonnegative");
    if (t == 0.0 || th.detuning() == 0.0) return 0.0;
    const double D = th.detuning();
    const double a = 0.5 * std::abs(th.gamma);
    const double scale = std::max({std::abs(th.gamma), std::abs(D), std::numbers::pi * th.temperature});
    if (scale * t < 1e-6) return D * t / std::numbers::pi;
    auto ratio = [&](double s) {
        if (a == 0.0) return (t - s) / t;
        // sinh(a(t-s))/sinh(a t) without overflow
        const double e = std::exp(-2.0 * a * t);
        return std::exp(-a * s) * (1.0 - std::exp(-2.0 * a * (t - s))) / (1.0 - e);
    };
    auto f = [&](double s) { return ratio(s) * k_of_t(s, th); };
    // Breaks depend on |Gamma| only, so dual parameters reuse identical nodes.
    const ModelParams even{th.epsilon, th.mu, th.temperature, std::abs(th.gamma)};
    return integrate_or_throw(f, 0.0, t, scalar_quadrature(cfg), k_breaks(t, even));
}

inline std::complex<double> k_hat(std::complex<double> w, const ModelParams& th) {
    const double D = th.detuning();
    if (D == 0.0) return {0.0, 0.0};
    const double twopiT = 2.0 * std::numbers::pi * th.temperature;
    const std::complex<double> I(0.0, 1.0);
    const auto zp = 0.5 - I * (w + D) / twopiT;
    const auto zm = 0.5 - I * (w - D) / twopiT;
    return (I / std::numbers::pi) * (digamma<double>(zp) - digamma<double>(zm));
}

// g(infinity) by quadrature to the horizon where the integrand bound drops below abs_tol/10.
inline double g_infinity_quadrature(const ModelParams& th, const QuadratureConfig& cfg = {}) {
    const double rate = std::numbers::pi * th.temperature + 0.5 * th.gamma;
    if (!(rate > 0)) throw config_error("g(infinity) integral diverges");
    if (th.detuning() == 0.0) return 0.0;
    const double amp = 4.0 * th.temperature / rate;
    double horizon = std::log(std::max(amp, 1e-300) / (cfg.abs_tol * 1e-3)) / rate;
    horizon = std::max(horizon, 1.0 / rate);
    auto f = [&](double s) { return damped_k(s, th); };
    return integrate_or_throw(f, 0.0, horizon, scalar_quadrature(cfg), k_breaks(horizon, th));
}

// Cumulative g on an increasing time grid starting at t0 with initial value g0,
// using 8-point Gauss-Legendre on each sub-interval.
inline std::vector<double> g_cumulative(const std::vector<double>& times, const ModelParams& th, double t0 = 0.0,
                                        double g0 = 0.0) {
    static constexpr double x[4] = {0.183434642495649804939476142360184, 0.525532409916328985817739049189254,
                                    0.796666477413626739591553936475831, 0.960289856497536231683560868569473};
    static constexpr double w[4] = {0.362683783378361982965150449277196, 0.313706645877887287337962201986601,
                                    0.222381034453374470544355994426241, 0.101228536290376259152531354309962};
    std::vector<double> out;
    out.reserve(times.size());
    const double width = 0.25 * k_panel_width(th);
    double acc = g0, prev = t0;
    for (double t : times) {
        const double len = t - prev;
        const int sub = std::max(1, static_cast<int>(std::ceil(len / width)));
        const double h = len / sub;
        for (int s = 0; s < sub; ++s) {
            const double c = prev + (s + 0.5) * h, r = 0.5 * h;
            double sum = 0;
            for (int j = 0; j < 4; ++j) {
                const double u = c - r * x[j], v = c + r * x[j];
                sum += w[j] * (damped_k(u, th) + damped_k(v, th));
            }
            acc += r * sum;
        }
        out.push_back(acc);
        prev = t;
    }
    return out;
}

}  // namespace fdual
