#pragma once

// Semigroup and initial-slip approximations built on the stationary generator
// G(inf) = i L(g(inf)), with g(inf) = khat(i Gamma/2).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "fdual/rlm_model.hpp"

namespace fdual {

enum class SlipConstruction { residue_sum, closed_form };

struct SlipOperator {
    SuperOp matrix;
    SlipConstruction construction = SlipConstruction::closed_form;
    std::vector<std::pair<cplx, SuperOp>> residues;  // filled by the residue path only
};

struct ResidueConfig {
    int points = 32;
    double radius_factor = 1e-3;   // radius in units of |Gamma|
    double collision_tol = 1e-9;   // relative to max(1, |Gamma|)
};

inline SuperOp semigroup_propagator(double t, const ModelParams& th) {
    if (t < 0) throw config_error("semigroup_propagator: t must be nonnegative");
    const RlmProvider rp(th);
    SuperOp X = (cplx(0, -1) * t * rp.stationary_generator()).eval();
    return X.exp();
}

// i (E - G(inf))^{-1}
inline SuperOp semigroup_propagator_hat(cplx E, const ModelParams& th) {
    const RlmProvider rp(th);
    const SuperOp A = E * identity_super<double>(2) - rp.stationary_generator();
    Eigen::FullPivLU<SuperOp> lu(A);
    if (!lu.isInvertible()) throw pole_error("semigroup resolvent evaluated at an eigenvalue of G(inf)");
    return cplx(0, 1) * lu.inverse();
}

// Residue of f at c from an equispaced circle of the given radius.
template <class F>
SuperOp contour_residue(const F& f, cplx c, double radius, int points) {
    SuperOp acc = SuperOp::Zero(4, 4);
    for (int k = 0; k < points; ++k) {
        const cplx e = std::exp(cplx(0, 2 * std::numbers::pi * k / points));
        acc += f(c + radius * e) * e;
    }
    return acc * (radius / points);
}

// Eigenvalues of G(inf): 0, -eta eps - i Gamma/2, -i Gamma.
inline std::vector<cplx> stationary_eigenvalues(const ModelParams& th) {
    const double G = th.gamma, e = th.epsilon;
    return {cplx(0), cplx(-e, -0.5 * G), cplx(e, -0.5 * G), cplx(0, -G)};
}

namespace detail {

inline void require_simple_stationary_poles(const ModelParams& th, double radius, const ResidueConfig& cfg) {
    const auto poles = stationary_eigenvalues(th);
    const double scale = std::max(1.0, std::abs(th.gamma));
    for (std::size_t i = 0; i < poles.size(); ++i)
        for (std::size_t j = i + 1; j < poles.size(); ++j)
            if (std::abs(poles[i] - poles[j]) < cfg.collision_tol * scale)
                throw pole_error("stationary eigenvalues collide: slip would need higher-order poles");
    // Ladder poles of khat inside a residue circle would corrupt that residue.
    const double D = th.detuning(), T = th.temperature;
    if (D == 0.0) return;
    for (const auto& c : poles) {
        // Ladder poles of Pi-hat sit at +-D - i Gamma/2 - i pi T (2n+1); nearest n only.
        const double n_real = ((-c.imag() - 0.5 * th.gamma) / (std::numbers::pi * T) - 1.0) / 2.0;
        for (double n : {std::floor(n_real), std::ceil(n_real)}) {
            if (n < 0) continue;
            for (int s : {1, -1}) {
                const cplx lad(s * D, -0.5 * th.gamma - std::numbers::pi * T * (2 * n + 1));
                if (std::abs(lad - c) < 2 * radius)
                    throw pole_error("memory-kernel pole within the residue circle of a stationary eigenvalue");
            }
        }
    }
}

}  // namespace detail

inline SlipOperator slip_operator(const ModelParams& th, SlipConstruction how = SlipConstruction::closed_form,
                                  const ResidueConfig& cfg = {}) {
    const RlmProvider rp(th);
    const double G = th.gamma;
    SlipOperator out;
    out.construction = how;
    if (how == SlipConstruction::closed_form) {
        const cplx kp = rp.k_hat(cplx(0, 0.5 * G)), km = rp.k_hat(cplx(0, -0.5 * G));
        if (!std::isfinite(std::abs(km))) throw pole_error("khat(-i Gamma/2) diverges");
        const LVec one = vectorize<double>(rlm::unit()), par = vectorize<double>(rlm::parity());
        // Coherence-sector term set to zero.
        out.matrix = identity_super<double>(2) + 0.5 * (kp - km) * par * one.adjoint();
        return out;
    }
    const double r = cfg.radius_factor * std::abs(G);
    detail::require_simple_stationary_poles(th, r, cfg);
    out.matrix = SuperOp::Zero(4, 4);
    for (const cplx g : stationary_eigenvalues(th)) {
        const SuperOp res = contour_residue([&](cplx E) { return rp.propagator_hat(E); }, g, r, cfg.points);
        out.residues.emplace_back(g, res);
        out.matrix += cplx(0, -1) * res;
    }
    return out;
}

inline SuperOp slip_propagator(double t, const ModelParams& th) {
    return semigroup_propagator(t, th) * slip_operator(th).matrix;
}

inline SuperOp slip_propagator_hat(cplx E, const ModelParams& th) {
    return semigroup_propagator_hat(E, th) * slip_operator(th).matrix;
}

// max over a ring around c of |(0|Pi-hat - approx|0)|; order 1 semigroup, order 2 slip.
inline double ring_error(const ModelParams& th, cplx c, double radius, int order, int points = 32) {
    const RlmProvider rp(th);
    const SuperOp S = order == 2 ? slip_operator(th).matrix : identity_super<double>(2);
    double m = 0;
    for (int k = 0; k < points; ++k) {
        const cplx E = c + radius * std::exp(cplx(0, 2 * std::numbers::pi * (k + 0.5) / points));
        const SuperOp diff = rp.propagator_hat(E) - semigroup_propagator_hat(E, th) * S;
        m = std::max(m, std::abs(diff(0, 0)));
    }
    return m;
}

struct OnsetResult {
    enum class Kind { finite, always, never };
    Kind kind = Kind::finite;
    double time = 0.0;
    double min_eigenvalue_at_zero = 0.0;
};

struct OnsetConfig {
    double t_max = 0.0;  // 0 selects 10^3 / min(Gamma, T)
    double tol = 1e-12;  // CP means min Choi eigenvalue >= -tol
    int scan_points = 400;
    int persistence_samples = 64;
};

inline double default_onset_horizon(const ModelParams& th) {
    return 1e3 / std::min(std::abs(th.gamma), th.temperature);
}

namespace detail {

inline std::vector<double> log_grid(double a, double b, int n) {
    std::vector<double> out(n);
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i) out[i] = std::exp(la + (lb - la) * i / (n - 1));
    out.back() = b;
    return out;
}

}  // namespace detail

// Last time after which the slip propagator stays CP on the persistence samples.
inline OnsetResult cp_onset_time(const ModelParams& th, const OnsetConfig& cfg = {}) {
    const RlmProvider rp(th);
    const SuperOp G = rp.stationary_generator();
    const SuperOp S = slip_operator(th).matrix;
    auto min_eig = [&](double t) {
        SuperOp X = (cplx(0, -1) * t * G).eval();
        return min_choi_eigenvalue<double>(SuperOp(X.exp() * S));
    };
    auto bad = [&](double t) { return min_eig(t) < -cfg.tol; };
    const double t_max = cfg.t_max > 0 ? cfg.t_max : default_onset_horizon(th);
    const double t_min = 1e-4 / std::max(std::abs(th.gamma), th.temperature);

    OnsetResult out;
    out.min_eigenvalue_at_zero = min_choi_eigenvalue<double>(S);
    auto grid = detail::log_grid(t_min, t_max, cfg.scan_points);
    grid.insert(grid.begin(), 0.0);
    std::ptrdiff_t last_bad = -1;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (bad(grid[i])) last_bad = static_cast<std::ptrdiff_t>(i);
    if (last_bad < 0) {
        out.kind = OnsetResult::Kind::always;
        return out;
    }
    if (last_bad == static_cast<std::ptrdiff_t>(grid.size()) - 1) {
        out.kind = OnsetResult::Kind::never;
        out.time = t_max;
        return out;
    }
    double lo = grid[last_bad], hi = grid[last_bad + 1];
    for (int round = 0; round < 32; ++round) {
        for (int it = 0; it < 80 && hi - lo > 1e-13 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (bad(mid) ? lo : hi) = mid;
        }
        const auto probe = detail::log_grid(hi, t_max, cfg.persistence_samples);
        std::ptrdiff_t v = -1;
        for (std::size_t i = 0; i < probe.size(); ++i)
            if (bad(probe[i])) v = static_cast<std::ptrdiff_t>(i);
        if (v < 0) {
            out.time = hi;
            return out;
        }
        if (v == static_cast<std::ptrdiff_t>(probe.size()) - 1) {
            out.kind = OnsetResult::Kind::never;
            out.time = t_max;
            return out;
        }
        lo = probe[v];
        hi = probe[v + 1];
    }
    out.time = hi;
    return out;
}

struct BreakdownPeak {
    double gamma;
    double height;
};

struct BreakdownScan {
    std::vector<BreakdownPeak> peaks;
    double median = 0.0;
    double threshold = 0.0;
};

// Local maxima of |khat(-i Gamma/2)| over Gamma in (0, 2 pi T (2 n_max + 2)]
// exceeding threshold_factor times the scan median.
inline BreakdownScan breakdown_locator(double T, double detuning, int n_max, double step_factor = 0.005,
                                       double threshold_factor = 10.0) {
    if (!(T > 0)) throw config_error("breakdown_locator: T must be positive");
    if (detuning == 0.0) throw config_error("breakdown_locator: requires eps != mu");
    if (n_max < 0) throw config_error("breakdown_locator: n_max must be nonnegative");
    const ModelParams th{detuning, 0.0, T, 1.0};
    auto h = [&](double G) { return std::abs(k_hat(cplx(0, -0.5 * G), th)); };
    const double top = 2 * std::numbers::pi * T * (2 * n_max + 2);
    const double step = step_factor * T;
    const int n = static_cast<int>(std::ceil(top / step));
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = step * (i + 1);
        ys[i] = h(xs[i]);
    }
    BreakdownScan out;
    std::vector<double> sorted = ys;
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    out.median = sorted[n / 2];
    out.threshold = threshold_factor * out.median;
    for (int i = 1; i + 1 < n; ++i) {
        if (!(ys[i] > ys[i - 1] && ys[i] >= ys[i + 1] && ys[i] > out.threshold)) continue;
        double xb = xs[i];
        const double hb = detail::golden_max_abs(h, xs[i - 1], xs[i + 1], xb);
        out.peaks.push_back({xb, hb});
    }
    return out;
}

struct HeisenbergStationary {
    SuperOp similarity;  // [S^{-1} G(inf) S]^dagger
    SuperOp duality;     // i Gamma - P Gbar(inf) P
    double agreement = 0.0;
};

inline HeisenbergStationary heisenberg_stationary_generator(const ModelParams& th) {
    const RlmProvider rp(th), dual(dual_params(th));
    const SuperOp S = slip_operator(th).matrix;
    Eigen::FullPivLU<SuperOp> lu(S);
    if (!lu.isInvertible()) throw structure_error("slip operator is singular");
    HeisenbergStationary out;
    out.similarity = superadjoint<double>(SuperOp(lu.inverse() * rp.stationary_generator() * S));
    const SuperOp P = rlm::P();
    out.duality = cplx(0, th.gamma) * identity_super<double>(2) - P * dual.stationary_generator() * P;
    out.agreement = max_norm<double>(SuperOp(out.similarity - out.duality));
    return out;
}

struct SlipLimit {
    SuperOp regularized;
    bool naive_diverges = false;
    double naive_max_norm = 0.0;
    double horizon = 0.0;
    SuperOp naive_value;  // F at the horizon, or at the divergence point
};

namespace detail {

// e^{Gamma t} int_t^inf e^{-Gamma s/2} k(s) ds, evaluated without forming e^{Gamma t}.
inline double scaled_kernel_tail(double t, const ModelParams& th) {
    const double G = th.gamma, T = th.temperature, D = th.detuning();
    if (D == 0.0) return 0.0;
    const double rate = std::numbers::pi * T + 0.5 * G;
    auto f = [&](double u) {
        const double s = t + u;
        const double x = std::numbers::pi * T * s;
        const double expo = 0.5 * G * t - 0.5 * G * u - x;
        if (x < 1e-4) return std::exp(0.5 * G * (t - u)) * k_of_t(s, th);
        return 4.0 * T * std::sin(D * s) * std::exp(expo) / (1.0 - std::exp(-2.0 * x));
    };
    const double horizon = 46.0 / rate;
    QuadratureConfig q;
    q.abs_tol = 0.0;
    q.rel_tol = 1e-12;
    return integrate_or_throw(f, 0.0, horizon, q, panel_breaks(0.0, horizon, k_panel_width(th)));
}

// F(t) = e^{i G(inf) t} Pi(t) assembled mode by mode so no factor e^{Gamma t} is formed.
inline SuperOp slip_trajectory(double t, const ModelParams& th, const RlmProvider& rp) {
    const LVec one = vectorize<double>(rlm::unit()), par = vectorize<double>(rlm::parity());
    const double ginf = rp.g_infinity();
    SuperOp F = 0.5 * (one + ginf * par) * one.adjoint();
    for (int eta : {1, -1}) {
        const LVec v = vectorize<double>(Op(rlm::d_eta(eta).adjoint()));
        F += v * v.adjoint();
    }
    const double row = 0.5 * (rp.g_dual(t) - scaled_kernel_tail(t, th));
    F += par * (row * one.adjoint() + 0.5 * par.adjoint());
    return F;
}

}  // namespace detail

// S = -i Res_{E=0} of the Laplace transform of F(t) = e^{i G(inf) t} Pi(t), continued via
// F-hat(E) = sum_i |r_i><l_i| Pi-hat(E + g_i). The naive limit of F(t) is reported alongside.
inline SlipLimit regularized_slip_limit(const ModelParams& th, const ResidueConfig& cfg = {},
                                        double divergence_bound = 1e6, double horizon = 0.0) {
    const RlmProvider rp(th);
    const auto modes = rp.generator_spectral_from_g(rp.g_infinity()).modes;
    const double r = cfg.radius_factor * std::abs(th.gamma);
    detail::require_simple_stationary_poles(th, r, cfg);
    auto Fhat = [&](cplx E) {
        SuperOp acc = SuperOp::Zero(4, 4);
        for (const auto& m : modes)
            acc += vectorize<double>(m.right) * vectorize<double>(m.left).adjoint() * rp.propagator_hat(E + m.value);
        return acc;
    };
    SlipLimit out;
    out.regularized = cplx(0, -1) * contour_residue(Fhat, cplx(0), r, cfg.points);

    out.horizon = horizon > 0 ? horizon : default_onset_horizon(th);
    const auto times = detail::log_grid(0.1 / std::abs(th.gamma), out.horizon, 200);
    for (double t : times) {
        const SuperOp F = detail::slip_trajectory(t, th, rp);
        const double nrm = max_norm<double>(F);
        out.naive_max_norm = std::max(out.naive_max_norm, nrm);
        out.naive_value = F;
        if (!std::isfinite(nrm) || nrm > divergence_bound) {
            out.naive_diverges = true;
            break;
        }
    }
    return out;
}

}  // namespace fdual
