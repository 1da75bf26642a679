#pragma once

// Closed-form representations of the resonant level model dynamics.
// Basis {|0>, |1>}; d = |0><1|; d_+ = d^dag, d_- = d; H = eps d^dag d.

#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <variant>

#include "fdual/liouville.hpp"
#include "fdual/operational.hpp"
#include "fdual/rlm_functions.hpp"
#include "fdual/spectral.hpp"

namespace fdual {

namespace rlm {

inline Op annihilator() {
    Op d = Op::Zero(2, 2);
    d(0, 1) = 1;
    return d;
}
inline Op number() {
    Op n = Op::Zero(2, 2);
    n(1, 1) = 1;
    return n;
}
inline Op parity() {
    Op p = Op::Zero(2, 2);
    p(0, 0) = 1;
    p(1, 1) = -1;
    return p;
}
inline Op unit() { return Op::Identity(2, 2); }
// d_+ = d^dag, d_- = d
inline Op d_eta(int eta) { return eta > 0 ? Op(annihilator().adjoint()) : annihilator(); }
inline SuperOp P() { return parity_superop<double>(parity()); }
inline SuperOp D_eta(int eta) { return dissipator<double>(d_eta(eta)); }

}  // namespace rlm

struct PoleCatalog {
    std::vector<cplx> isolated;  // 0, -i Gamma, eps - i Gamma/2, -eps - i Gamma/2
    double detuning = 0, gamma = 0, temperature = 0;
    int n_max = 0;

    // Poles +-(eps-mu) - i Gamma/2 - i pi T (2n+1); sign +1 first.
    std::array<cplx, 2> ladder(int n) const {
        const double im = -0.5 * gamma - std::numbers::pi * temperature * (2 * n + 1);
        return {cplx(detuning, im), cplx(-detuning, im)};
    }
    std::vector<cplx> ladder_list() const {
        std::vector<cplx> out;
        for (int n = 0; n <= n_max; ++n)
            for (auto z : ladder(n)) out.push_back(z);
        return out;
    }
};

struct DivisibilityResult {
    bool diverges = false;
    double max_value = 0;  // meaningful when !diverges
    double argmax = 0;
};

enum class DivisibilityFunction { g, g_dual };

struct ScanConfig {
    int points = 2000;
    double horizon_factor = 40.0;   // horizon = factor / min(Gamma, pi T)
    double divergence_bound = 1e3;
    int max_chunks = 500;
    double convergence_tol = 1e-10;
};

class RlmProvider {
public:
    explicit RlmProvider(ModelParams th, QuadratureConfig quad = {})
        : th_(th), quad_(quad), memo_(std::make_shared<Memo>()) {
        validate(th_);
    }

    const ModelParams& params() const { return th_; }
    const QuadratureConfig& quadrature() const { return quad_; }

    double k(double t) const { return k_of_t(t, th_); }
    double g(double t) const { return cached(t, &Scalars::g, [&] { return g_of_t(t, th_, quad_); }); }
    double g_dual(double t) const { return cached(t, &Scalars::gbar, [&] { return g_dual_of_t(t, th_, quad_); }); }
    double p(double t) const { return cached(t, &Scalars::p, [&] { return p_of_t(t, th_, quad_); }); }
    cplx k_hat(cplx w) const { return fdual::k_hat(w, th_); }
    // Stationary value g(infinity) = khat(i Gamma/2); analytic continuation for dual parameters.
    double g_infinity() const { return k_hat(cplx(0.0, 0.5 * th_.gamma)).real(); }

    SuperOp hamiltonian_part() const {
        return cplx(0, -1) * commutator_superop<double>(Op(th_.epsilon * rlm::number()));
    }

    // -i[H,.] + (Gamma/2) sum_eta (1 - eta x) D_eta
    SuperOp liouvillian(cplx x) const {
        SuperOp L = hamiltonian_part();
        for (int eta : {1, -1}) L += 0.5 * th_.gamma * (1.0 - double(eta) * x) * rlm::D_eta(eta);
        return L;
    }

    SuperOp propagator(double t) const {
        if (t < 0) throw config_error("propagator: t must be nonnegative");
        if (t == 0) return identity_super<double>(2);
        SuperOp X = (liouvillian(p(t)) * t).eval();
        return X.exp();
    }

    SpectralDecomposition propagator_spectral(double t) const {
        const double pt = p(t), G = th_.gamma, e = th_.epsilon;
        const Op one = rlm::unit(), par = rlm::parity();
        std::vector<Mode<double>> modes;
        modes.push_back({1.0, Op(0.5 * (one + pt * par)), one});
        for (int eta : {1, -1}) {
            const Op v = rlm::d_eta(eta).adjoint();
            modes.push_back({std::exp(cplx(-0.5 * G * t, eta * e * t)), v, v});
        }
        modes.push_back({std::exp(-G * t), par, Op(0.5 * (par - pt * one))});
        return finalize_modes<double>(std::move(modes));
    }

    KrausSet kraus_set(double t) const {
        const double pt = p(t), G = th_.gamma, e = th_.epsilon;
        const double ex = std::exp(-G * t);
        const double sig = 0.5 * (1.0 - ex);  // e^{-Gamma t/2} sinh(Gamma t/2)
        const double root = std::sqrt(ex + pt * pt * sig * sig);
        const double tilt = (root == 0.0) ? 0.0 : pt * sig / root;
        KrausSet out;
        const Op dd = rlm::annihilator() * rlm::annihilator().adjoint();  // |0><0|
        const Op n = rlm::number();
        for (int eta : {1, -1}) {
            const double ups = 0.5 + 0.5 * eta * tilt, ups_m = 0.5 - 0.5 * eta * tilt;
            const Op M = double(eta) * std::sqrt(ups) * std::exp(cplx(0, 0.5 * e * t)) * dd +
                         std::sqrt(ups_m) * std::exp(cplx(0, -0.5 * e * t)) * n;
            out.terms.push_back({0.5 * (1.0 + ex) + eta * root, M, +1});
        }
        for (int eta : {1, -1}) out.terms.push_back({sig * (1.0 - eta * pt), rlm::d_eta(eta), -1});
        return out;
    }

    // G = i(-iG)
    SuperOp generator_from_g(double gval) const { return cplx(0, 1) * liouvillian(gval); }
    SuperOp generator(double t) const { return generator_from_g(g(t)); }
    SuperOp stationary_generator() const { return generator_from_g(g_infinity()); }

    SpectralDecomposition generator_spectral(double t) const { return generator_spectral_from_g(g(t)); }

    SpectralDecomposition generator_spectral_from_g(double gval) const {
        const double G = th_.gamma, e = th_.epsilon;
        const Op one = rlm::unit(), par = rlm::parity();
        std::vector<Mode<double>> modes;
        modes.push_back({0.0, Op(0.5 * (one + gval * par)), one});
        for (int eta : {1, -1}) {
            const Op v = rlm::d_eta(eta).adjoint();
            modes.push_back({cplx(-eta * e, -0.5 * G), v, v});
        }
        modes.push_back({cplx(0, -G), par, Op(0.5 * (par - gval * one))});
        return finalize_modes<double>(std::move(modes));
    }

    SuperOp memory_kernel_hat(cplx E) const {
        return cplx(0, 1) * liouvillian(k_hat(E + cplx(0, 0.5 * th_.gamma)));
    }

    // Kernel split K(t) = K_delta delta(t) + K_smooth(t).
    SuperOp kernel_delta() const { return cplx(0, 1) * liouvillian(0.0); }
    SuperOp kernel_smooth(double t) const {
        const double a = -0.5 * th_.gamma * std::exp(-0.5 * th_.gamma * t) * k(t);
        return cplx(0, 1) * a * (rlm::D_eta(1) - rlm::D_eta(-1));
    }

    SuperOp propagator_hat(cplx E) const {
        const double G = th_.gamma, e = th_.epsilon;
        const cplx I(0, 1);
        const LVec one = vectorize<double>(rlm::unit()), par = vectorize<double>(rlm::parity());
        const cplx kh = k_hat(E + I * (0.5 * G));
        for (cplx pole : {cplx(0), cplx(0, -G), cplx(e, -0.5 * G), cplx(-e, -0.5 * G)})
            if (E == pole) throw pole_error("propagator_hat evaluated at an isolated pole");
        SuperOp S = SuperOp::Zero(4, 4);
        for (int eta : {1, -1}) {
            const LVec v = vectorize<double>(Op(rlm::d_eta(eta).adjoint()));
            S += I / (E + double(eta) * e + I * (0.5 * G)) * v * v.adjoint();
        }
        S += (I / E) * 0.5 * (one + kh * par) * one.adjoint();
        S += (I / (E + I * G)) * 0.5 * par * (par.adjoint() - kh * one.adjoint());
        return S;
    }

    JumpSet jump_set(double t) const {
        const double gt = g(t);
        JumpSet out;
        out.hamiltonian = th_.epsilon * rlm::number();
        for (int eta : {1, -1}) out.terms.push_back({0.5 * th_.gamma * (1.0 - eta * gt), rlm::d_eta(eta), -1});
        return out;
    }

    std::pair<double, double> heisenberg_jump_rates(double t) const {
        const double gb = g_dual(t);
        return {0.5 * th_.gamma * (1.0 - gb), 0.5 * th_.gamma * (1.0 + gb)};
    }

    static void validate_state(const Op& rho) {
        if (rho.rows() != 2 || rho.cols() != 2) throw dimension_error("initial state must be 2x2");
        if (max_norm<double>(Op(rho - rho.adjoint())) > 1e-12) throw config_error("initial state not Hermitian");
        if (std::abs(rho.trace() - 1.0) > 1e-12) throw config_error("initial state not unit trace");
    }

    double occupation(double t, const Op& rho0) const {
        validate_state(rho0);
        return (rlm::number() * apply<double>(propagator(t), rho0)).trace().real();
    }

    double current(double t, const Op& rho0) const {
        validate_state(rho0);
        const double par0 = (rlm::parity() * rho0).trace().real();
        return th_.gamma * std::exp(-th_.gamma * t) * 0.5 * (g_dual(t) + par0);
    }

    PoleCatalog pole_catalog(int n_max) const {
        if (n_max < 0) throw config_error("n_max must be nonnegative");
        const double G = th_.gamma, e = th_.epsilon;
        return {{cplx(0), cplx(0, -G), cplx(e, -0.5 * G), cplx(-e, -0.5 * G)}, th_.detuning(), G, th_.temperature,
                n_max};
    }

    // Growth ratio of max|propagator_hat| between circles of radius r/2 and r (2 for a simple pole).
    double pole_growth_ratio(cplx E, double r) const {
        auto ring = [&](double rad) {
            double m = 0;
            for (int k = 0; k < 32; ++k) {
                const cplx z = E + rad * std::exp(cplx(0, 2 * std::numbers::pi * (k + 0.5) / 32));
                m = std::max(m, max_norm<double>(propagator_hat(z)));
            }
            return m;
        };
        return ring(0.5 * r) / ring(r);
    }

private:
    struct Scalars {
        std::optional<double> g, gbar, p;
    };
    struct Memo {
        std::mutex m;
        std::map<double, Scalars> table;
    };

    template <class F>
    double cached(double t, std::optional<double> Scalars::*field, F&& compute) const {
        {
            std::lock_guard<std::mutex> lock(memo_->m);
            auto it = memo_->table.find(t);
            if (it != memo_->table.end() && (it->second.*field)) return *(it->second.*field);
        }
        const double v = compute();
        std::lock_guard<std::mutex> lock(memo_->m);
        memo_->table[t].*field = v;
        return v;
    }

    ModelParams th_;
    QuadratureConfig quad_;
    std::shared_ptr<Memo> memo_;
};

namespace detail {

inline double golden_max_abs(const std::function<double(double)>& f, double a, double b, double& xbest) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = std::abs(f(c)), fd = std::abs(f(d));
    for (int it = 0; it < 60 && (b - a) > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = std::abs(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = std::abs(f(d));
        }
    }
    xbest = fc > fd ? c : d;
    return std::max(fc, fd);
}

}  // namespace detail

// max_t |g(t)| (or |gbar(t)|) by dense scan plus golden-section refinement.
inline DivisibilityResult divisibility_max(DivisibilityFunction which, const ModelParams& th,
                                           const ScanConfig& cfg = {}) {
    validate(th);
    DivisibilityResult res;
    if (th.detuning() == 0.0) return res;
    const ModelParams src = which == DivisibilityFunction::g ? th : dual_params(th);
    const double scale = std::min(std::abs(th.gamma), std::numbers::pi * th.temperature);
    const double H = cfg.horizon_factor / scale;
    const int N = cfg.points;

    double t0 = 0.0, g0 = 0.0, best = 0.0, tbest = 0.0, prev_variation = -1.0;
    std::vector<double> best_bracket{0.0, 0.0, 0.0};  // (t_left, g_left, t_right)
    for (int chunk = 0; chunk < cfg.max_chunks; ++chunk) {
        std::vector<double> times(N);
        for (int i = 0; i < N; ++i) times[i] = t0 + H * (i + 1) / N;
        const auto vals = g_cumulative(times, src, t0, g0);
        double variation = 0.0;
        for (int i = 0; i < N; ++i) {
            variation = std::max(variation, std::abs(vals[i] - g0));
            if (std::abs(vals[i]) > best) {
                best = std::abs(vals[i]);
                tbest = times[i];
                const double tl = i > 0 ? times[i - 1] : t0;
                const double gl = i > 0 ? vals[i - 1] : g0;
                const double tr = i + 1 < N ? times[i + 1] : times[i];
                best_bracket = {tl, gl, tr};
            }
        }
        if (best > cfg.divergence_bound) {
            res.diverges = true;
            return res;
        }
        t0 = times.back();
        g0 = vals.back();
        if (which == DivisibilityFunction::g) break;  // physical g settles within the horizon
        if (variation <= cfg.convergence_tol * std::max(1.0, best)) break;
        if (chunk == cfg.max_chunks - 1 && prev_variation >= 0 && variation > prev_variation) {
            res.diverges = true;
            return res;
        }
        prev_variation = variation;
    }
    // Refine around the best sample.
    const double tl = best_bracket[0], gl = best_bracket[1], tr = best_bracket[2];
    if (tr > tl) {
        auto f = [&](double t) { return t <= tl ? gl : g_cumulative({t}, src, tl, gl)[0]; };
        double xb = tbest;
        const double refined = detail::golden_max_abs(f, tl, tr, xb);
        if (refined > best) {
            best = refined;
            tbest = xb;
        }
    }
    res.max_value = best;
    res.argmax = tbest;
    return res;
}

}  // namespace fdual
