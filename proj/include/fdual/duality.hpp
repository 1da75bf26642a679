#pragma once

// Verification engine for fermionic duality. Every check evaluates both sides
// of one relation between a superoperator family at theta and at the dual
// parameters, and returns the max-norm residual.
//
// Conventions: superadjoint = matrix adjoint in the column-stacked basis,
// P = (-1)^N applied from the left, Gamma = family.gamma_sum(theta).

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "fdual/markov.hpp"
#include "fdual/serialize.hpp"

namespace fdual {

struct SuperOpFamily {
    using TimeFn = std::function<SuperOp(double, const ModelParams&)>;
    using FreqFn = std::function<SuperOp(cplx, const ModelParams&)>;
    using ConstFn = std::function<SuperOp(const ModelParams&)>;

    std::string name = "family";
    TimeFn propagator;
    TimeFn generator;
    TimeFn kernel_smooth;    // K(t) minus its delta part
    TimeFn generator_gflip;  // G(t) with g -> -g; model specific
    FreqFn kernel_hat;
    ConstFn kernel_delta;    // coefficient of delta(t), with int_0^t delta = 1
    ConstFn stationary_generator;
    ConstFn slip;
    std::function<ModelParams(const ModelParams&)> dual_map = dual_params;
    Op parity_operator = rlm::parity();
    std::function<double(const ModelParams&)> gamma_sum = [](const ModelParams& th) { return th.gamma; };
};

struct ResidualReport {
    std::string relation_id;
    ModelParams params;
    json sample_points = json::array();
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    json witness;  // null when there is nothing to report
};

inline json params_to_json(const ModelParams& th) {
    return {{"epsilon", th.epsilon}, {"mu", th.mu}, {"temperature", th.temperature}, {"gamma", th.gamma}};
}

inline ModelParams params_from_json(const json& j) {
    return {j.at("epsilon").get<double>(), j.at("mu").get<double>(), j.at("temperature").get<double>(),
            j.at("gamma").get<double>()};
}

inline json report_to_json(const ResidualReport& r) {
    json j = {{"relation_id", r.relation_id},   {"params", params_to_json(r.params)},
              {"sample_points", r.sample_points}, {"max_residual", r.max_residual},
              {"tolerance", r.tolerance},         {"pass", r.pass}};
    if (!r.witness.is_null()) j["witness"] = r.witness;
    return j;
}

// Test hook: Gamma scaled on the right-hand side of a relation only.
struct Mutation {
    double gamma_scale = 1.0;
    ModelParams rhs(const ModelParams& th) const {
        ModelParams m = th;
        m.gamma *= gamma_scale;
        return m;
    }
};

namespace duality_detail {

template <class Fn>
const Fn& need(const Fn& f, const char* what) {
    if (!f) throw config_error(std::string("family lacks the ") + what + " callback");
    return f;
}

inline ResidualReport make_report(std::string id, const ModelParams& th, double tol) {
    ResidualReport r;
    r.relation_id = std::move(id);
    r.params = th;
    r.tolerance = tol;
    return r;
}

inline void finish(ResidualReport& r) {
    r.pass = std::isfinite(r.max_residual) && r.max_residual <= r.tolerance;
}

inline void bump(ResidualReport& r, double v) {
    if (!std::isfinite(v)) r.max_residual = std::numeric_limits<double>::infinity();
    else r.max_residual = std::max(r.max_residual, v);
}

inline json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline SuperOp parity_super(const SuperOpFamily& f) { return parity_superop<double>(f.parity_operator); }

inline SuperOp resolvent(const SuperOpFamily& f, cplx E, const ModelParams& th) {
    const SuperOp A = E * SuperOp::Identity(4, 4) - need(f.kernel_hat, "kernel_hat")(E, th);
    return cplx(0, 1) * A.inverse();
}

inline double condition_number(const SuperOp& A) {
    Eigen::JacobiSVD<SuperOp> svd(A);
    const auto& s = svd.singularValues();
    return s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

// (Pi^{-1} G Pi)^dagger
inline SuperOp heisenberg_generator(const SuperOpFamily& f, double t, const ModelParams& th, double* cond = nullptr) {
    const SuperOp Pi = need(f.propagator, "propagator")(t, th);
    if (cond) *cond = condition_number(Pi);
    const SuperOp G = need(f.generator, "generator")(t, th);
    return superadjoint<double>(SuperOp(Pi.partialPivLu().solve(G * Pi)));
}

}  // namespace duality_detail

struct DualityTolerances {
    double closed_form = 1e-8;  // closed form against closed form
    double inversion = 1e-7;    // matrix inversion or decomposition involved
    double quadrature = 1e-6;   // quadrature involved
    double functional = 1e-5;   // time-stepped functional equation
};

// Pi(t)^dagger = e^{-Gamma t} P Pibar(t) P and Pi-hat(E)^dagger = P Pibar-hat(i Gamma - E*) P.
inline ResidualReport check_propagator_duality(const SuperOpFamily& f, const ModelParams& th,
                                               const std::vector<double>& times, double tol,
                                               const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("propagator_duality_time", th, tol);
    const ModelParams rhs = mut.rhs(th), dual = f.dual_map(rhs);
    const double G = f.gamma_sum(rhs);
    const SuperOp P = parity_super(f);
    const auto& Pi = need(f.propagator, "propagator");
    for (double t : times) {
        r.sample_points.push_back(t);
        bump(r, max_norm<double>(SuperOp(superadjoint<double>(Pi(t, th)) - std::exp(-G * t) * P * Pi(t, dual) * P)));
    }
    finish(r);
    return r;
}

inline ResidualReport check_propagator_duality_frequency(const SuperOpFamily& f, const ModelParams& th,
                                                         const std::vector<cplx>& freqs, double tol,
                                                         const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("propagator_duality_frequency", th, tol);
    const ModelParams rhs = mut.rhs(th), dual = f.dual_map(rhs);
    const cplx iG(0, f.gamma_sum(rhs));
    const SuperOp P = parity_super(f);
    for (cplx E : freqs) {
        if (E.imag() <= 0) throw config_error("frequency samples need Im E > 0");
        r.sample_points.push_back(cplx_json(E));
        const SuperOp lhs = superadjoint<double>(resolvent(f, E, th));
        bump(r, max_norm<double>(SuperOp(lhs - P * resolvent(f, iG - std::conj(E), dual) * P)));
    }
    finish(r);
    return r;
}

enum class SpectralKind { propagator, generator, kernel_hat };

// Pairs eigen-groups of A with those of the dual operator under
// conj(a_j) = f(abar_i) and checks |l_j><r_j| = P |rbar_i><lbar_i| P group-wise.
inline ResidualReport check_spectral_cross_relations(const SuperOpFamily& f, const ModelParams& th,
                                                     SpectralKind kind, cplx sample, double tol,
                                                     const Mutation& mut = {}) {
    using namespace duality_detail;
    static const char* ids[] = {"spectral_cross_propagator", "spectral_cross_generator", "spectral_cross_kernel_hat"};
    auto r = make_report(ids[static_cast<int>(kind)], th, tol);
    const ModelParams rhs = mut.rhs(th), dual = f.dual_map(rhs);
    const double G = f.gamma_sum(rhs);
    const cplx iG(0, G);
    const SuperOp P = parity_super(f);
    SuperOp A, B;
    std::function<cplx(cplx)> map;
    if (kind == SpectralKind::propagator) {
        const double t = sample.real();
        r.sample_points.push_back(t);
        A = need(f.propagator, "propagator")(t, th);
        B = f.propagator(t, dual);
        map = [G, t](cplx z) { return std::exp(-G * t) * z; };
    } else if (kind == SpectralKind::generator) {
        const double t = sample.real();
        r.sample_points.push_back(t);
        double cond = 0;
        A = superadjoint<double>(heisenberg_generator(f, t, th, &cond));  // Pi^{-1} G Pi
        B = f.generator(t, dual);
        map = [iG](cplx z) { return iG - z; };
    } else {
        r.sample_points.push_back(cplx_json(sample));
        A = need(f.kernel_hat, "kernel_hat")(sample, th);
        B = f.kernel_hat(iG - std::conj(sample), dual);
        map = [iG](cplx z) { return iG - z; };
    }
    const auto sa = spectral_decompose<double>(A);
    const auto sb = spectral_decompose<double>(B);
    json pairs = json::array();
    std::vector<bool> used(sa.degeneracy_groups.size(), false);
    for (std::size_t gi = 0; gi < sb.degeneracy_groups.size(); ++gi) {
        const cplx target = std::conj(map(sb.modes[sb.degeneracy_groups[gi].front()].value));
        const double window = 1e-6 * std::max(1.0, std::abs(target));
        std::vector<std::size_t> cand;
        double nearest = std::numeric_limits<double>::infinity();
        std::size_t best = 0;
        for (std::size_t gj = 0; gj < sa.degeneracy_groups.size(); ++gj) {
            const double dist = std::abs(sa.modes[sa.degeneracy_groups[gj].front()].value - target);
            if (dist < nearest) nearest = dist, best = gj;
            if (dist <= window) cand.push_back(gj);
        }
        if (cand.size() > 1) {
            r.max_residual = std::numeric_limits<double>::infinity();
            r.witness = {{"ambiguous_pairing", cplx_json(target)}};
            finish(r);
            return r;
        }
        if (cand.empty() || used[best] ||
            sa.degeneracy_groups[best].size() != sb.degeneracy_groups[gi].size()) {
            bump(r, std::max(nearest, tol * 10));
            pairs.push_back({{"dual_group", gi}, {"unmatched", cplx_json(target)}});
            continue;
        }
        used[best] = true;
        const SuperOp lhs = superadjoint<double>(sa.group_projectors[best]);
        const SuperOp rhs_proj = P * sb.group_projectors[gi] * P;
        const double res = std::max(nearest, max_norm<double>(SuperOp(lhs - rhs_proj)));
        bump(r, res);
        pairs.push_back({{"dual_value", cplx_json(sb.modes[sb.degeneracy_groups[gi].front()].value)},
                         {"value", cplx_json(sa.modes[sa.degeneracy_groups[best].front()].value)},
                         {"residual", res}});
    }
    r.witness = {{"pairs", pairs}};
    finish(r);
    return r;
}

// Khat(w)^dagger = i Gamma - P Khatbar(i Gamma - w*) P
inline ResidualReport check_kernel_duality_frequency(const SuperOpFamily& f, const ModelParams& th,
                                                     const std::vector<cplx>& freqs, double tol,
                                                     const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("kernel_duality_frequency", th, tol);
    const ModelParams rhs = mut.rhs(th), dual = f.dual_map(rhs);
    const cplx iG(0, f.gamma_sum(rhs));
    const SuperOp P = parity_super(f), I = SuperOp::Identity(4, 4);
    const auto& K = need(f.kernel_hat, "kernel_hat");
    for (cplx w : freqs) {
        r.sample_points.push_back(cplx_json(w));
        bump(r, max_norm<double>(SuperOp(superadjoint<double>(K(w, th)) - (iG * I - P * K(iG - std::conj(w), dual) * P))));
    }
    finish(r);
    return r;
}

// K(t)^dagger = i Gamma delta(t) - e^{-Gamma t} P Kbar(t) P, delta part matched analytically.
inline ResidualReport check_kernel_duality_time(const SuperOpFamily& f, const ModelParams& th,
                                                const std::vector<double>& times, double tol,
                                                const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("kernel_duality_time", th, tol);
    const ModelParams rhs = mut.rhs(th), dual = f.dual_map(rhs);
    const double G = f.gamma_sum(rhs);
    const SuperOp P = parity_super(f), I = SuperOp::Identity(4, 4);
    const auto& Kd = need(f.kernel_delta, "kernel_delta");
    const auto& Ks = need(f.kernel_smooth, "kernel_smooth");
    const double delta_res = max_norm<double>(SuperOp(superadjoint<double>(Kd(th)) - (cplx(0, G) * I - P * Kd(dual) * P)));
    bump(r, delta_res);
    for (double t : times) {
        r.sample_points.push_back(t);
        bump(r, max_norm<double>(SuperOp(superadjoint<double>(Ks(t, th)) + std::exp(-G * t) * P * Ks(t, dual) * P)));
    }
    r.witness = {{"delta_residual", delta_res}};
    finish(r);
    return r;
}

// [Pi^{-1} G Pi]^dagger = i Gamma - P Gbar P
inline ResidualReport check_generator_duality(const SuperOpFamily& f, const ModelParams& th,
                                              const std::vector<double>& times, double tol,
                                              const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("generator_duality", th, tol);
    const ModelParams rhs = mut.rhs(th), dual = f.dual_map(rhs);
    const cplx iG(0, f.gamma_sum(rhs));
    const SuperOp P = parity_super(f), I = SuperOp::Identity(4, 4);
    double worst_cond = 0;
    for (double t : times) {
        r.sample_points.push_back(t);
        double cond = 0;
        const SuperOp GH = heisenberg_generator(f, t, th, &cond);
        worst_cond = std::max(worst_cond, cond);
        if (cond > 1e12) {
            r.max_residual = std::numeric_limits<double>::infinity();
            r.witness = {{"ill_conditioned_propagator", t}, {"condition_number", cond}};
            finish(r);
            return r;
        }
        bump(r, max_norm<double>(SuperOp(GH - (iG * I - P * need(f.generator, "generator")(t, dual) * P))));
    }
    r.witness = {{"max_condition_number", worst_cond}};
    finish(r);
    return r;
}

// G(t)^dagger = i Gamma + P G(t)|_{g -> -g} P
inline ResidualReport check_generator_gflip(const SuperOpFamily& f, const ModelParams& th,
                                            const std::vector<double>& times, double tol,
                                            const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("generator_gflip", th, tol);
    const ModelParams rhs = mut.rhs(th);
    const cplx iG(0, f.gamma_sum(rhs));
    const SuperOp P = parity_super(f), I = SuperOp::Identity(4, 4);
    for (double t : times) {
        r.sample_points.push_back(t);
        const SuperOp lhs = superadjoint<double>(need(f.generator, "generator")(t, th));
        bump(r, max_norm<double>(SuperOp(lhs - (iG * I + P * need(f.generator_gflip, "generator_gflip")(t, rhs) * P))));
    }
    finish(r);
    return r;
}

namespace duality_detail {

struct Term {
    double weight;
    Op op;
    int parity;
};

// Greedy matching of terms a to terms b under a.weight = scale * b.parity * b.weight,
// then operator comparison a.op ~ e^{i phi} b.op. Terms whose weights are
// degenerate within deg_tol are compared through projector sums.
inline double match_terms(const std::vector<Term>& a, const std::vector<Term>& b, double scale, double deg_tol,
                          json& witness) {
    double worst = 0;
    if (a.size() != b.size()) {
        witness["size_mismatch"] = {a.size(), b.size()};
        return std::numeric_limits<double>::infinity();
    }
    struct Cand {
        double cost;
        std::size_t i, j;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            if (a[i].parity == b[j].parity)
                cands.push_back({std::abs(a[i].weight - scale * b[j].parity * b[j].weight), i, j});
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        return std::tie(x.cost, x.i, x.j) < std::tie(y.cost, y.i, y.j);
    });
    std::vector<std::ptrdiff_t> perm(a.size(), -1);
    std::vector<bool> taken(b.size(), false);
    for (const auto& c : cands) {
        if (perm[c.i] >= 0 || taken[c.j]) continue;
        perm[c.i] = static_cast<std::ptrdiff_t>(c.j);
        taken[c.j] = true;
        worst = std::max(worst, c.cost);
    }
    json p = json::array();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (perm[i] < 0) {
            witness["unmatched_term"] = i;
            return std::numeric_limits<double>::infinity();
        }
        p.push_back(perm[i]);
    }
    witness["permutation"] = p;

    // Group degenerate weights in a.
    std::vector<bool> done(a.size(), false);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (done[i]) continue;
        std::vector<std::size_t> grp{i};
        for (std::size_t k = i + 1; k < a.size(); ++k)
            if (!done[k] && a[k].parity == a[i].parity &&
                std::abs(a[k].weight - a[i].weight) <= deg_tol * std::max(1.0, std::abs(a[i].weight)))
                grp.push_back(k);
        for (auto k : grp) done[k] = true;
        if (grp.size() == 1) {
            const Op& x = a[i].op;
            const Op& y = b[perm[i]].op;
            const cplx ov = hs_inner<double>(y, x);
            const cplx phase = std::abs(ov) > 0 ? ov / std::abs(ov) : cplx(1);
            worst = std::max(worst, max_norm<double>(Op(x - phase * y)));
        } else {
            const auto n = a[i].op.size();
            SuperOp pa = SuperOp::Zero(n, n);
            SuperOp pb = pa;
            for (auto k : grp) {
                const LVec va = vectorize<double>(a[k].op), vb = vectorize<double>(b[perm[k]].op);
                pa += va * va.adjoint();
                pb += vb * vb.adjoint();
            }
            worst = std::max(worst, max_norm<double>(SuperOp(pa - pb)));
            witness["projector_groups"].push_back(grp);
        }
    }
    return worst;
}

}  // namespace duality_detail

// M_a^dagger = Mbar_a' and m_a = e^{-Gamma t} (-1)^{N_a'} mbar_a'
inline ResidualReport check_kraus_duality(const SuperOpFamily& f, const ModelParams& th, double t, double tol,
                                          const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("kraus_duality", th, tol);
    r.sample_points.push_back(t);
    const ModelParams rhs = mut.rhs(th), dual = f.dual_map(rhs);
    const double scale = std::exp(-f.gamma_sum(rhs) * t);
    DecompositionOptions opt;
    opt.drop_tol = 0.0;
    const auto& Pi = need(f.propagator, "propagator");
    const auto ka = canonical_kraus<double>(Pi(t, th), f.parity_operator, opt);
    const auto kb = canonical_kraus<double>(Pi(t, dual), f.parity_operator, opt);
    constexpr double drop = 1e-12;
    std::vector<Term> a, b;
    for (const auto& k : ka.terms)
        if (std::abs(k.coefficient) > drop) a.push_back({k.coefficient, Op(k.op.adjoint()), k.parity});
    for (const auto& k : kb.terms)
        if (std::abs(scale * k.coefficient) > drop) b.push_back({k.coefficient, k.op, k.parity});
    json w;
    bump(r, match_terms(a, b, scale, 1e-8, w));
    r.witness = w;
    finish(r);
    return r;
}

// Sum m M^dagger M = 1, sum (-1)^N m M M^dagger = e^{-Gamma t} 1, even and odd weights d(1 +- e^{-Gamma t})/2.
inline ResidualReport check_kraus_sum_rules(const KrausSet& ks, const ModelParams& th, double gamma, double t,
                                            double tol) {
    using namespace duality_detail;
    auto r = make_report("kraus_sum_rules", th, tol);
    r.sample_points.push_back(t);
    const auto d = ks.terms.front().op.rows();
    const double ex = std::exp(-gamma * t);
    Op tp = Op::Zero(d, d), par = Op::Zero(d, d);
    double even = 0, odd = 0;
    for (const auto& k : ks.terms) {
        tp += k.coefficient * k.op.adjoint() * k.op;
        par += double(k.parity) * k.coefficient * k.op * k.op.adjoint();
        (k.parity > 0 ? even : odd) += k.coefficient;
    }
    const Op I = Op::Identity(d, d);
    const double r1 = max_norm<double>(Op(tp - I)), r2 = max_norm<double>(Op(par - ex * I));
    const double r3 = std::abs(even - d * (1 + ex) / 2), r4 = std::abs(odd - d * (1 - ex) / 2);
    for (double v : {r1, r2, r3, r4}) bump(r, v);
    r.witness = {{"trace_rule", r1}, {"parity_rule", r2}, {"even_weight", even}, {"odd_weight", odd}};
    finish(r);
    return r;
}

inline ResidualReport check_kraus_sum_rules(const SuperOpFamily& f, const ModelParams& th,
                                            const std::vector<double>& times, double tol, const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("kraus_sum_rules", th, tol);
    const double G = f.gamma_sum(mut.rhs(th));
    for (double t : times) {
        const auto one = check_kraus_sum_rules(canonical_kraus<double>(need(f.propagator, "propagator")(t, th),
                                                                       f.parity_operator),
                                               th, G, t, tol);
        r.sample_points.push_back(t);
        bump(r, one.max_residual);
    }
    finish(r);
    return r;
}

// Sum j [J^dagger J - (-1)^N J J^dagger] - Gamma 1 and sum_odd j - d Gamma/2.
inline std::pair<double, double> jump_sum_rule_residuals(const JumpSet& js, double gamma) {
    const auto d = js.hamiltonian.rows();
    Op acc = Op::Zero(d, d);
    double odd = 0;
    for (const auto& t : js.terms) {
        acc += t.rate * (t.op.adjoint() * t.op - double(t.parity) * t.op * t.op.adjoint());
        if (t.parity < 0) odd += t.rate;
    }
    return {max_norm<double>(Op(acc - gamma * Op::Identity(d, d))), std::abs(odd - d * gamma / 2)};
}

inline ResidualReport check_jump_sum_rules(const SuperOpFamily& f, const ModelParams& th,
                                           const std::vector<double>& times, double tol, const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("jump_sum_rules", th, tol);
    const double G = f.gamma_sum(mut.rhs(th));
    for (double t : times) {
        r.sample_points.push_back(t);
        const auto js = gksl_decompose<double>(need(f.generator, "generator")(t, th), f.parity_operator);
        const auto jh = gksl_decompose_heisenberg<double>(heisenberg_generator(f, t, th), f.parity_operator);
        for (const auto* set : {&js, &jh}) {
            auto [op_rule, rate_rule] = jump_sum_rule_residuals(*set, G);
            bump(r, op_rule);
            bump(r, rate_rule);
        }
    }
    finish(r);
    return r;
}

// H^H = -Hbar, J^H_a = Jbar_a', j^H_a = (-1)^{N_a'} jbar_a'. G^H is built from the left-hand
// side (Pi, G at theta) so the dual generator enters only through its own decomposition.
inline ResidualReport check_jump_duality(const SuperOpFamily& f, const ModelParams& th, double t, double tol,
                                         const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("jump_duality", th, tol);
    r.sample_points.push_back(t);
    const ModelParams rhs = mut.rhs(th), dual = f.dual_map(rhs);
    const auto jh = gksl_decompose_heisenberg<double>(heisenberg_generator(f, t, th), f.parity_operator);
    const auto jb = gksl_decompose<double>(need(f.generator, "generator")(t, dual), f.parity_operator);
    const double hres = max_norm<double>(Op(jh.hamiltonian + jb.hamiltonian));
    bump(r, hres);
    std::vector<Term> a, b;
    for (const auto& x : jh.terms) a.push_back({x.rate, x.op, x.parity});
    for (const auto& x : jb.terms) b.push_back({x.rate, x.op, x.parity});
    json w;
    bump(r, match_terms(a, b, 1.0, 1e-8, w));
    auto [op_rule, rate_rule] = jump_sum_rule_residuals(jh, f.gamma_sum(rhs));
    bump(r, op_rule);
    bump(r, rate_rule);
    json rates = json::array();
    for (const auto& x : jh.terms) rates.push_back(x.rate);
    w["hamiltonian_residual"] = hres;
    w["heisenberg_rates"] = rates;
    w["sum_rule_residuals"] = {op_rule, rate_rule};
    r.witness = w;
    finish(r);
    return r;
}

// choi[Pi^dagger] = S choi[Pi]* S = e^{-Gamma t} ((-1)^N kron (-1)^N) choi[Pibar]
inline ResidualReport check_choi_duality(const SuperOpFamily& f, const ModelParams& th,
                                         const std::vector<double>& times, double tol, const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("choi_duality", th, tol);
    const ModelParams rhs = mut.rhs(th), dual = f.dual_map(rhs);
    const double G = f.gamma_sum(rhs);
    const auto& Pi = need(f.propagator, "propagator");
    const ChoiOp PP = kron<double>(f.parity_operator, f.parity_operator);
    json mins = json::array();
    for (double t : times) {
        r.sample_points.push_back(t);
        const SuperOp A = Pi(t, th), B = Pi(t, dual);
        const ChoiOp lhs = choi_of<double>(superadjoint<double>(A));
        bump(r, max_norm<double>(ChoiOp(lhs - choi_duality_transform<double>(choi_of<double>(A)))));
        bump(r, max_norm<double>(ChoiOp(lhs - std::exp(-G * t) * PP * choi_of<double>(B))));
        mins.push_back(min_choi_eigenvalue<double>(B));
    }
    r.witness = {{"dual_min_choi_eigenvalue", mins}};
    finish(r);
    return r;
}

// G(inf) = int_0^inf K(t) e^{i t G(inf)} dt, once by sampling Khat at the eigenvalues of
// G(inf) and once by direct quadrature with the delta part applied analytically.
inline ResidualReport check_fixed_point_stationary(const SuperOpFamily& f, const ModelParams& th, double tol,
                                                   const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("stationary_fixed_point", th, tol);
    const ModelParams rhs = mut.rhs(th);
    const SuperOp Ginf = need(f.stationary_generator, "stationary_generator")(th);
    const auto sd = spectral_decompose<double>(Ginf);
    const auto& Khat = need(f.kernel_hat, "kernel_hat");
    SuperOp sampled = SuperOp::Zero(4, 4);
    for (const auto& m : sd.modes)
        sampled += Khat(m.value, rhs) * vectorize<double>(m.right) * vectorize<double>(m.left).adjoint();
    const double sres = max_norm<double>(SuperOp(Ginf - sampled));

    const auto& Ks = need(f.kernel_smooth, "kernel_smooth");
    SuperOp direct = need(f.kernel_delta, "kernel_delta")(rhs);
    auto integrand = [&](double t) -> SuperOp {
        SuperOp X = (cplx(0, 1) * t * Ginf).eval();
        return Ks(t, rhs) * X.exp();
    };
    QuadratureConfig q;
    q.abs_tol = 1e-13;
    q.rel_tol = 1e-12;
    const double w = 0.5 / std::abs(f.gamma_sum(th));
    int quiet = 0;
    bool converged = false;
    for (int panel = 0; panel < 20000; ++panel) {
        const SuperOp part = integrate_or_throw(integrand, panel * w, (panel + 1) * w, q);
        direct += part;
        const double nrm = max_norm<double>(part);
        if (!std::isfinite(nrm)) break;
        quiet = nrm < 1e-14 ? quiet + 1 : 0;
        if (quiet >= 4 && panel >= 10) {
            converged = true;
            break;
        }
    }
    const double dres = converged ? max_norm<double>(SuperOp(Ginf - direct)) : std::numeric_limits<double>::infinity();
    bump(r, sres);
    bump(r, dres);
    // The zero eigenvalue is always sampled: Khat(0) annihilates the stationary state.
    double zero_mode = 0;
    for (const auto& m : sd.modes)
        if (std::abs(m.value) < 1e-9)
            zero_mode = (Khat(cplx(0), rhs) * vectorize<double>(m.right)).cwiseAbs().maxCoeff();
    r.witness = {{"sampling_residual", sres},
                 {"direct_residual", dres},
                 {"direct_converged", converged},
                 {"khat0_stationary_residual", zero_mode}};
    finish(r);
    return r;
}

namespace duality_detail {

// int_0^t K(t-s) U(s,t) ds with U(s_k,t) the product of exp(sign i X(r_j) h), j >= k, later factors rightmost.
inline SuperOp functional_rhs(double t, int n, const std::function<SuperOp(double)>& X, double sign,
                              const SuperOp& Kdelta, const std::function<SuperOp(double)>& Ks) {
    const double h = t / n;
    SuperOp U = SuperOp::Identity(4, 4);
    SuperOp acc = 0.5 * Ks(0.0) * U;  // s = t
    for (int k = n - 1; k >= 0; --k) {
        SuperOp step = (cplx(0, sign) * h * X((k + 0.5) * h)).eval();
        U = step.exp() * U;
        const double wgt = (k == 0) ? 0.5 : 1.0;
        acc += wgt * Ks(t - k * h) * U;
    }
    return Kdelta + h * acc;
}

}  // namespace duality_detail

// G(t) = int_0^t K(t-s) T exp(i int_s^t G) ds; Heisenberg form with K^dagger and -G^H.
inline ResidualReport check_functional_fixed_point(const SuperOpFamily& f, const ModelParams& th, double t,
                                                   int n_steps, double tol, bool heisenberg = false,
                                                   const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report(heisenberg ? "functional_fixed_point_heisenberg" : "functional_fixed_point", th, tol);
    r.sample_points = {t, n_steps};
    const ModelParams rhs = mut.rhs(th);
    const auto& Ks0 = need(f.kernel_smooth, "kernel_smooth");
    const SuperOp Kd0 = need(f.kernel_delta, "kernel_delta")(rhs);
    std::function<SuperOp(double)> X, Ks;
    SuperOp Kd, lhs;
    if (heisenberg) {
        X = [&](double s) { return heisenberg_generator(f, s, th); };
        Ks = [&](double s) { return superadjoint<double>(Ks0(s, rhs)); };
        Kd = superadjoint<double>(Kd0);
        lhs = heisenberg_generator(f, t, th);
    } else {
        const auto& G = need(f.generator, "generator");
        X = [&](double s) { return G(s, th); };
        Ks = [&](double s) { return Ks0(s, rhs); };
        Kd = Kd0;
        lhs = G(t, th);
    }
    const double sign = heisenberg ? -1.0 : 1.0;
    const double r1 = max_norm<double>(SuperOp(lhs - functional_rhs(t, n_steps, X, sign, Kd, Ks)));
    const double r2 = max_norm<double>(SuperOp(lhs - functional_rhs(t, 2 * n_steps, X, sign, Kd, Ks)));
    bump(r, r1);
    r.witness = {{"residual_n", r1}, {"residual_2n", r2}, {"halving_ratio", r1 / r2}};
    finish(r);
    return r;
}

// S^dagger = P Sbar P
inline ResidualReport check_slip_duality(const SuperOpFamily& f, const ModelParams& th, double tol,
                                         const Mutation& mut = {}) {
    using namespace duality_detail;
    auto r = make_report("slip_duality", th, tol);
    const SuperOp P = parity_super(f);
    const auto& S = need(f.slip, "slip");
    bump(r, max_norm<double>(SuperOp(superadjoint<double>(S(th)) - P * S(f.dual_map(mut.rhs(th))) * P)));
    finish(r);
    return r;
}

// ---------------------------------------------------------------------------
// Families

namespace duality_detail {

class ProviderCache {
public:
    explicit ProviderCache(QuadratureConfig q) : q_(q) {}
    std::shared_ptr<const RlmProvider> get(const ModelParams& th) {
        std::lock_guard<std::mutex> lock(m_);
        auto it = map_.find(th);
        if (it == map_.end()) it = map_.emplace(th, std::make_shared<const RlmProvider>(th, q_)).first;
        return it->second;
    }

private:
    QuadratureConfig q_;
    std::mutex m_;
    std::map<ModelParams, std::shared_ptr<const RlmProvider>> map_;
};

}  // namespace duality_detail

inline SuperOpFamily rlm_family(QuadratureConfig q = {}) {
    auto cache = std::make_shared<duality_detail::ProviderCache>(q);
    SuperOpFamily f;
    f.name = "rlm";
    f.propagator = [cache](double t, const ModelParams& th) { return cache->get(th)->propagator(t); };
    f.generator = [cache](double t, const ModelParams& th) { return cache->get(th)->generator(t); };
    f.kernel_smooth = [cache](double t, const ModelParams& th) { return cache->get(th)->kernel_smooth(t); };
    f.generator_gflip = [cache](double t, const ModelParams& th) {
        const auto rp = cache->get(th);
        return rp->generator_from_g(-rp->g(t));
    };
    f.kernel_hat = [cache](cplx E, const ModelParams& th) { return cache->get(th)->memory_kernel_hat(E); };
    f.kernel_delta = [cache](const ModelParams& th) { return cache->get(th)->kernel_delta(); };
    f.stationary_generator = [cache](const ModelParams& th) { return cache->get(th)->stationary_generator(); };
    f.slip = [](const ModelParams& th) { return slip_operator(th).matrix; };
    return f;
}

// Records every callback evaluation so a family can be exported and replayed.
class FamilyRecord {
public:
    void add(const std::string& kind, const json& arg, const ModelParams& th, const SuperOp& m) {
        std::lock_guard<std::mutex> lock(m_);
        auto key = std::make_tuple(kind, arg.dump(), th);
        if (samples_.count(key)) return;
        samples_.emplace(std::move(key), json{{"kind", kind},
                                              {"arg", arg},
                                              {"theta", params_to_json(th)},
                                              {"matrix", matrix_to_json<double>(m)}});
    }
    void add_gamma(const ModelParams& th, double g) {
        std::lock_guard<std::mutex> lock(m_);
        gammas_.emplace(th, g);
    }
    json to_json(const Op& parity) const {
        std::lock_guard<std::mutex> lock(m_);
        json pd = json::array();
        for (Eigen::Index i = 0; i < parity.rows(); ++i) pd.push_back(parity(i, i).real());
        json gs = json::array();
        for (const auto& [th, g] : gammas_) gs.push_back({{"theta", params_to_json(th)}, {"value", g}});
        json ss = json::array();
        for (const auto& [key, s] : samples_) ss.push_back(s);
        return {{"dim", parity.rows()}, {"gamma_sum", gs}, {"parity_diag", pd}, {"samples", ss}};
    }

private:
    mutable std::mutex m_;
    std::map<std::tuple<std::string, std::string, ModelParams>, json> samples_;
    std::map<ModelParams, double> gammas_;
};

inline SuperOpFamily recording_family(const SuperOpFamily& base, std::shared_ptr<FamilyRecord> rec) {
    SuperOpFamily f = base;
    f.name = base.name + "+recording";
    auto wrap_t = [rec](const char* kind, const SuperOpFamily::TimeFn& fn) -> SuperOpFamily::TimeFn {
        if (!fn) return {};
        return [rec, kind, fn](double t, const ModelParams& th) {
            SuperOp m = fn(t, th);
            rec->add(kind, t, th, m);
            return m;
        };
    };
    auto wrap_c = [rec](const char* kind, const SuperOpFamily::ConstFn& fn) -> SuperOpFamily::ConstFn {
        if (!fn) return {};
        return [rec, kind, fn](const ModelParams& th) {
            SuperOp m = fn(th);
            rec->add(kind, nullptr, th, m);
            return m;
        };
    };
    f.propagator = wrap_t("propagator", base.propagator);
    f.generator = wrap_t("generator", base.generator);
    f.kernel_smooth = wrap_t("kernel_smooth", base.kernel_smooth);
    f.generator_gflip = wrap_t("generator_gflip", base.generator_gflip);
    f.kernel_delta = wrap_c("kernel_delta", base.kernel_delta);
    f.stationary_generator = wrap_c("stationary_generator", base.stationary_generator);
    f.slip = wrap_c("slip", base.slip);
    if (base.kernel_hat) {
        auto fn = base.kernel_hat;
        f.kernel_hat = [rec, fn](cplx E, const ModelParams& th) {
            SuperOp m = fn(E, th);
            rec->add("kernel_hat", json::array({E.real(), E.imag()}), th, m);
            return m;
        };
    }
    auto gs = base.gamma_sum;
    f.gamma_sum = [rec, gs](const ModelParams& th) {
        const double g = gs(th);
        rec->add_gamma(th, g);
        return g;
    };
    return f;
}

// Replays a family from its JSON sample table by exact lookup. The dual map is the
// fermionic one, (eps, mu, Gamma) -> (-eps, -mu, -Gamma).
inline SuperOpFamily family_from_json(const json& j) {
    using Key = std::tuple<std::string, std::string, ModelParams>;
    auto table = std::make_shared<std::map<Key, SuperOp>>();
    const int dim = j.at("dim").get<int>();
    if (dim != 2) throw dimension_error("family files must have dim 2");
    const auto& pd = j.at("parity_diag");
    if (!pd.is_array() || static_cast<int>(pd.size()) != dim) throw config_error("parity_diag must list dim entries");
    Op parity = Op::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) parity(i, i) = pd[i].get<double>();

    std::set<std::string> kinds;
    static const std::set<std::string> known = {"propagator",      "generator",    "kernel_hat",
                                                "kernel_delta",    "kernel_smooth", "stationary_generator",
                                                "generator_gflip", "slip"};
    for (const auto& s : j.at("samples")) {
        const std::string kind = s.at("kind").get<std::string>();
        if (!known.count(kind)) throw config_error("unknown sample kind: " + kind);
        const SuperOp m = matrix_from_json(s.at("matrix"));
        if (m.rows() != dim * dim || m.cols() != dim * dim) throw dimension_error("sample matrix has wrong size");
        if (parity_covariance_defect<double>(m, parity) > 1e-10 * std::max(1.0, max_norm<double>(m)))
            throw structure_error("sample of kind " + kind + " is not parity covariant");
        const json arg = s.contains("arg") ? s.at("arg") : json(nullptr);
        table->emplace(Key{kind, arg.dump(), params_from_json(s.at("theta"))}, m);
        kinds.insert(kind);
    }
    auto lookup = [table](const std::string& kind, const json& arg, const ModelParams& th) {
        auto it = table->find(Key{kind, arg.dump(), th});
        if (it == table->end()) throw config_error("family file has no " + kind + " sample at the requested point");
        return it->second;
    };

    SuperOpFamily f;
    f.name = "json";
    f.parity_operator = parity;
    auto time_fn = [&](const char* kind) -> SuperOpFamily::TimeFn {
        if (!kinds.count(kind)) return {};
        std::string k = kind;
        return [lookup, k](double t, const ModelParams& th) { return lookup(k, t, th); };
    };
    auto const_fn = [&](const char* kind) -> SuperOpFamily::ConstFn {
        if (!kinds.count(kind)) return {};
        std::string k = kind;
        return [lookup, k](const ModelParams& th) { return lookup(k, nullptr, th); };
    };
    f.propagator = time_fn("propagator");
    f.generator = time_fn("generator");
    f.kernel_smooth = time_fn("kernel_smooth");
    f.generator_gflip = time_fn("generator_gflip");
    f.kernel_delta = const_fn("kernel_delta");
    f.stationary_generator = const_fn("stationary_generator");
    f.slip = const_fn("slip");
    if (kinds.count("kernel_hat"))
        f.kernel_hat = [lookup](cplx E, const ModelParams& th) {
            return lookup("kernel_hat", json::array({E.real(), E.imag()}), th);
        };

    const auto& gs = j.at("gamma_sum");
    if (gs.is_number()) {
        const double g = gs.get<double>();
        f.gamma_sum = [g](const ModelParams&) { return g; };
    } else {
        auto gmap = std::make_shared<std::map<ModelParams, double>>();
        for (const auto& e : gs) gmap->emplace(params_from_json(e.at("theta")), e.at("value").get<double>());
        f.gamma_sum = [gmap](const ModelParams& th) {
            auto it = gmap->find(th);
            if (it == gmap->end()) throw config_error("family file has no gamma_sum for the requested parameters");
            return it->second;
        };
    }
    return f;
}

// ---------------------------------------------------------------------------
// Default suite

inline std::vector<ModelParams> default_suite_params() {
    return {{0.5, 0.0, 0.25, 1.0}, {1.0, 0.2, 0.5, 1.0}, {-0.7, 0.3, 1.0, 1.0}, {2.0, 0.0, 0.3, 1.0},
            {0.8, -0.4, 2.0, 1.0}};
}

struct SuiteConfig {
    std::vector<ModelParams> params = default_suite_params();
    std::vector<double> times = {0.1, 0.5, 1.0, 3.0};                             // units of 1/|Gamma|
    std::vector<cplx> freqs = {cplx(0, 1), cplx(0.5, 0.3), cplx(-1.2, 2.0)};      // units of |Gamma|
    double functional_time = 2.0;                                                 // units of 1/|Gamma|
    int functional_steps = 400;
    DualityTolerances tol;
    Mutation mutation;
    unsigned threads = 0;  // 0 selects hardware concurrency
};

namespace duality_detail {

inline ResidualReport merge(std::vector<ResidualReport> parts) {
    ResidualReport out = parts.front();
    out.sample_points = json::array();
    out.max_residual = 0;
    json ws = json::array();
    for (const auto& p : parts) {
        for (const auto& s : p.sample_points) out.sample_points.push_back(s);
        bump(out, p.max_residual);
        if (!p.witness.is_null()) ws.push_back(p.witness);
    }
    out.witness = ws.empty() ? json() : ws;
    finish(out);
    return out;
}

struct Relation {
    std::string id;
    std::function<bool(const SuperOpFamily&)> supported;
    std::function<ResidualReport(const SuperOpFamily&, const ModelParams&, const SuiteConfig&)> run;
};

inline std::vector<Relation> relations() {
    using F = SuperOpFamily;
    using C = SuiteConfig;
    auto times = [](const C& c, const ModelParams& th) {
        std::vector<double> out;
        for (double t : c.times) out.push_back(t / std::abs(th.gamma));
        return out;
    };
    auto freqs = [](const C& c, const ModelParams& th) {
        std::vector<cplx> out;
        for (cplx w : c.freqs) out.push_back(w * std::abs(th.gamma));
        return out;
    };
    auto per_time = [times](auto check) {
        return [times, check](const F& f, const ModelParams& th, const C& c) {
            std::vector<ResidualReport> parts;
            for (double t : times(c, th)) parts.push_back(check(f, th, t, c));
            return merge(std::move(parts));
        };
    };
    auto has = [](auto... members) { return [=](const F& f) { return ((static_cast<bool>(f.*members)) && ...); }; };
    std::vector<Relation> rel;
    rel.push_back({"propagator_duality_time", has(&F::propagator), [times](const F& f, const ModelParams& th, const C& c) {
                       return check_propagator_duality(f, th, times(c, th), c.tol.closed_form, c.mutation);
                   }});
    rel.push_back({"propagator_duality_frequency", has(&F::kernel_hat),
                   [freqs](const F& f, const ModelParams& th, const C& c) {
                       return check_propagator_duality_frequency(f, th, freqs(c, th), c.tol.closed_form, c.mutation);
                   }});
    rel.push_back({"spectral_cross_propagator", has(&F::propagator),
                   per_time([](const F& f, const ModelParams& th, double t, const C& c) {
                       return check_spectral_cross_relations(f, th, SpectralKind::propagator, t, c.tol.closed_form,
                                                             c.mutation);
                   })});
    rel.push_back({"spectral_cross_generator", has(&F::propagator, &F::generator),
                   per_time([](const F& f, const ModelParams& th, double t, const C& c) {
                       return check_spectral_cross_relations(f, th, SpectralKind::generator, t, c.tol.inversion,
                                                             c.mutation);
                   })});
    rel.push_back({"spectral_cross_kernel_hat", has(&F::kernel_hat),
                   [freqs](const F& f, const ModelParams& th, const C& c) {
                       std::vector<ResidualReport> parts;
                       for (cplx w : freqs(c, th))
                           parts.push_back(check_spectral_cross_relations(f, th, SpectralKind::kernel_hat, w,
                                                                          c.tol.closed_form, c.mutation));
                       return merge(std::move(parts));
                   }});
    rel.push_back({"kernel_duality_frequency", has(&F::kernel_hat),
                   [freqs](const F& f, const ModelParams& th, const C& c) {
                       return check_kernel_duality_frequency(f, th, freqs(c, th), c.tol.closed_form, c.mutation);
                   }});
    rel.push_back({"kernel_duality_time", has(&F::kernel_delta, &F::kernel_smooth),
                   [times](const F& f, const ModelParams& th, const C& c) {
                       return check_kernel_duality_time(f, th, times(c, th), c.tol.closed_form, c.mutation);
                   }});
    rel.push_back({"generator_duality", has(&F::propagator, &F::generator),
                   [times](const F& f, const ModelParams& th, const C& c) {
                       return check_generator_duality(f, th, times(c, th), c.tol.inversion, c.mutation);
                   }});
    rel.push_back({"generator_gflip", has(&F::generator, &F::generator_gflip),
                   [times](const F& f, const ModelParams& th, const C& c) {
                       return check_generator_gflip(f, th, times(c, th), c.tol.closed_form, c.mutation);
                   }});
    rel.push_back({"kraus_duality", has(&F::propagator),
                   per_time([](const F& f, const ModelParams& th, double t, const C& c) {
                       return check_kraus_duality(f, th, t, c.tol.inversion, c.mutation);
                   })});
    rel.push_back({"kraus_sum_rules", has(&F::propagator), [times](const F& f, const ModelParams& th, const C& c) {
                       return check_kraus_sum_rules(f, th, times(c, th), c.tol.closed_form, c.mutation);
                   }});
    rel.push_back({"jump_duality", has(&F::propagator, &F::generator),
                   per_time([](const F& f, const ModelParams& th, double t, const C& c) {
                       return check_jump_duality(f, th, t, c.tol.inversion, c.mutation);
                   })});
    rel.push_back({"jump_sum_rules", has(&F::propagator, &F::generator),
                   [times](const F& f, const ModelParams& th, const C& c) {
                       return check_jump_sum_rules(f, th, times(c, th), c.tol.inversion, c.mutation);
                   }});
    rel.push_back({"choi_duality", has(&F::propagator), [times](const F& f, const ModelParams& th, const C& c) {
                       return check_choi_duality(f, th, times(c, th), c.tol.closed_form, c.mutation);
                   }});
    rel.push_back({"stationary_fixed_point", has(&F::stationary_generator, &F::kernel_hat, &F::kernel_delta, &F::kernel_smooth),
                   [](const F& f, const ModelParams& th, const C& c) {
                       return check_fixed_point_stationary(f, th, c.tol.quadrature, c.mutation);
                   }});
    for (bool heis : {false, true})
        rel.push_back({heis ? "functional_fixed_point_heisenberg" : "functional_fixed_point",
                       has(&F::generator, &F::kernel_delta, &F::kernel_smooth, &F::propagator),
                       [heis](const F& f, const ModelParams& th, const C& c) {
                           return check_functional_fixed_point(f, th, c.functional_time / std::abs(th.gamma),
                                                               c.functional_steps, c.tol.functional, heis, c.mutation);
                       }});
    rel.push_back({"slip_duality", has(&F::slip), [](const F& f, const ModelParams& th, const C& c) {
                       return check_slip_duality(f, th, c.tol.closed_form, c.mutation);
                   }});
    return rel;
}

}  // namespace duality_detail

inline std::vector<std::string> suite_relation_ids() {
    std::vector<std::string> out;
    for (const auto& r : duality_detail::relations()) out.push_back(r.id);
    return out;
}

// Runs every supported relation at every parameter set. Reports are ordered by
// relation then parameter set, independent of scheduling.
inline std::vector<ResidualReport> run_suite(const SuperOpFamily& f, const SuiteConfig& cfg = {}) {
    const auto rels = duality_detail::relations();
    struct Task {
        const duality_detail::Relation* rel;
        ModelParams th;
    };
    std::vector<Task> tasks;
    for (const auto& rel : rels)
        if (rel.supported(f))
            for (const auto& th : cfg.params) tasks.push_back({&rel, th});
    std::vector<ResidualReport> out(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                out[i] = tasks[i].rel->run(f, tasks[i].th, cfg);
            } catch (const std::exception& e) {
                auto r = duality_detail::make_report(tasks[i].rel->id, tasks[i].th, 0.0);
                r.max_residual = std::numeric_limits<double>::infinity();
                r.witness = {{"error", e.what()}};
                out[i] = r;
            }
        }
    };
    const unsigned n = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace fdual
