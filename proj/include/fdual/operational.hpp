#pragma once

// Operational forms obtained by diagonalizing Choi operators sector by
// sector of the bipartite parity (-1)^N kron (-1)^N.

#include <algorithm>
#include <vector>

#include "fdual/liouville.hpp"

namespace fdual {

template <class Real>
struct KrausTerm {
    Real coefficient;
    CMat<Real> op;
    int parity;  // +1 even, -1 odd
};

template <class Real>
struct KrausSetT {
    std::vector<KrausTerm<Real>> terms;

    CMat<Real> reconstruct() const {
        const auto d = terms.front().op.rows();
        CMat<Real> S = CMat<Real>::Zero(d * d, d * d);
        for (const auto& t : terms) S += t.coefficient * lmul_rmul<Real>(t.op, CMat<Real>(t.op.adjoint()));
        return S;
    }
};
using KrausSet = KrausSetT<double>;

template <class Real>
struct JumpTerm {
    Real rate;
    CMat<Real> op;
    int parity;
};

template <class Real>
struct JumpSetT {
    CMat<Real> hamiltonian;
    std::vector<JumpTerm<Real>> terms;
    bool heisenberg = false;

    // Schroedinger: -i[H,.] + sum j D(J). Heisenberg: +i[H,.] + sum j D^H(J).
    CMat<Real> reconstruct() const {
        const std::complex<Real> I(0, 1);
        CMat<Real> L = (heisenberg ? I : -I) * commutator_superop<Real>(hamiltonian);
        for (const auto& t : terms)
            L += t.rate * (heisenberg ? heisenberg_dissipator<Real>(t.op) : dissipator<Real>(t.op));
        return L;
    }
};
using JumpSet = JumpSetT<double>;

struct DecompositionOptions {
    double hermiticity_tol = 1e-10;
    double parity_tol = 1e-10;
    double drop_tol = 1e-12;          // terms with |coefficient| below this are discarded
    double reconstruction_tol = 1e-9;
};

template <class Real>
Eigen::Matrix<int, Eigen::Dynamic, 1> bipartite_parity_diag(const CMat<Real>& parity) {
    const auto d = parity.rows();
    Eigen::Matrix<int, Eigen::Dynamic, 1> b(d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k)
            b(i * d + k) = (parity(i, i).real() > 0 ? 1 : -1) * (parity(k, k).real() > 0 ? 1 : -1);
    return b;
}

template <class Real>
CMat<Real> default_parity(Eigen::Index d) {
    // Occupation-number basis of a single mode: |0> even, |1> odd.
    CMat<Real> P = CMat<Real>::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i) P(i, i) = (i % 2 == 0) ? 1 : -1;
    return P;
}

namespace detail {

template <class Real>
struct SectorEigen {
    Real value;
    CVec<Real> vec;  // full-length bipartite vector
    int parity;
};

// Diagonalizes a Hermitian bipartite matrix within each parity sector.
template <class Real>
std::vector<SectorEigen<Real>> sector_eigensystem(const CMat<Real>& C, const CMat<Real>& parity,
                                                  const DecompositionOptions& opt) {
    const auto b = bipartite_parity_diag<Real>(parity);
    const auto n = C.rows();
    Real off = 0;
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            if (b(r) != b(c)) off = std::max(off, std::abs(C(r, c)));
    if (off > opt.parity_tol)
        throw structure_error("Choi operator mixes parity sectors: map is not parity covariant");
    std::vector<SectorEigen<Real>> out;
    for (int sector : {1, -1}) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index r = 0; r < n; ++r)
            if (b(r) == sector) idx.push_back(r);
        if (idx.empty()) continue;
        const auto m = static_cast<Eigen::Index>(idx.size());
        CMat<Real> block(m, m);
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index c = 0; c < m; ++c) block(r, c) = C(idx[r], idx[c]);
        Eigen::SelfAdjointEigenSolver<CMat<Real>> es(Real(0.5) * (block + block.adjoint()));
        for (Eigen::Index k = 0; k < m; ++k) {
            CVec<Real> v = CVec<Real>::Zero(n);
            for (Eigen::Index r = 0; r < m; ++r) v(idx[r]) = es.eigenvectors()(r, k);
            v *= gauge_phase<Real>(v);
            out.push_back({es.eigenvalues()(k), std::move(v), sector});
        }
    }
    return out;
}

template <class Real>
void check_hermitian(const CMat<Real>& C, const DecompositionOptions& opt) {
    if (max_norm<Real>(CMat<Real>(C - C.adjoint())) > opt.hermiticity_tol)
        throw structure_error("Choi operator is not Hermitian: map is not Hermiticity preserving");
}

}  // namespace detail

template <class Real>
KrausSetT<Real> canonical_kraus(const CMat<Real>& S, const CMat<Real>& parity, const DecompositionOptions& opt = {}) {
    const auto C = choi_of<Real>(S);
    detail::check_hermitian<Real>(C, opt);
    KrausSetT<Real> out;
    for (auto& e : detail::sector_eigensystem<Real>(C, parity, opt)) {
        if (std::abs(e.value) <= opt.drop_tol) continue;
        out.terms.push_back({e.value, operator_from_bipartite<Real>(e.vec), e.parity});
    }
    std::stable_sort(out.terms.begin(), out.terms.end(),
                     [](const auto& a, const auto& b) { return a.coefficient > b.coefficient; });
    return out;
}

template <class Real>
KrausSetT<Real> canonical_kraus(const CMat<Real>& S, const DecompositionOptions& opt = {}) {
    return canonical_kraus<Real>(S, default_parity<Real>(dim_of_super(S)), opt);
}

namespace detail {

// Splits choi[L] = |B><1| + |1><B| + sum j |J><J| with traceless J and
// Tr B real (traceless Hamiltonian gauge).
template <class Real>
JumpSetT<Real> gksl_from_choi(const CMat<Real>& L, const CMat<Real>& parity, bool heisenberg,
                              const DecompositionOptions& opt) {
    const auto d = dim_of_super(L);
    const auto C = choi_of<Real>(L);
    check_hermitian<Real>(C, opt);
    const CVec<Real> one = bipartite_ket<Real>(identity_op<Real>(d));
    const CMat<Real> Q = CMat<Real>::Identity(d * d, d * d) - one * one.adjoint() / Real(d);
    const CMat<Real> QCQ = Q * C * Q;

    JumpSetT<Real> out;
    out.heisenberg = heisenberg;
    for (auto& e : sector_eigensystem<Real>(QCQ, parity, opt)) {
        if (std::abs(e.value) <= opt.drop_tol) continue;
        out.terms.push_back({e.value, operator_from_bipartite<Real>(e.vec), e.parity});
    }
    std::stable_sort(out.terms.begin(), out.terms.end(), [](const auto& a, const auto& b) { return a.rate > b.rate; });

    const CVec<Real> C1 = C * one;
    const std::complex<Real> n11 = one.dot(C1);
    const CMat<Real> B = operator_from_bipartite<Real>(CVec<Real>((C1 - one * n11 / Real(2 * d)) / Real(d)));
    const std::complex<Real> I(0, 1);
    const CMat<Real> imB = (B - B.adjoint()) / (Real(2) * I);
    out.hamiltonian = heisenberg ? imB : CMat<Real>(-imB);

    CMat<Real> anti = CMat<Real>::Zero(d, d);
    for (const auto& t : out.terms)
        anti += t.rate * (heisenberg ? CMat<Real>(t.op * t.op.adjoint()) : CMat<Real>(t.op.adjoint() * t.op));
    const CMat<Real> reB = (B + B.adjoint()) / Real(2);
    const Real consistency = max_norm<Real>(CMat<Real>(reB + Real(0.5) * anti));
    const Real residual = max_norm<Real>(CMat<Real>(out.reconstruct() - L));
    if (consistency > opt.reconstruction_tol || residual > opt.reconstruction_tol)
        throw structure_error("GKSL reconstruction residual above tolerance");
    return out;
}

}  // namespace detail

// Jump expansion of -iG.
template <class Real>
JumpSetT<Real> gksl_decompose(const CMat<Real>& G, const CMat<Real>& parity, const DecompositionOptions& opt = {}) {
    const std::complex<Real> I(0, 1);
    const CMat<Real> L = -I * G;
    const auto d = dim_of_super(G);
    const CVec<Real> one = vectorize<Real>(identity_op<Real>(d));
    if ((one.adjoint() * L).cwiseAbs().maxCoeff() > opt.reconstruction_tol)
        throw structure_error("generator is not trace preserving");
    return detail::gksl_from_choi<Real>(L, parity, false, opt);
}

template <class Real>
JumpSetT<Real> gksl_decompose(const CMat<Real>& G, const DecompositionOptions& opt = {}) {
    return gksl_decompose<Real>(G, default_parity<Real>(dim_of_super(G)), opt);
}

// Heisenberg jump expansion of +iG^H, i.e. dA/dt = i G^H A.
template <class Real>
JumpSetT<Real> gksl_decompose_heisenberg(const CMat<Real>& GH, const CMat<Real>& parity,
                                         const DecompositionOptions& opt = {}) {
    const std::complex<Real> I(0, 1);
    const CMat<Real> L = I * GH;
    const auto d = dim_of_super(GH);
    const CVec<Real> one = vectorize<Real>(identity_op<Real>(d));
    if ((L * one).cwiseAbs().maxCoeff() > opt.reconstruction_tol)
        throw structure_error("Heisenberg generator is not unit preserving");
    return detail::gksl_from_choi<Real>(L, parity, true, opt);
}

}  // namespace fdual
