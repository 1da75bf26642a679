#pragma once

// Dense Liouville-space algebra for small Hilbert spaces.
//
// Vectorization is column stacking: entry (i,j) of X is component j*d+i, so
// vec(L X R) = (R^T kron L) vec(X). The Hilbert-Schmidt product is the
// Euclidean product of vectorized operators, hence the superadjoint of a
// superoperator is its conjugate-transposed d^2 x d^2 matrix.
//
// Choi operators use the bipartite index (i,k) -> i*d+k with the first factor
// carrying the output of the map.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "fdual/errors.hpp"

namespace fdual {

template <class Real>
using CMat = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using CVec = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using cplx = std::complex<double>;
using Op = CMat<double>;        // d x d operator
using SuperOp = CMat<double>;   // d^2 x d^2 superoperator
using ChoiOp = CMat<double>;    // d^2 x d^2 bipartite operator
using LVec = CVec<double>;      // vectorized operator

inline constexpr const char* basis_convention = "column-stacking";

template <class Real>
Eigen::Index dim_of_super(const CMat<Real>& S) {
    const auto n = S.rows();
    if (S.cols() != n) throw dimension_error("superoperator must be square");
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
    if (d * d != n) throw dimension_error("superoperator size is not a perfect square");
    return d;
}

template <class Real>
CVec<Real> vectorize(const CMat<Real>& X) {
    if (X.rows() != X.cols()) throw dimension_error("operator must be square");
    const auto d = X.rows();
    CVec<Real> v(d * d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) v(j * d + i) = X(i, j);
    return v;
}

template <class Real>
CMat<Real> devectorize(const CVec<Real>& v) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (d * d != v.size()) throw dimension_error("vector length is not a perfect square");
    CMat<Real> X(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) X(i, j) = v(j * d + i);
    return X;
}

template <class Real>
CMat<Real> kron(const CMat<Real>& A, const CMat<Real>& B) {
    CMat<Real> K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

// X -> L X R
template <class Real>
CMat<Real> lmul_rmul(const CMat<Real>& L, const CMat<Real>& R) {
    if (L.rows() != L.cols() || R.rows() != R.cols() || L.rows() != R.rows())
        throw dimension_error("lmul_rmul: operators must be square and of equal dimension");
    return kron<Real>(R.transpose(), L);
}

template <class Real>
CMat<Real> identity_op(Eigen::Index d) {
    return CMat<Real>::Identity(d, d);
}

template <class Real>
CMat<Real> identity_super(Eigen::Index d) {
    return CMat<Real>::Identity(d * d, d * d);
}

template <class Real>
CMat<Real> apply(const CMat<Real>& S, const CMat<Real>& X) {
    if (S.rows() != X.size()) throw dimension_error("apply: size mismatch");
    return devectorize<Real>(S * vectorize<Real>(X));
}

template <class Real>
CMat<Real> superadjoint(const CMat<Real>& S) {
    return S.adjoint();
}

template <class Real>
std::complex<Real> hs_inner(const CMat<Real>& A, const CMat<Real>& B) {
    return (A.adjoint() * B).trace();
}

// X -> [H, X]
template <class Real>
CMat<Real> commutator_superop(const CMat<Real>& H) {
    const auto I = identity_op<Real>(H.rows());
    return lmul_rmul<Real>(H, I) - lmul_rmul<Real>(I, H);
}

// X -> {A, X}
template <class Real>
CMat<Real> anticommutator_superop(const CMat<Real>& A) {
    const auto I = identity_op<Real>(A.rows());
    return lmul_rmul<Real>(A, I) + lmul_rmul<Real>(I, A);
}

// X -> J X J^dag - 1/2 {J^dag J, X}
template <class Real>
CMat<Real> dissipator(const CMat<Real>& J) {
    const CMat<Real> Jd = J.adjoint();
    return lmul_rmul<Real>(J, Jd) - Real(0.5) * anticommutator_superop<Real>(CMat<Real>(Jd * J));
}

// Unit-preserving placement: A -> J A J^dag - 1/2 {J J^dag, A}
template <class Real>
CMat<Real> heisenberg_dissipator(const CMat<Real>& J) {
    const CMat<Real> Jd = J.adjoint();
    return lmul_rmul<Real>(J, Jd) - Real(0.5) * anticommutator_superop<Real>(CMat<Real>(J * Jd));
}

// Left multiplication by the parity operator.
template <class Real>
CMat<Real> parity_superop(const CMat<Real>& parity) {
    return lmul_rmul<Real>(parity, identity_op<Real>(parity.rows()));
}

template <class Real>
CMat<Real> choi_of(const CMat<Real>& S) {
    const auto d = dim_of_super(S);
    CMat<Real> C(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k)
            for (Eigen::Index j = 0; j < d; ++j)
                for (Eigen::Index l = 0; l < d; ++l) C(i * d + k, j * d + l) = S(j * d + i, l * d + k);
    return C;
}

template <class Real>
CMat<Real> superop_from_choi(const CMat<Real>& C) {
    const auto d = dim_of_super(C);
    CMat<Real> S(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k)
            for (Eigen::Index j = 0; j < d; ++j)
                for (Eigen::Index l = 0; l < d; ++l) S(j * d + i, l * d + k) = C(i * d + k, j * d + l);
    return S;
}

// |M> = (M kron 1)|1>: row-major entries of M.
template <class Real>
CVec<Real> bipartite_ket(const CMat<Real>& M) {
    const auto d = M.rows();
    CVec<Real> v(d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k) v(i * d + k) = M(i, k);
    return v;
}

template <class Real>
CMat<Real> operator_from_bipartite(const CVec<Real>& v) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (d * d != v.size()) throw dimension_error("vector length is not a perfect square");
    CMat<Real> M(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k) M(i, k) = v(i * d + k);
    return M;
}

template <class Real>
CMat<Real> bipartite_swap(Eigen::Index d) {
    CMat<Real> W = CMat<Real>::Zero(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k) W(k * d + i, i * d + k) = 1;
    return W;
}

// C -> W C^* W with W the bipartite swap.
template <class Real>
CMat<Real> choi_duality_transform(const CMat<Real>& C) {
    const auto W = bipartite_swap<Real>(dim_of_super(C));
    return W * C.conjugate() * W;
}

template <class Real>
Real max_norm(const CMat<Real>& A) {
    return A.size() == 0 ? Real(0) : A.cwiseAbs().maxCoeff();
}

template <class Real>
bool is_tp(const CMat<Real>& S, Real tol) {
    const auto d = dim_of_super(S);
    const CVec<Real> one = vectorize<Real>(identity_op<Real>(d));
    return (one.adjoint() * S - one.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

template <class Real>
bool is_hermiticity_preserving(const CMat<Real>& S, Real tol) {
    const auto C = choi_of<Real>(S);
    return max_norm<Real>(CMat<Real>(C - C.adjoint())) <= tol;
}

template <class Real>
Real min_choi_eigenvalue(const CMat<Real>& S) {
    const auto C = choi_of<Real>(S);
    const CMat<Real> Ch = Real(0.5) * (C + C.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat<Real>> es(Ch, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

template <class Real>
std::pair<bool, Real> is_cp(const CMat<Real>& S, Real tol) {
    const Real m = min_choi_eigenvalue<Real>(S);
    return {m >= -tol, m};
}

// Commutator norm of S with the two-sided parity conjugation X -> P X P.
template <class Real>
Real parity_covariance_defect(const CMat<Real>& S, const CMat<Real>& parity) {
    const auto PP = lmul_rmul<Real>(parity, parity);
    return max_norm<Real>(CMat<Real>(PP * S - S * PP));
}

template <class Real>
Eigen::Index largest_entry_index(const CVec<Real>& v) {
    // First index whose magnitude is within a relative 1e-9 of the maximum.
    const Real m = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) >= m * (1 - Real(1e-9))) return i;
    return 0;
}

// Phase that makes the dominant entry real positive.
template <class Real>
std::complex<Real> gauge_phase(const CVec<Real>& v) {
    const auto z = v(largest_entry_index<Real>(v));
    const Real a = std::abs(z);
    return a == 0 ? std::complex<Real>(1) : std::conj(z) / a;
}

}  // namespace fdual
