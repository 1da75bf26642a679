#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "fdual/liouville.hpp"

namespace fdual {

template <class Real>
struct Mode {
    std::complex<Real> value;
    CMat<Real> right;  // operator form of the right eigenvector
    CMat<Real> left;   // operator form of the left eigenvector, <left|S = value <left|
};

template <class Real>
struct SpectralDecompositionT {
    std::vector<Mode<Real>> modes;
    std::vector<std::vector<std::size_t>> degeneracy_groups;
    std::vector<CMat<Real>> group_projectors;  // sum over the group of |r><l|

    CMat<Real> reconstruct() const {
        const auto d = modes.front().right.rows();
        CMat<Real> S = CMat<Real>::Zero(d * d, d * d);
        for (const auto& m : modes)
            S += m.value * vectorize<Real>(m.right) * vectorize<Real>(m.left).adjoint();
        return S;
    }

    std::vector<std::complex<Real>> eigenvalues() const {
        std::vector<std::complex<Real>> out;
        for (const auto& m : modes) out.push_back(m.value);
        return out;
    }
};
using SpectralDecomposition = SpectralDecompositionT<double>;

struct SpectralOptions {
    double degeneracy_tol = 1e-9;  // relative to max(1, |lambda|)
    double sort_tol = 1e-9;        // real parts closer than this count as equal
    double defect_tol = 1e-12;     // minimum |<l|r>| for unit-norm l, r
};

namespace detail {

template <class Real>
bool mode_before(const std::complex<Real>& a, const std::complex<Real>& b, double tol) {
    const Real scale = std::max<Real>({Real(1), std::abs(a), std::abs(b)});
    if (std::abs(a.real() - b.real()) > tol * scale) return a.real() > b.real();
    return a.imag() < b.imag();
}

}  // namespace detail

// Sorts modes, fixes the right-eigenvector gauge and fills degeneracy data.
template <class Real>
SpectralDecompositionT<Real> finalize_modes(std::vector<Mode<Real>> modes, const SpectralOptions& opt = {}) {
    std::stable_sort(modes.begin(), modes.end(), [&](const Mode<Real>& a, const Mode<Real>& b) {
        return detail::mode_before<Real>(a.value, b.value, opt.sort_tol);
    });
    for (auto& m : modes) {
        const auto ph = gauge_phase<Real>(vectorize<Real>(m.right));
        m.right *= ph;
        m.left *= ph;  // keeps <l|r> unchanged
    }
    SpectralDecompositionT<Real> out;
    out.modes = std::move(modes);
    std::vector<bool> used(out.modes.size(), false);
    for (std::size_t i = 0; i < out.modes.size(); ++i) {
        if (used[i]) continue;
        std::vector<std::size_t> group{i};
        used[i] = true;
        for (std::size_t j = i + 1; j < out.modes.size(); ++j) {
            if (used[j]) continue;
            const auto a = out.modes[i].value, b = out.modes[j].value;
            if (std::abs(a - b) < opt.degeneracy_tol * std::max<Real>({Real(1), std::abs(a), std::abs(b)})) {
                group.push_back(j);
                used[j] = true;
            }
        }
        const auto d = out.modes[i].right.rows();
        CMat<Real> proj = CMat<Real>::Zero(d * d, d * d);
        for (auto k : group)
            proj += vectorize<Real>(out.modes[k].right) * vectorize<Real>(out.modes[k].left).adjoint();
        out.degeneracy_groups.push_back(std::move(group));
        out.group_projectors.push_back(std::move(proj));
    }
    return out;
}

template <class Real>
SpectralDecompositionT<Real> spectral_decompose(const CMat<Real>& S, const SpectralOptions& opt = {}) {
    dim_of_super(S);
    Eigen::ComplexEigenSolver<CMat<Real>> es(S, true);
    if (es.info() != Eigen::Success) throw defective_error("eigen solver did not converge");
    CMat<Real> R = es.eigenvectors();
    for (Eigen::Index j = 0; j < R.cols(); ++j) R.col(j).normalize();
    Eigen::FullPivLU<CMat<Real>> lu(R);
    if (!lu.isInvertible()) throw defective_error("eigenvector matrix is singular");
    const CMat<Real> Linv = lu.inverse();
    std::vector<Mode<Real>> modes;
    for (Eigen::Index j = 0; j < R.cols(); ++j) {
        const CVec<Real> l = Linv.row(j).adjoint();
        // For unit right vectors, |<l_hat|r>| = 1/|l|.
        if (l.norm() * opt.defect_tol > 1) throw defective_error("binormalization failed: near-defective eigenvalue");
        modes.push_back({es.eigenvalues()(j), devectorize<Real>(CVec<Real>(R.col(j))), devectorize<Real>(l)});
    }
    return finalize_modes<Real>(std::move(modes), opt);
}

}  // namespace fdual
