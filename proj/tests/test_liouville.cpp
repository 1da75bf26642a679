#include <gtest/gtest.h>

#include <random>

#include "fdual/liouville.hpp"
#include "fdual/operational.hpp"
#include "fdual/rlm_model.hpp"
#include "fdual/serialize.hpp"
#include "fdual/spectral.hpp"
#include "oracles.hpp"

using namespace fdual;

namespace {

Op ket_bra(int i, int j, int d = 2) {
    Op X = Op::Zero(d, d);
    X(i, j) = 1;
    return X;
}

SuperOp random_super(std::mt19937_64& rng, int d) { return oracle::random_matrix(rng, d * d, d * d); }

}  // namespace

TEST(Vectorize, BasisAndIdentity) {
    const LVec one = vectorize<double>(rlm::unit());
    EXPECT_EQ(one, oracle::v4(1, 0, 0, 1));
    EXPECT_EQ(vectorize<double>(ket_bra(1, 0)), oracle::v4(0, 1, 0, 0));
}

TEST(Vectorize, RoundTripIsExact) {
    std::mt19937_64 rng(1);
    for (int d : {2, 3, 4}) {
        const Op X = oracle::random_matrix(rng, d, d);
        EXPECT_EQ(devectorize<double>(vectorize<double>(X)), X);
    }
    EXPECT_THROW(devectorize<double>(LVec::Zero(3)), dimension_error);
    EXPECT_THROW(vectorize<double>(Op::Zero(2, 3)), dimension_error);
}

TEST(LmulRmul, MatchesExplicitProductAndOracle) {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 20; ++rep) {
        const Op L = oracle::random_matrix(rng, 3, 3), R = oracle::random_matrix(rng, 3, 3),
                 X = oracle::random_matrix(rng, 3, 3);
        const SuperOp S = lmul_rmul<double>(L, R);
        EXPECT_LT(max_norm<double>(Op(apply<double>(S, X) - L * X * R)), 1e-14 * (1 + max_norm<double>(Op(L * X * R))));
        EXPECT_LT(oracle::max_abs(S - oracle::lr_superop(L, R)), 1e-14);
        EXPECT_LT(max_norm<double>(SuperOp(superadjoint<double>(S) -
                                           lmul_rmul<double>(Op(L.adjoint()), Op(R.adjoint())))),
                  1e-14);
    }
    EXPECT_THROW(lmul_rmul<double>(Op::Zero(2, 2), Op::Zero(3, 3)), dimension_error);
}

TEST(LmulRmul, TrivialCases) {
    EXPECT_EQ(lmul_rmul<double>(rlm::unit(), rlm::unit()), identity_super<double>(2));
    const SuperOp P = lmul_rmul<double>(rlm::parity(), rlm::unit());
    EXPECT_EQ(P, rlm::P());
    EXPECT_EQ(P * P, identity_super<double>(2));
    std::mt19937_64 rng(3);
    const Op X = oracle::random_matrix(rng, 2, 2);
    const SuperOp S = superadjoint<double>(lmul_rmul<double>(rlm::annihilator(), Op(rlm::annihilator().adjoint())));
    EXPECT_LT(max_norm<double>(Op(apply<double>(S, X) - rlm::annihilator().adjoint() * X * rlm::annihilator())), 1e-15);
}

TEST(Superadjoint, PairingIdentityAndInvolution) {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 100; ++rep) {
        const int d = 2 + rep % 2;
        const SuperOp S = random_super(rng, d);
        const Op A = oracle::random_matrix(rng, d, d), B = oracle::random_matrix(rng, d, d);
        const cplx lhs = hs_inner<double>(A, apply<double>(S, B));
        const cplx rhs = hs_inner<double>(apply<double>(superadjoint<double>(S), A), B);
        EXPECT_LT(std::abs(lhs - rhs), 1e-12 * (1 + std::abs(lhs)));
        EXPECT_EQ(superadjoint<double>(superadjoint<double>(S)), S);
    }
    EXPECT_EQ(superadjoint<double>(identity_super<double>(2)), identity_super<double>(2));
}

TEST(Superadjoint, CommutatorOfHermitianIsSelfAdjoint) {
    // [H, .] is self-adjoint; -i[H, .] is anti-self-adjoint.
    std::mt19937_64 rng(5);
    Op H = oracle::random_matrix(rng, 3, 3);
    H = (H + H.adjoint()).eval();
    const SuperOp C = commutator_superop<double>(H);
    EXPECT_LT(max_norm<double>(SuperOp(superadjoint<double>(C) - C)), 1e-13);
    const SuperOp L = cplx(0, -1) * C;
    EXPECT_LT(max_norm<double>(SuperOp(superadjoint<double>(L) + L)), 1e-13);
}

TEST(Dissipator, DirectEvaluationAndTraceless) {
    const Op out = apply<double>(dissipator<double>(rlm::annihilator()), ket_bra(1, 1));
    EXPECT_LT(max_norm<double>(Op(out - (ket_bra(0, 0) - ket_bra(1, 1)))), 1e-15);
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 20; ++rep) {
        const Op J = oracle::random_matrix(rng, 3, 3), X = oracle::random_matrix(rng, 3, 3);
        EXPECT_LT(std::abs(apply<double>(dissipator<double>(J), X).trace()), 1e-12);
        EXPECT_LT(max_norm<double>(apply<double>(heisenberg_dissipator<double>(J), Op(Op::Identity(3, 3)))), 1e-12);
    }
}

TEST(Dissipator, ParityTransformOfAdjoint) {
    const SuperOp P = rlm::P();
    for (int eta : {1, -1}) {
        const SuperOp lhs = P * superadjoint<double>(rlm::D_eta(eta)) * P;
        const SuperOp rhs = -rlm::D_eta(-eta) - identity_super<double>(2);
        EXPECT_LT(max_norm<double>(SuperOp(lhs - rhs)), 1e-15);
    }
}

TEST(Choi, IdentityRankOneAndRoundTrip) {
    const ChoiOp C = choi_of<double>(identity_super<double>(2));
    const LVec one = bipartite_ket<double>(rlm::unit());
    EXPECT_LT(max_norm<double>(ChoiOp(C - one * one.adjoint())), 1e-15);
    Eigen::SelfAdjointEigenSolver<ChoiOp> es(C);
    EXPECT_NEAR(es.eigenvalues()(3), 2.0, 1e-14);
    EXPECT_NEAR(es.eigenvalues()(2), 0.0, 1e-14);

    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const SuperOp S = random_super(rng, 2 + rep % 2);
        EXPECT_LT(max_norm<double>(SuperOp(superop_from_choi<double>(choi_of<double>(S)) - S)), 1e-13);
        EXPECT_LT(max_norm<double>(ChoiOp(choi_of<double>(superop_from_choi<double>(S)) - S)), 1e-13);
        EXPECT_LT(oracle::max_abs(choi_of<double>(S) - oracle::choi(S)), 1e-15);
    }
}

TEST(Choi, RankOneConjugation) {
    std::mt19937_64 rng(8);
    const Op M = oracle::random_matrix(rng, 3, 3);
    const ChoiOp C = choi_of<double>(lmul_rmul<double>(M, Op(M.adjoint())));
    const LVec m = bipartite_ket<double>(M);
    EXPECT_LT(max_norm<double>(ChoiOp(C - m * m.adjoint())), 1e-13);
    // |M> = (M kron 1)|1>
    const LVec viaKron = kron<double>(M, Op::Identity(3, 3)) * bipartite_ket<double>(Op(Op::Identity(3, 3)));
    EXPECT_LT((viaKron - m).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Choi, DualityTransform) {
    const LVec one = bipartite_ket<double>(rlm::unit());
    const ChoiOp C1 = one * one.adjoint();
    EXPECT_EQ(choi_duality_transform<double>(C1), C1);
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 10; ++rep) {
        const Op M = oracle::random_matrix(rng, 3, 3);
        const ChoiOp lhs = choi_duality_transform<double>(choi_of<double>(lmul_rmul<double>(M, Op(M.adjoint()))));
        const ChoiOp rhs = choi_of<double>(lmul_rmul<double>(Op(M.adjoint()), M));
        EXPECT_LT(max_norm<double>(ChoiOp(lhs - rhs)), 1e-13);
    }
}

TEST(Predicates, IdentityAndRandomMaps) {
    const SuperOp I = identity_super<double>(2);
    EXPECT_TRUE(is_tp<double>(I, 1e-12));
    auto [cp, m] = is_cp<double>(I, 1e-12);
    EXPECT_TRUE(cp);
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_TRUE(is_hermiticity_preserving<double>(I, 1e-12));
    // Transpose map: TP, Hermiticity preserving, not CP.
    SuperOp Tr = SuperOp::Zero(4, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) Tr(i * 2 + j, j * 2 + i) = 1;
    EXPECT_TRUE(is_tp<double>(Tr, 1e-12));
    EXPECT_TRUE(is_hermiticity_preserving<double>(Tr, 1e-12));
    auto [cpT, mT] = is_cp<double>(Tr, 1e-9);
    EXPECT_FALSE(cpT);
    EXPECT_NEAR(mT, -1.0, 1e-12);
    EXPECT_FALSE(is_tp<double>(SuperOp(2.0 * I), 1e-12));
}

TEST(Spectral, IdentityIsFourfoldDegenerate) {
    const auto sd = spectral_decompose<double>(identity_super<double>(2));
    ASSERT_EQ(sd.degeneracy_groups.size(), 1u);
    EXPECT_EQ(sd.degeneracy_groups[0].size(), 4u);
    EXPECT_LT(max_norm<double>(SuperOp(sd.group_projectors[0] - identity_super<double>(2))), 1e-12);
}

TEST(Spectral, BinormalizationReconstructionOrderAndGauge) {
    std::mt19937_64 rng(10);
    for (int rep = 0; rep < 50; ++rep) {
        const int d = 2 + rep % 2;
        const SuperOp S = random_super(rng, d);
        const auto sd = spectral_decompose<double>(S);
        EXPECT_LT(max_norm<double>(SuperOp(sd.reconstruct() - S)), 1e-9);
        for (std::size_t i = 0; i < sd.modes.size(); ++i) {
            for (std::size_t j = 0; j < sd.modes.size(); ++j) {
                const cplx ov = hs_inner<double>(sd.modes[i].left, sd.modes[j].right);
                EXPECT_LT(std::abs(ov - (i == j ? 1.0 : 0.0)), 1e-9);
            }
            const LVec r = vectorize<double>(sd.modes[i].right);
            const cplx top = r(largest_entry_index<double>(r));
            EXPECT_NEAR(top.imag(), 0.0, 1e-14);
            EXPECT_GT(top.real(), 0.0);
            if (i > 0) {
                const auto a = sd.modes[i - 1].value, b = sd.modes[i].value;
                EXPECT_TRUE(a.real() > b.real() || (std::abs(a.real() - b.real()) < 1e-9 && a.imag() <= b.imag()));
            }
        }
    }
}

TEST(Spectral, DefectiveInputRejected) {
    SuperOp J = SuperOp::Zero(4, 4);
    J(0, 1) = 1;  // Jordan block
    EXPECT_THROW(spectral_decompose<double>(J), defective_error);
}

TEST(CanonicalKraus, IdentityMap) {
    const auto ks = canonical_kraus<double>(identity_super<double>(2));
    ASSERT_EQ(ks.terms.size(), 1u);
    EXPECT_NEAR(ks.terms[0].coefficient, 2.0, 1e-12);
    EXPECT_EQ(ks.terms[0].parity, 1);
    EXPECT_LT(max_norm<double>(Op(ks.terms[0].op - rlm::unit() / std::sqrt(2.0))), 1e-12);
}

TEST(CanonicalKraus, RandomParityCovariantMaps) {
    std::mt19937_64 rng(11);
    const Op par = rlm::parity();
    for (int rep = 0; rep < 30; ++rep) {
        // Sum of conjugations by operators of definite parity, with real weights of either sign.
        SuperOp S = SuperOp::Zero(4, 4);
        std::normal_distribution<double> N(0, 1);
        for (int k = 0; k < 4; ++k) {
            Op A = oracle::random_matrix(rng, 2, 2);
            const Op even = 0.5 * (A + par * A * par), odd = 0.5 * (A - par * A * par);
            S += N(rng) * lmul_rmul<double>(even, Op(even.adjoint()));
            S += N(rng) * lmul_rmul<double>(odd, Op(odd.adjoint()));
        }
        const auto ks = canonical_kraus<double>(S, par);
        EXPECT_LT(max_norm<double>(SuperOp(ks.reconstruct() - S)), 1e-9);
        for (std::size_t a = 0; a < ks.terms.size(); ++a) {
            const Op& M = ks.terms[a].op;
            EXPECT_LT(max_norm<double>(Op(par * M * par - double(ks.terms[a].parity) * M)), 1e-10);
            for (std::size_t b = 0; b < ks.terms.size(); ++b)
                EXPECT_LT(std::abs(hs_inner<double>(M, ks.terms[b].op) - (a == b ? 1.0 : 0.0)), 1e-9);
            const LVec v = bipartite_ket<double>(M);
            const cplx top = v(largest_entry_index<double>(v));
            EXPECT_NEAR(top.imag(), 0.0, 1e-14);
        }
        // Bipartite parity commutes with the Choi operator of a covariant map.
        const ChoiOp C = choi_of<double>(S);
        const ChoiOp B = kron<double>(par, par);
        EXPECT_LT(max_norm<double>(ChoiOp(B * C - C * B)), 1e-10);
    }
}

TEST(CanonicalKraus, RejectsParityMixingAndNonHermitian) {
    Op A = Op::Zero(2, 2);
    A(0, 0) = 1;
    A(0, 1) = 1;  // mixed parity
    EXPECT_THROW(canonical_kraus<double>(lmul_rmul<double>(A, Op(A.adjoint()))), structure_error);
    SuperOp S = identity_super<double>(2);
    S(0, 3) = cplx(0, 1);
    EXPECT_THROW(canonical_kraus<double>(S), structure_error);
}

TEST(Gksl, PureHamiltonianHasNoJumps) {
    Op H = Op::Zero(2, 2);
    H(0, 0) = 0.3;
    H(1, 1) = -0.3;
    const SuperOp G = commutator_superop<double>(H);  // -iG = -i[H,.]
    const auto js = gksl_decompose<double>(G, rlm::parity());
    EXPECT_TRUE(js.terms.empty());
    EXPECT_LT(max_norm<double>(Op(js.hamiltonian - H)), 1e-12);
}

TEST(Gksl, RandomCovariantGenerators) {
    std::mt19937_64 rng(12);
    const Op par = rlm::parity();
    std::normal_distribution<double> N(0, 1);
    for (int rep = 0; rep < 30; ++rep) {
        Op H = Op::Zero(2, 2);
        H(0, 0) = N(rng);
        H(1, 1) = N(rng);
        SuperOp L = cplx(0, -1) * commutator_superop<double>(H);
        for (int eta : {1, -1}) L += N(rng) * dissipator<double>(rlm::d_eta(eta));
        L += N(rng) * dissipator<double>(par);
        const SuperOp G = cplx(0, 1) * L;
        const auto js = gksl_decompose<double>(G, par);
        EXPECT_LT(max_norm<double>(SuperOp(js.reconstruct() - L)), 1e-9);
        EXPECT_LT(max_norm<double>(Op(js.hamiltonian - js.hamiltonian.adjoint())), 1e-12);
        EXPECT_NEAR(std::abs(js.hamiltonian.trace()), 0.0, 1e-12);
        EXPECT_LT(max_norm<double>(Op(js.hamiltonian * par - par * js.hamiltonian)), 1e-10);
        for (std::size_t a = 0; a < js.terms.size(); ++a) {
            EXPECT_LT(std::abs(js.terms[a].op.trace()), 1e-9);
            for (std::size_t b = 0; b < js.terms.size(); ++b)
                EXPECT_LT(std::abs(hs_inner<double>(js.terms[a].op, js.terms[b].op) - (a == b ? 1.0 : 0.0)), 1e-9);
        }
        // Heisenberg placement of the same generator's adjoint.
        const SuperOp LH = superadjoint<double>(L);
        const auto jh = gksl_decompose_heisenberg<double>(SuperOp(cplx(0, -1) * LH), par);
        EXPECT_LT(max_norm<double>(SuperOp(jh.reconstruct() - LH)), 1e-9);
    }
}

TEST(Gksl, RejectsNonTracePreserving) {
    const SuperOp G = cplx(0, 1) * identity_super<double>(2);
    EXPECT_THROW(gksl_decompose<double>(G, rlm::parity()), structure_error);
}

TEST(Serialize, RoundTripIsBitExact) {
    std::mt19937_64 rng(13);
    const SuperOp S = random_super(rng, 2);
    const auto j = superop_to_json(S);
    EXPECT_EQ(j.at("dim"), 2);
    EXPECT_EQ(j.at("basis_convention"), "column-stacking");
    const SuperOp back = superop_from_json(json::parse(j.dump()));
    EXPECT_EQ(back, S);
    const Op X = oracle::random_matrix(rng, 2, 2);
    EXPECT_EQ(operator_from_json(json::parse(operator_to_json(X).dump())), X);
}
