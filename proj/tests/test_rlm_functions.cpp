#include <gtest/gtest.h>

#include <random>

#include "fdual/rlm_functions.hpp"
#include "oracles.hpp"

using namespace fdual;
using cplx = std::complex<double>;

namespace {

const ModelParams kReference{0.5, 0.0, 0.25, 1.0};  // (eps-mu, T) = (Gamma/2, Gamma/4)

ModelParams random_physical(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> e(-3, 3), T(0.1, 2.0), G(0.2, 2.0);
    return {e(rng), e(rng), T(rng), G(rng)};
}

oracle::Theta as_theta(const ModelParams& th) { return {th.epsilon, th.mu, th.temperature, th.gamma}; }

}  // namespace

TEST(DualParams, MapAndInvolution) {
    const ModelParams th{1.0, 0.5, 0.3, 2.0};
    const ModelParams d = dual_params(th);
    EXPECT_EQ(d, (ModelParams{-1.0, -0.5, 0.3, -2.0}));
    EXPECT_EQ(dual_params(d), th);
    const ModelParams z{0.0, 0.0, 0.7, 1.0};
    EXPECT_EQ(dual_params(z).epsilon, 0.0);
    EXPECT_EQ(dual_params(z).gamma, -1.0);
}

TEST(KFunction, LimitsAndDuality) {
    const ModelParams th{1.3, 0.2, 0.4, 1.0};
    EXPECT_NEAR(k_of_t(0.0, th), 2 * 1.1 / M_PI, 1e-15);
    EXPECT_NEAR(k_of_t(1e-9, th), 2 * 1.1 / M_PI, 1e-12);
    // Series branch meets the direct formula.
    const double x = 1e-4 / (M_PI * 0.4);
    EXPECT_NEAR(k_of_t(x * 0.999, th), k_of_t(x * 1.001, th), 1e-6);
    EXPECT_EQ(k_of_t(2.0, {0.4, 0.4, 0.3, 1.0}), 0.0);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> tt(0, 20);
    for (int rep = 0; rep < 100; ++rep) {
        const auto p = random_physical(rng);
        const double t = tt(rng);
        EXPECT_EQ(k_of_t(t, dual_params(p)), -k_of_t(t, p));
        EXPECT_NEAR(k_of_t(t, p), oracle::k(t, as_theta(p)), 1e-13);
    }
    // Large argument branch stays finite.
    EXPECT_TRUE(std::isfinite(k_of_t(1e4, th)));
}

TEST(GFunction, FrozenValues) {
    // 30-digit reference quadratures at (eps-mu, T, Gamma) = (0.5, 0.25, 1).
    const double t[] = {0.5, 1.0, 3.0};
    const double g[] = {0.13924883980272020741, 0.24039358232438318233, 0.39323385102869521865};
    const double gb[] = {-0.17853174309175566462, -0.39170742499800646118, -1.34777565395328409};
    const double p[] = {0.078694476837806719537, 0.15233245046144455162, 0.34321996843444220713};
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(g_of_t(t[i], kReference), g[i], 1e-12);
        EXPECT_NEAR(g_dual_of_t(t[i], kReference), gb[i], 1e-12);
        EXPECT_NEAR(p_of_t(t[i], kReference), p[i], 1e-12);
    }
}

TEST(GFunction, TrivialCases) {
    EXPECT_EQ(g_of_t(0.0, kReference), 0.0);
    EXPECT_EQ(g_of_t(3.0, {0.2, 0.2, 0.5, 1.0}), 0.0);
    EXPECT_THROW(g_of_t(-1.0, kReference), config_error);
}

TEST(GFunction, InfinityMatchesDigammaClosedForm) {
    const ModelParams sets[] = {kReference, {2.0, 0.0, 0.1, 1.0}, {0.3, -0.2, 1.0, 1.0}, {1.0, 0.0, 0.5, 2.0}, {-1.5, 0.5, 0.3, 0.5}};
    for (const auto& th : sets) {
        const double D = th.detuning(), T = th.temperature, G = th.gamma;
        const cplx z = 0.5 + cplx(0.5 * G, D) / (2 * M_PI * T);
        const double closed = 2.0 / M_PI * digamma<double>(z).imag();
        EXPECT_NEAR(g_infinity_quadrature(th), closed, 1e-7);
        EXPECT_NEAR(k_hat(cplx(0, 0.5 * G), th).real(), closed, 1e-13);
    }
    EXPECT_NEAR(k_hat(cplx(0, 0.5), kReference).real(), 0.40794729374314719613, 1e-13);
    EXPECT_NEAR(k_hat(cplx(0, -0.5), kReference).real(), 1.7598993609342418908, 1e-12);
}

TEST(PFunction, LimitsAndBounds) {
    EXPECT_EQ(p_of_t(0.0, kReference), 0.0);
    EXPECT_NEAR(p_of_t(1e-8, kReference), 0.5 * 1e-8 / M_PI, 1e-20);
    std::mt19937_64 rng(32);
    for (int rep = 0; rep < 10; ++rep) {
        const auto th = random_physical(rng);
        for (int i = 1; i <= 50; ++i) {
            const double t = 0.25 * i / th.gamma;
            const double p = p_of_t(t, th);
            EXPECT_LE(std::abs(p), 1.0 + 1e-9);
            EXPECT_EQ(p_of_t(t, dual_params(th)), -p);
        }
    }
}

TEST(PFunction, IdentitiesAgainstDoubleIntegralOracle) {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> tt(0.05, 6.0);
    for (int rep = 0; rep < 12; ++rep) {
        const auto th = random_physical(rng);
        const double t = tt(rng) / th.gamma;
        const double g = g_of_t(t, th), gb = g_dual_of_t(t, th), p = p_of_t(t, th);
        const double G = th.gamma;
        // gbar = e^{Gamma t}[-g + (1 - e^{-Gamma t}) p]
        EXPECT_NEAR(gb, std::exp(G * t) * (-g + (1 - std::exp(-G * t)) * p), 1e-8);
        const double pref = oracle::p_double_integral(t, as_theta(th));
        EXPECT_NEAR(p, pref, 1e-8);
        EXPECT_NEAR((1 - std::exp(-G * t)) * pref, g + std::exp(-G * t) * gb, 1e-8);
    }
}

TEST(PFunction, HighTemperatureLimit) {
    const ModelParams th{0.7, -0.3, 1e4 * 1.0, 1.0};
    for (double t : {0.01, 0.1, 1.0, 5.0}) {
        EXPECT_LT(std::abs(g_of_t(t, th)), 1e-3);
        EXPECT_LT(std::abs(p_of_t(t, th)), 1e-3);
    }
}

TEST(KHat, AntisymmetryAndLaplaceOracle) {
    EXPECT_EQ(k_hat(cplx(0.3, 0.7), {0.5, 0.5, 0.2, 1.0}), cplx(0, 0));
    std::mt19937_64 rng(34);
    for (int rep = 0; rep < 6; ++rep) {
        const auto th = random_physical(rng);
        for (double re : {-1.0, 0.0, 0.8}) {
            const cplx w(re * th.gamma, th.gamma);
            const double L = 60.0 / (th.gamma + M_PI * th.temperature);
            const cplx ref = oracle::laplace_k(w, as_theta(th), L, 400000);
            EXPECT_LT(std::abs(k_hat(w, th) - ref), 1e-8) << w;
        }
    }
}

TEST(KHat, PoleLadder) {
    const ModelParams th = kReference;
    const double D = th.detuning(), T = th.temperature;
    for (int n = 0; n <= 2; ++n) {
        for (int s : {1, -1}) {
            const cplx pole(s * D, -M_PI * T * (2 * n + 1));
            EXPECT_THROW(k_hat(pole, th), pole_error);
            // Simple pole: circle integral of khat is 2 pi i times a finite residue,
            // and |khat| doubles when the radius halves.
            auto ring_max = [&](double r) {
                double m = 0;
                for (int k = 0; k < 32; ++k) m = std::max(m, std::abs(k_hat(pole + r * std::exp(cplx(0, 2 * M_PI * (k + 0.5) / 32)), th)));
                return m;
            };
            EXPECT_NEAR(ring_max(1e-4) / ring_max(2e-4), 2.0, 1e-3);
            cplx res = 0;
            const double r = 1e-3;
            for (int k = 0; k < 32; ++k) {
                const cplx e = std::exp(cplx(0, 2 * M_PI * k / 32));
                res += k_hat(pole + r * e, th) * e;
            }
            res *= r / 32.0;
            // psi has residue -1 at each pole; chain rule gives (i/pi) * eta * (-1) / (-i/(2 pi T)).
            const int eta = -s;
            EXPECT_LT(std::abs(res - cplx(2 * T * eta, 0)), 1e-10);
        }
    }
}
