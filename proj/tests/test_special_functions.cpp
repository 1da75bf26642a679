#include <gtest/gtest.h>

#include <random>

#include "fdual/digamma.hpp"
#include "fdual/quadrature.hpp"
#include "oracles.hpp"

using namespace fdual;
using cplx = std::complex<double>;

namespace {

// Recurrence shifted far right plus a three-term asymptotic tail.
cplx digamma_oracle(cplx z) {
    const int N = 20000;
    cplx acc = 0;
    for (int n = 0; n < N; ++n) acc -= 1.0 / (z + double(n));
    const cplx w = z + double(N);
    return acc + std::log(w) - 0.5 / w - 1.0 / (12.0 * w * w);
}

}  // namespace

TEST(Digamma, FrozenValues) {
    // Reference values to 20 digits from an arbitrary-precision library.
    struct Case {
        cplx z, psi;
    };
    const Case cases[] = {
        {{1, 0}, {-0.57721566490153286061, 0}},
        {{0.5, 0}, {-1.9635100260214234794, 0}},
        {{2, 3}, {1.2079807107101508808, 1.1041296805875762097}},
        {{-2.5, 0.3}, {1.1080030134754655709, 2.2145460646932182734}},
        {{0.3, -7}, {1.9454668402635380622, -1.5994088476567767548}},
        {{12.5, 40}, {3.7319483552277125048, 1.2793263788629696725}},
        {{0.5, 0.25}, {-1.538161255709235745, 1.0301191246287899841}},
    };
    for (const auto& c : cases) {
        const cplx v = digamma<double>(c.z);
        EXPECT_LT(std::abs(v - c.psi), 1e-12 * std::max(1.0, std::abs(c.psi))) << c.z;
    }
    const double euler = 0.57721566490153286061;
    EXPECT_NEAR(digamma(1.0).real(), -euler, 1e-14);
    EXPECT_NEAR(digamma(0.5).real(), -euler - 2 * std::log(2.0), 1e-14);
}

TEST(Digamma, RecurrenceAndOracle) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> re(-15, 25), im(-30, 30);
    for (int rep = 0; rep < 200; ++rep) {
        const cplx z(re(rng), im(rng));
        if (std::abs(z.imag()) < 0.05) continue;
        const cplx lhs = digamma<double>(z + 1.0) - digamma<double>(z);
        EXPECT_LT(std::abs(lhs - 1.0 / z), 1e-12 * std::max(1.0, std::abs(digamma<double>(z)))) << z;
        if (z.real() > 0.5) {
            const cplx ref = digamma_oracle(z);
            EXPECT_LT(std::abs(digamma<double>(z) - ref), 1e-11 * std::max(1.0, std::abs(ref))) << z;
        }
    }
}

TEST(Digamma, ConjugateSymmetryAndLargeImaginaryParts) {
    for (double y : {50.0, 500.0, 5e4}) {
        for (double x : {-7.3, 0.5, 3.0}) {
            const cplx z(x, y);
            const cplx a = digamma<double>(z), b = digamma<double>(std::conj(z));
            EXPECT_LT(std::abs(a - std::conj(b)), 1e-12 * std::abs(a));
            EXPECT_TRUE(std::isfinite(a.real()) && std::isfinite(a.imag()));
        }
    }
}

TEST(Digamma, PolesRaise) {
    for (double n : {0.0, -1.0, -7.0}) EXPECT_THROW(digamma<double>(cplx(n, 0)), pole_error);
    EXPECT_NO_THROW(digamma<double>(cplx(-1.0, 1e-6)));
}

TEST(Quadrature, ScalarComplexAndMatrixIntegrands) {
    const QuadratureConfig cfg;
    auto r = integrate([](double x) { return std::exp(-x) * std::sin(3 * x); }, 0.0, 20.0, cfg);
    EXPECT_TRUE(r.converged);
    const double exact = (3.0 - std::exp(-20.0) * (std::sin(60.0) + 3 * std::cos(60.0))) / 10.0;
    EXPECT_NEAR(r.value, exact, 1e-12);

    auto c = integrate([](double x) { return std::exp(cplx(-0.5, 2.0) * x); }, 0.0, 5.0, cfg);
    const cplx ce = (std::exp(cplx(-0.5, 2.0) * 5.0) - 1.0) / cplx(-0.5, 2.0);
    EXPECT_LT(std::abs(c.value - ce), 1e-12);

    auto m = integrate(
        [](double x) {
            Eigen::MatrixXcd A(2, 2);
            A << x, x * x, std::cos(x), cplx(0, 1) * x;
            return A;
        },
        0.0, 1.0, cfg);
    EXPECT_NEAR(m.value(0, 1).real(), 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(m.value(1, 0).real(), std::sin(1.0), 1e-14);
    EXPECT_NEAR(m.value(1, 1).imag(), 0.5, 1e-14);
}

TEST(Quadrature, AgreesWithSimpsonOracleOnOscillatoryDecay) {
    auto f = [](double t) { return 0.5 * std::sin(2.5 * t) / std::sinh(0.25 * M_PI * t + 1e-300) * std::exp(-0.5 * t); };
    auto g = [&](double t) { return t == 0 ? 0.5 * 2.5 / (0.25 * M_PI) : f(t); };
    const QuadratureConfig cfg;
    const double a = integrate_or_throw(g, 0.0, 30.0, cfg, panel_breaks(0.0, 30.0, 1.0));
    const double b = oracle::simpson(g, 0.0, 30.0, 200000);
    EXPECT_NEAR(a, b, 1e-11);
}

TEST(Quadrature, ReportsNonConvergence) {
    QuadratureConfig cfg;
    cfg.max_subdivisions = 3;
    auto r = integrate([](double x) { return 1.0 / std::sqrt(x + 1e-14); }, 0.0, 1.0, cfg);
    EXPECT_FALSE(r.converged);
    EXPECT_GT(r.error, 0.0);
    EXPECT_THROW(integrate_or_throw([](double x) { return 1.0 / std::sqrt(x + 1e-14); }, 0.0, 1.0, cfg),
                 quadrature_error);
}
