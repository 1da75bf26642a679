#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "fdual/errors.hpp"

namespace fdual {

namespace digamma_detail {

// pi cot(pi z), stable for large |Im z|.
template <class Real>
std::complex<Real> pi_cot_pi(const std::complex<Real>& z) {
    const Real pi = std::numbers::pi_v<Real>;
    const Real x2 = 2 * pi * z.real(), y2 = 2 * pi * z.imag();
    if (std::abs(y2) > 40) {
        const Real ch = std::cosh(Real(40)) * std::exp(std::abs(y2) - 40);
        return pi * std::complex<Real>(std::sin(x2) / ch, -std::tanh(y2)) / (1 - std::cos(x2) / ch);
    }
    const Real den = std::cosh(y2) - std::cos(x2);
    return pi * std::complex<Real>(std::sin(x2), -std::sinh(y2)) / den;
}

}  // namespace digamma_detail

template <class Real>
std::complex<Real> digamma(std::complex<Real> z) {
    const Real xr = std::round(z.real());
    if (z.real() <= Real(0.5) && std::abs(z.imag()) < Real(1e-12) && std::abs(z.real() - xr) < Real(1e-12))
        throw pole_error("digamma pole at nonpositive integer");
    if (z.real() < 0) {
        // psi(z) = psi(1 - z) - pi cot(pi z)
        return digamma<Real>(Real(1) - z) - digamma_detail::pi_cot_pi<Real>(z);
    }
    std::complex<Real> acc(0);
    while (z.real() < 10) {
        acc -= Real(1) / z;
        z += Real(1);
    }
    const std::complex<Real> w = Real(1) / (z * z);
    // Bernoulli terms B_{2k} / (2k) for k = 1..7.
    const std::complex<Real> series =
        w * (Real(1) / 12 -
             w * (Real(1) / 120 -
                  w * (Real(1) / 252 -
                       w * (Real(1) / 240 - w * (Real(1) / 132 - w * (Real(691) / 32760 - w * (Real(1) / 12)))))));
    return acc + std::log(z) - Real(0.5) / z - series;
}

inline std::complex<double> digamma(double x) { return digamma<double>(std::complex<double>(x, 0.0)); }

}  // namespace fdual
