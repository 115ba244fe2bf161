#pragma once

// Independent reference computations used by the unit tests. They share no
// code with the library beyond the scalar types.

#include "mdq/params.hpp"

#include <cmath>
#include <complex>
#include <functional>

namespace oracle {

using mdq::cplx;
using mdq::I;
using mdq::pi;

inline cplx zeta(double b)
{
    return std::exp(I * (pi / 2.0) * ((b * b + 1.0 / (b * b)) / 6.0 + 0.5));
}

// Plain trapezoid rule on [a, b] with n panels.
inline cplx trapezoid(const std::function<cplx(double)>& f, double a, double b, int n)
{
    const double h = (b - a) / n;
    cplx s = 0.5 * (f(a) + f(b));
    for (int k = 1; k < n; ++k) s += f(a + k * h);
    return s * h;
}

// G_b for 0 < Re z < Q from the integral formula, integrated with the
// trapezoid rule along Im t = 0.8 min(b, 1/b), above the pole at t = 0 and
// below the first poles at 2 i min(b, 1/b).
inline cplx G_b(double b, cplx z)
{
    const double Q = b + 1.0 / b;
    const double delta = 0.8 * std::min(b, 1.0 / b);
    const double c = std::min(z.real(), Q - z.real());
    const double L = 42.0 / (pi * c);
    auto integrand = [&](double s) {
        const cplx t(s, delta);
        return std::exp(pi * t * z) / ((std::exp(pi * b * t) - 1.0) * (std::exp(pi * t / b) - 1.0)) / t;
    };
    const cplx integral = trapezoid(integrand, -L, L, 40000);
    return std::conj(zeta(b)) * std::exp(-integral);
}

inline cplx g_b(double b, double x)
{
    const double Q = b + 1.0 / b;
    return std::conj(zeta(b)) / G_b(b, Q / 2.0 + std::log(x) / (2.0 * pi * I * b));
}

}  // namespace oracle
