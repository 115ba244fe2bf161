#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace mdq {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I{0.0, 1.0};

struct ParameterDomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Scalar constants of the modular double. The b^2 irrationality condition
// cannot be represented in floating point and is not checked.
struct ParameterContext {
    double b_squared = 0.3;
    double b = 0.0;
    cplx q;
    double Q_sum = 0.0;
    cplx zeta_b;
    double b_star = 0.0;
    cplx q_star;
    cplx tau_q;
    double alpha = 0.0;
    double Z = 1.0;

    double b_star_squared() const { return b_star * b_star; }
    // Dual side of the super representation: b -> 1/b_star.
    double b_dual() const { return 1.0 / b_star; }
    cplx q_dual() const;
    double alpha_dual() const;
};

ParameterContext make_context(double b_squared, double Z = 1.0);

// zeta_b = exp(pi i/2 ((b^2 + b^-2)/6 + 1/2)), symmetric under b -> 1/b.
cplx zeta(double b);

}  // namespace mdq
