#include "mdq/params.hpp"

#include <cmath>

namespace mdq {

cplx zeta(double b)
{
    const double s = (b * b + 1.0 / (b * b)) / 6.0 + 0.5;
    return std::polar(1.0, 0.5 * pi * s);
}

cplx ParameterContext::q_dual() const
{
    return std::polar(1.0, pi / b_star_squared());
}

double ParameterContext::alpha_dual() const
{
    return 1.0 / std::tan(pi * (1.0 / b_star_squared() - 0.5));
}

ParameterContext make_context(double b_squared, double Z)
{
    if (!(b_squared > 0.0 && b_squared < 0.5))
        throw ParameterDomainError("b_squared must lie in (0, 1/2), got " + std::to_string(b_squared));
    if (!(Z > 0.0))
        throw ParameterDomainError("Z must be positive, got " + std::to_string(Z));

    ParameterContext c;
    c.b_squared = b_squared;
    c.b = std::sqrt(b_squared);
    c.q = std::polar(1.0, pi * b_squared);
    c.Q_sum = c.b + 1.0 / c.b;
    c.zeta_b = zeta(c.b);
    c.b_star = std::sqrt(b_squared + 0.5);
    // q_star = e^{pi i b^2} e^{pi i/2} = i q, formed as a product so the identity is exact.
    c.q_star = I * c.q;
    c.tau_q = std::polar(1.0, pi * (1.0 / c.b_star_squared() - 0.5));
    c.alpha = 1.0 / std::tan(pi * b_squared);
    c.Z = Z;
    return c;
}

}  // namespace mdq
