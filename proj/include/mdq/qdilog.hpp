#pragma once

#include "mdq/params.hpp"
#include "mdq/quadrature.hpp"

#include <vector>

namespace mdq {

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct PoleProximityError : std::runtime_error {
    int n, m;
    PoleProximityError(const std::string& what, int n_, int m_)
        : std::runtime_error(what), n(n_), m(m_) {}
};

struct ContinuationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GbValue {
    cplx value;
    double est_err = 0.0;  // relative
    int b_steps = 0;       // signed number of shifts by b used to reach the strip window
    int binv_steps = 0;    // same for shifts by 1/b
};

inline constexpr double max_abs_imag = 50.0;
inline constexpr double pole_eps = 1e-9;

// Meromorphic G_b with modulus b_choice (any positive value: b, 1/b, b_star, ...).
// Inside the window [m, Q - m], m = min(b, 1/b)/2, the integral formula is used;
// elsewhere the functional equations carry the value from the window.
GbValue G_b_eval(double b_choice, cplx z, const QuadratureSpec& quad = {});
cplx G_b(const ParameterContext& ctx, double b_choice, cplx z, const QuadratureSpec& quad = {});

cplx g_b(const ParameterContext& ctx, double b_choice, double x, const QuadratureSpec& quad = {});

// Continuation g_b(e^{pi i t} x), |t| <= 1.
cplx g_b_phase(const ParameterContext& ctx, double b_choice, double x, double t,
               const QuadratureSpec& quad = {});

// Contour nodes of the Fourier representation of g_b. Each node carries the
// kernel value times the quadrature weight and the path derivative, so that
//   g(x) ~ sum_j c_j x^{i t_j / b}.
// starred selects the e^{-pi Q t} kernel (yielding the conjugate g_b^*);
// phase adds the factor e^{-pi phase t / b}, continuing to g_b(e^{pi i phase} x).
struct FourierKernel {
    double b = 0.0;
    bool starred = false;
    double phase = 0.0;
    std::vector<cplx> t;
    std::vector<cplx> c;

    cplx evaluate(double x) const;
};

// Nodes adapted so that the scalar integral is resolved for every x with
// |log x| <= log_range.
FourierKernel make_fourier_kernel(double b_choice, bool starred, double phase,
                                  const QuadratureSpec& quad = {}, double log_range = 3.0);

cplx g_b_fourier(const ParameterContext& ctx, double b_choice, double x, bool starred,
                 const QuadratureSpec& quad = {}, double phase = 0.0);

}  // namespace mdq
